"""Continuous eigenvector field for one eigenvalue branch.

Along a branch ``lam`` of ``A = [[f, h], [conj h, g]]`` two row
parametrizations of the eigenvector are available::

    FIRST   u = [h / (lam - f), 1]
    SECOND  w = [1, conj(h) / (lam - g)]

Each is valid where its denominator is nonzero, and the two denominators
never vanish together while the eigenvalues are distinct. The walk follows
one form until its denominator is about to vanish, hands off to the other
form at a grid point where both are valid, and multiplies in the matching
constant so the track stays continuous.

For a numerically robust handoff the active form counts as "crossing" once
``|denominator| <= handoff_ratio * gap + tol_match``; since
``|lam - f| + |lam - g| = gap`` this leaves a hysteresis band between the
two forms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadInitialVector,
    BothDenominatorsSmall,
    ConfigError,
    GapTooSmall,
    MaxSwitchesExceeded,
    NoValidHandoff,
    VerificationError,
)
from .spectral import golden_minimize, spectrum
from .tracks import Grid, HermitianField


class Branch(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class Form(enum.Enum):
    FIRST = "first"
    SECOND = "second"

    @property
    def other(self) -> "Form":
        return Form.SECOND if self is Form.FIRST else Form.FIRST


@dataclass(frozen=True)
class WalkOptions:
    handoff_ratio: float = 0.1
    tol_match: float = 1e-12
    tol_resid: float = 1e-10
    max_switches: int = 10_000
    hysteresis: int = 5
    bisect_tol: float = 1e-12  # relative to b - a
    continuity_tol: float = 1e-10

    def __post_init__(self):
        if not (0 < self.handoff_ratio < 0.5):
            raise ConfigError("handoff_ratio must lie in (0, 0.5)")
        for name in ("tol_match", "tol_resid", "bisect_tol", "continuity_tol"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")


def branch_terms(f, g, hr, hc, branch: Branch):
    """``(lam, lam - f, lam - g, gap)`` on arrays, each without cancellation."""
    lp, lm, p, q, gap = spectrum(f, g, hr, hc)
    if branch is Branch.PLUS:
        return lp, q, p, gap
    return lm, -p, -q, gap


def form_vectors(form: Form, h, d_f, d_g):
    """Unscaled eigenvectors ``(n, 2)`` of the given row form."""
    h = np.asarray(h)
    one = np.ones(h.shape, dtype=h.dtype)
    if form is Form.FIRST:
        return np.stack([h / d_f, one], axis=-1)
    return np.stack([one, np.conj(h) / d_g], axis=-1)


@dataclass(frozen=True)
class Segment:
    form: Form
    t_start: float
    t_end: float
    start_index: int
    end_index: int
    scale: complex
    min_abs_denominator: float


@dataclass(frozen=True)
class Handoff:
    t_cross: float
    alpha: float
    alpha_index: int
    from_form: Form
    to_form: Form
    constant: complex  # ratio new_scale / old_scale

    def to_dict(self):
        c = complex(self.constant)
        return {
            "t_cross": self.t_cross,
            "alpha": self.alpha,
            "alpha_index": self.alpha_index,
            "from": self.from_form.value,
            "to": self.to_form.value,
            "constant": [c.real, c.imag],
        }


@dataclass(frozen=True, eq=False)
class EigenTrack:
    branch: Branch
    t: np.ndarray
    vectors: np.ndarray  # (n, 2); real dtype when the walk stayed real
    segments: tuple[Segment, ...]
    handoffs: tuple[Handoff, ...]
    max_residual: float
    real: bool
    notes: tuple[str, ...] = field(default=())

    @property
    def switch_count(self) -> int:
        return len(self.handoffs)

    def normalized(self) -> np.ndarray:
        v = self.vectors
        return v / np.sqrt(np.sum(np.abs(v) ** 2, axis=-1, keepdims=True))


class _Sampler:
    """Branch quantities on the grid plus exact evaluation off the grid."""

    def __init__(self, field: HermitianField, branch: Branch, grid: Grid, options: WalkOptions):
        self.field = field
        self.branch = branch
        self.grid = grid
        self.opt = options
        self.t = grid.points
        f, g, hr, hc = field.components(self.t)
        self.f, self.g, self.hr, self.hc = f, g, hr, hc
        self.real = bool(np.all(hc == 0.0))
        self.h = hr if self.real else hr + 1j * hc
        self.lam, self.d_f, self.d_g, self.gap = branch_terms(f, g, hr, hc, branch)
        self.thr = options.handoff_ratio * self.gap + options.tol_match

    def den(self, form):
        return self.d_f if form is Form.FIRST else self.d_g

    def at(self, ts):
        """``(d_f, d_g, threshold)`` at arbitrary points."""
        f, g, hr, hc = self.field.components(ts)
        _, d_f, d_g, gap = branch_terms(f, g, hr, hc, self.branch)
        return d_f, d_g, self.opt.handoff_ratio * gap + self.opt.tol_match

    def bad(self, form, ts, ref_sign):
        d_f, d_g, thr = self.at(ts)
        d = d_f if form is Form.FIRST else d_g
        return (np.abs(d) <= thr) | (np.sign(d) != ref_sign)

    def next_crossing(self, form, t_start):
        """First ``t >= t_start`` where ``form`` stops being valid: ``(t, grid index)``.

        Returns ``(b, None)`` when the form stays valid to the end.
        """
        t = self.t
        d_f0, d_g0, _ = self.at(np.array([t_start]))
        ref = np.sign((d_f0 if form is Form.FIRST else d_g0)[0])
        if self.bad(form, np.array([t_start]), ref)[0]:
            return float(t_start), int(np.searchsorted(t, t_start, side="left"))
        first = int(np.searchsorted(t, t_start, side="right"))
        if first >= t.size:
            return float(self.grid.b), None
        d = self.den(form)[first:]
        bad = (np.abs(d) <= self.thr[first:]) | (np.sign(d) != ref)
        hits = np.flatnonzero(bad)
        if hits.size == 0:
            return float(self.grid.b), None
        j = first + int(hits[0])
        lo = max(float(t[j - 1]), float(t_start)) if j > 0 else float(t_start)
        hi = float(t[j])
        width = self.opt.bisect_tol * (self.grid.b - self.grid.a)
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.bad(form, np.array([mid]), ref)[0]:
                hi = mid
            else:
                lo = mid
        return hi, j

    def handoff(self, form, t_cross, t_prev, min_index=0):
        t = self.t
        d_f, d_g, _ = self.at(np.array([t_cross]))
        other_cross = abs((d_g if form is Form.FIRST else d_f)[0])
        active = np.abs(self.den(form))
        other = np.abs(self.den(form.other))
        k = int(np.searchsorted(t, t_cross, side="left")) - 1
        while k >= max(min_index, 0) and t[k] > t_prev:
            if other[k] >= 0.5 * other_cross and active[k] > self.thr[k] and other[k] > self.thr[k]:
                return k
            k -= 1
        raise NoValidHandoff(
            f"no grid point in ({t_prev:.6g}, {t_cross:.6g}) where both forms are valid; "
            "refine the grid or relax the tolerances"
        )

    def vectors(self, form, sl):
        return form_vectors(form, self.h[sl], self.d_f[sl], self.d_g[sl])


def find_next_crossing(field: HermitianField, branch: Branch, t_start: float, grid: Grid,
                       form: Form = Form.FIRST, options: WalkOptions | None = None) -> float:
    """Smallest ``t >= t_start`` where the ``form`` denominator leaves its valid band.

    Located by a grid scan and bisection to ``bisect_tol * (b - a)``;
    returns ``b`` when there is none.
    """
    s = _Sampler(field, branch, grid, options or WalkOptions())
    return s.next_crossing(form, float(t_start))[0]


def handoff_alpha(field: HermitianField, branch: Branch, t_cross: float, t_prev: float, grid: Grid,
                  form: Form = Form.FIRST, options: WalkOptions | None = None,
                  min_index: int = 0) -> float:
    """Largest grid point in ``(t_prev, t_cross)`` where both forms are valid.

    The other form's denominator there must be at least half its value at
    ``t_cross``.
    """
    if not t_prev < t_cross:
        raise ConfigError("t_prev must precede t_cross")
    s = _Sampler(field, branch, grid, options or WalkOptions())
    return float(s.t[s.handoff(form, float(t_cross), float(t_prev), min_index)])


def _residuals(s: _Sampler, V):
    """``||A v - lam v||`` relative to ``(1 + ||A||_F) ||v||`` per grid point."""
    f, g, h, lam = s.f, s.g, s.hr + 1j * s.hc, s.lam
    r1 = (f - lam) * V[:, 0] + h * V[:, 1]
    r2 = np.conj(h) * V[:, 0] + (g - lam) * V[:, 1]
    res = np.sqrt(np.abs(r1) ** 2 + np.abs(r2) ** 2)
    a_norm = np.sqrt(f * f + g * g + 2.0 * np.abs(h) ** 2)
    v_norm = np.sqrt(np.sum(np.abs(V) ** 2, axis=-1))
    return res / ((1.0 + a_norm) * v_norm)


def walk(field: HermitianField, branch: Branch, v0=None, grid: Grid | None = None,
         options: WalkOptions | None = None) -> EigenTrack:
    """Build a continuous, non-vanishing eigenvector track for ``branch``.

    Parameters
    ----------
    v0 : array_like of 2, optional
        Eigenvector of ``A(a)`` to start from; default is the better
        conditioned row form at ``a``.

    Raises
    ------
    GapTooSmall, BadInitialVector, NoValidHandoff, BothDenominatorsSmall,
    MaxSwitchesExceeded, VerificationError
    """
    opt = options or WalkOptions()
    grid = grid or Grid(field.a, field.b, 1001)
    s = _Sampler(field, branch, grid, opt)
    t, n = s.t, s.t.size
    if not np.all(s.gap > 0):
        i = int(np.argmin(s.gap))
        raise GapTooSmall(f"eigenvalues coincide at t={t[i]:.6g}")

    form = Form.FIRST if abs(s.d_f[0]) >= abs(s.d_g[0]) else Form.SECOND
    u0 = s.vectors(form, slice(0, 1))[0]
    real = s.real
    if v0 is None:
        scale = 1.0
    else:
        v0 = np.asarray(v0, dtype=complex).reshape(2)
        if not np.any(v0 != 0):
            raise BadInitialVector("initial vector is zero")
        if _residuals(s, v0[None, :])[0] > opt.tol_resid:
            raise BadInitialVector("initial vector is not an eigenvector of A(a) for this branch")
        k = int(np.argmax(np.abs(v0)))
        scale = v0[k] / u0[k]
        if real and np.all(v0.imag == 0):
            scale = float(scale.real)
        else:
            real = False
    if not real:
        s.h = s.hr + 1j * s.hc

    V = np.empty((n, 2), dtype=float if real else complex)
    segments, handoffs, notes = [], [], []
    start = 0
    while True:
        t_cross, j = s.next_crossing(form, float(t[start]))
        if j is None:
            sl = slice(start, n)
            V[sl] = scale * s.vectors(form, sl)
            segments.append(Segment(form, float(t[start]), float(t[-1]), start, n - 1, complex(scale),
                                    float(np.abs(s.den(form)[sl]).min())))
            break
        min_index = start + opt.hysteresis if handoffs else 0
        k = s.handoff(form, t_cross, float(t[start]), min_index)
        if abs(s.den(form.other)[k]) <= s.thr[k]:
            raise BothDenominatorsSmall(f"both parametrizations degenerate at t={t[k]:.6g}")
        sl = slice(start, k + 1)
        V[sl] = scale * s.vectors(form, sl)
        segments.append(Segment(form, float(t[start]), float(t[k]), start, k, complex(scale),
                                float(np.abs(s.den(form)[sl]).min())))
        v_old = V[k].copy()
        w = s.vectors(form.other, slice(k, k + 1))[0]
        c = int(np.argmax(np.abs(v_old)))
        new_scale = v_old[c] / w[c]
        handoffs.append(Handoff(float(t_cross), float(t[k]), k, form, form.other,
                                complex(new_scale / scale)))
        if len(handoffs) > opt.max_switches:
            raise MaxSwitchesExceeded(f"more than {opt.max_switches} form switches")
        gap_here = np.max(np.abs(new_scale * w - v_old)) / np.max(np.abs(v_old))
        if gap_here > opt.continuity_tol:
            raise VerificationError(f"handoff at t={t[k]:.6g} is discontinuous ({gap_here:.3g})")
        form, scale, start = form.other, new_scale, k

    res = _residuals(s, V)
    max_res = float(res.max())
    if max_res > opt.tol_resid:
        i = int(np.argmax(res))
        raise VerificationError(f"eigen-residual {res[i]:.3g} at t={t[i]:.6g} exceeds {opt.tol_resid:.3g}")
    if not np.all(np.sum(np.abs(V) ** 2, axis=-1) > 0):
        raise VerificationError("eigenvector track vanishes")
    return EigenTrack(branch, t, V, tuple(segments), tuple(handoffs), max_res, real, tuple(notes))


def count_match_events(field: HermitianField, branch: Branch, grid: Grid, which: str = "f",
                       tol: float = 1e-9) -> int:
    """Number of separate places on the grid where ``f - lam`` (or ``g - lam``) vanishes.

    Counts strict sign changes, exact or near zeros (``|d| <= tol * (1 + gap)``)
    and touching zeros between grid points found by refining local minima.
    """
    t = grid.points
    comps = field.components(t)
    _, d_f, d_g, gap = branch_terms(*comps, branch)
    d = d_f if which == "f" else d_g
    thr = tol * (1.0 + gap)
    hit = np.abs(d) <= thr
    events = np.zeros(t.size, dtype=bool)
    events |= hit
    sign_change = np.sign(d[1:]) * np.sign(d[:-1]) < 0
    interval_event = sign_change.copy()

    a = np.abs(d)
    left = np.concatenate([[np.inf], a[:-1]])
    right = np.concatenate([a[1:], [np.inf]])
    local = (a <= left) & (a <= right) & ((a < left) | (a < right)) & ~hit
    idx = np.flatnonzero(local)
    if idx.size:
        lo = t[np.maximum(idx - 1, 0)]
        hi = t[np.minimum(idx + 1, t.size - 1)]

        def absd(x):
            _, xf, xg, xgap = branch_terms(*field.components(x), branch)
            return np.abs(xf if which == "f" else xg) - tol * (1.0 + xgap)

        _, val = golden_minimize(absd, lo, hi)
        events[idx[val <= 0]] = True

    # collapse neighbouring indications of the same zero
    marks = events.astype(int)
    marks[1:] |= interval_event.astype(int)
    count = 0
    prev = False
    for m in marks.astype(bool):
        if m and not prev:
            count += 1
        prev = m
    return count
