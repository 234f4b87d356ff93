"""Closed-form spectrum of a 2x2 hermitian field and its coalescence points."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import expr as _expr
from .errors import DegeneratePoint, NotFinitelyMany, OutOfDomain
from .tracks import Grid, HermitianField, ScalarTrack

DEFAULT_TOL_DISC = 1e-20
# a sub-threshold run whose exact-zero core is bordered by values this small
# is read as one zero of infinite order (exp(-1/t^2)-type flatness) rather
# than a zero interval
UNDERFLOW_SIGNATURE = 1e-200


@dataclass(frozen=True)
class EigenPair:
    lambda_plus: float
    lambda_minus: float

    @property
    def gap(self) -> float:
        return self.lambda_plus - self.lambda_minus


def spectrum(f, g, hr, hc):
    """Vectorized ``(lambda_plus, lambda_minus, p, q, gap)``; see ``_kernels.closed_form``."""
    return _kernels.closed_form(f, g, hr, hc)


def eigenvalues_at(field: HermitianField, t: float) -> EigenPair:
    if not (field.a <= t <= field.b):
        raise OutOfDomain(f"t={t} outside [{field.a}, {field.b}]")
    lp, lm, _, _, _ = spectrum(*field.components([t]))
    return EigenPair(float(lp[0]), float(lm[0]))


def discriminant(f, g, hr, hc):
    return (f - g) ** 2 + 4.0 * (hr * hr + hc * hc)


def discriminant_track(field: HermitianField) -> ScalarTrack:
    """``(f - g)^2 + 4 |h|^2`` as a track; symbolic when the field is."""
    if field.is_expression:
        f, g, hr, hc = (tr.body for tr in field.tracks)
        sq = lambda x: _expr.Binary("^", x, _expr.Num(2.0))  # noqa: E731
        node = _expr.Binary(
            "+",
            sq(_expr.Binary("-", f, g)),
            _expr.Binary("*", _expr.Num(4.0), _expr.Binary("+", sq(hr), sq(hc))),
        )
        return ScalarTrack.from_ast(node, field.a, field.b)
    return ScalarTrack.from_function(lambda ts: discriminant(*field.components(ts)), field.a, field.b)


# -- coalescence ------------------------------------------------------------------

@dataclass(frozen=True)
class CoalescenceReport:
    points: tuple[float, ...]
    is_isolated: tuple[bool, ...]
    endpoint_flags: tuple[bool, ...]
    discriminant: tuple[float, ...] = ()
    # (start, end) of each sub-threshold run longer than four grid steps
    flat_runs: tuple[tuple[float, float], ...] = ()
    notes: tuple[str, ...] = field(default=())

    @property
    def interior(self) -> tuple[float, ...]:
        return tuple(z for z, e in zip(self.points, self.endpoint_flags) if not e)

    def to_dict(self):
        return {
            "points": list(self.points),
            "is_isolated": list(self.is_isolated),
            "endpoint": list(self.endpoint_flags),
            "discriminant": list(self.discriminant),
            "flat_runs": [list(r) for r in self.flat_runs],
            "notes": list(self.notes),
        }


def golden_minimize(fn, lo, hi, max_iter=200):
    """Vectorized golden-section minimization of ``fn`` over brackets ``[lo, hi]``.

    ``fn`` maps an array of abscissae to an array of values. The bracket
    endpoints are candidates too, so a minimum on the boundary is returned
    exactly. Returns ``(x, fn(x))``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1 = fn(x1)
    f2 = fn(x2)
    for _ in range(max_iter):
        width = hi - lo
        if np.all(width <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(lo))):
            break
        left = f1 <= f2
        # left: minimum in [lo, x2]; right: minimum in [x1, hi]
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = np.where(left, hi - inv * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + inv * (hi - lo))
        nf1 = np.where(left, np.nan, f2)
        nf2 = np.where(left, f1, np.nan)
        need1 = left
        if need1.any():
            nf1[need1] = fn(nx1[need1])
        if (~need1).any():
            nf2[~need1] = fn(nx2[~need1])
        x1, x2, f1, f2 = nx1, nx2, nf1, nf2
    cand_x = np.stack([x1, x2, lo, hi])
    lo_v = fn(lo)
    hi_v = fn(hi)
    cand_f = np.stack([f1, f2, lo_v, hi_v])
    k = np.argmin(cand_f, axis=0)
    cols = np.arange(cand_x.shape[1])
    return cand_x[k, cols], cand_f[k, cols]


def _runs(mask):
    """``(start, stop)`` index pairs (inclusive) of consecutive True entries."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]])
    d = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def _flat_run_center(D, start, stop, n):
    """Center of a long sub-threshold run if it looks like one flat zero, else None."""
    if start == 0 or stop == n - 1:
        return None
    seg = D[start:stop + 1]
    zero = np.flatnonzero(seg == 0.0)
    if zero.size:
        c0, c1 = zero[0], zero[-1]
        if not np.all(seg[c0:c1 + 1] == 0.0):
            return None
        if c0 == 0 or c1 == seg.size - 1:
            return None  # no positive flank inside the run
        if seg[c0 - 1] > UNDERFLOW_SIGNATURE or seg[c1 + 1] > UNDERFLOW_SIGNATURE:
            return None
    else:
        c0 = c1 = int(np.argmin(seg))
    if np.any(np.diff(seg[:c0 + 1]) > 0) or np.any(np.diff(seg[c1:]) < 0):
        return None
    return start + c0, start + c1


def find_coalescence(field: HermitianField, grid: Grid, tol_disc: float = DEFAULT_TOL_DISC,
                     strict: bool = True) -> CoalescenceReport:
    """Locate the points where the two eigenvalues meet.

    The discriminant is scanned on the grid; every strict local minimum and
    every sub-threshold cluster is refined by golden-section search, and
    refined minima with discriminant ``<= tol_disc`` are reported. Points
    closer than two grid steps are merged. A sub-threshold run longer than
    four grid steps marks a non-isolated zero set unless it is a single
    flat valley (see ``UNDERFLOW_SIGNATURE``).

    Raises
    ------
    NotFinitelyMany
        If ``strict`` and a non-isolated zero set was found.
    """
    if not tol_disc > 0:
        raise ValueError("tol_disc must be positive")
    ts = grid.points
    n = ts.size
    h = grid.spacing
    D = discriminant(*field.components(ts))

    def disc_at(x):
        return discriminant(*field.components(x))

    points, isolated, values, flat, notes = [], [], [], [], []
    below = D <= tol_disc
    claimed = np.zeros(n, dtype=bool)
    brackets = []
    for start, stop in _runs(below):
        claimed[start:stop + 1] = True
        if ts[stop] - ts[start] > 4.0 * h:
            flat.append((float(ts[start]), float(ts[stop])))
            center = _flat_run_center(D, start, stop, n)
            if center is None:
                points.append(float(0.5 * (ts[start] + ts[stop])))
                isolated.append(False)
                values.append(float(D[start:stop + 1].min()))
            else:
                c0, c1 = center
                z = float(0.5 * (ts[c0] + ts[c1]))
                points.append(z)
                isolated.append(True)
                values.append(float(disc_at(np.array([z]))[0]))
                notes.append(f"flat zero of the discriminant around t={z:.6g} treated as isolated")
            continue
        brackets.append((ts[max(start - 1, 0)], ts[min(stop + 1, n - 1)]))

    # strict local minima above the threshold may still dip to zero in between
    left = np.concatenate([[np.inf], D[:-1]])
    right = np.concatenate([D[1:], [np.inf]])
    local = (D <= left) & (D <= right) & ((D < left) | (D < right)) & ~claimed
    for i in np.flatnonzero(local):
        brackets.append((ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]))

    if brackets:
        lo, hi = map(np.array, zip(*brackets))
        x, fx = golden_minimize(disc_at, lo, hi)
        hit = fx <= tol_disc
        for xi, fi in zip(x[hit], fx[hit]):
            points.append(float(xi))
            isolated.append(True)
            values.append(float(fi))

    order = np.argsort(points, kind="stable")
    merged = []
    for k in order:
        z, iso, v = points[k], isolated[k], values[k]
        if merged and z - merged[-1][0] < 2.0 * h:
            pz, piso, pv = merged[-1]
            keep = (z, iso, v) if v < pv else (pz, piso, pv)
            merged[-1] = (keep[0], piso and iso, min(v, pv))
        else:
            merged.append((z, iso, v))

    tol_end = 1e-12 * (grid.b - grid.a)
    report = CoalescenceReport(
        points=tuple(m[0] for m in merged),
        is_isolated=tuple(m[1] for m in merged),
        endpoint_flags=tuple(abs(m[0] - grid.a) <= tol_end or abs(m[0] - grid.b) <= tol_end
                             for m in merged),
        discriminant=tuple(m[2] for m in merged),
        flat_runs=tuple(flat),
        notes=tuple(notes),
    )
    if strict and not all(report.is_isolated):
        bad = [z for z, iso in zip(report.points, report.is_isolated) if not iso]
        raise NotFinitelyMany(f"eigenvalues coincide on a whole sub-interval near t={bad[0]:.6g}")
    return report


# -- point classification ------------------------------------------------------------

class PointClass(enum.Enum):
    H_ZERO_F_MATCHES = "h_zero_f_matches"
    H_ZERO_G_MATCHES = "h_zero_g_matches"
    H_NONZERO = "h_nonzero"


def classify_point(field: HermitianField, t: float, lam: float, tol_match: float = 1e-12,
                   tol_disc: float = DEFAULT_TOL_DISC) -> PointClass:
    """Which of ``f - lam = 0`` / ``g - lam = 0`` holds at ``t``.

    When ``h(t)`` vanishes exactly one of them does; otherwise neither. Zero
    tests are relative to ``1 + ||A(t)||_F``.
    """
    f, g, hr, hc = (float(c[0]) for c in field.components([t]))
    if discriminant(f, g, hr, hc) <= tol_disc:
        raise DegeneratePoint(f"A({t}) has a repeated eigenvalue")
    scale = 1.0 + math.sqrt(f * f + g * g + 2.0 * (hr * hr + hc * hc))
    tol = tol_match * scale
    if math.hypot(hr, hc) > tol:
        return PointClass.H_NONZERO
    if abs(f - lam) <= tol:
        return PointClass.H_ZERO_F_MATCHES
    if abs(g - lam) <= tol:
        return PointClass.H_ZERO_G_MATCHES
    raise ValueError(f"{lam} is not an eigenvalue of A({t})")
