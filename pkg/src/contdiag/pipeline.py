"""Assemble continuous unitary diagonalizations ``U(t)`` of a hermitian field.

``diagonalize_distinct`` handles fields whose eigenvalues never meet: one
eigenvector walk per branch, normalized into the columns of ``U``.

``diagonalize_c1`` handles C^1 fields whose eigenvalues meet at finitely many
points ``Z`` where ``A'`` has distinct eigenvalues. With
``v = (f - g, 2 h_r, 2 h_c)`` and its signed norm ``mu``, the eigenvalue
``lam = (f + g + mu) / 2`` is C^1, ``B = A - lam I`` is a C^1 rank-one field
and, with ``tau`` the signed Frobenius norm of ``B``, ``C = B / tau``
(``B' / tau'`` near ``Z``) is continuous with eigenvalues ``{0, -1}``. Any
continuous diagonalization of ``C`` diagonalizes ``A = tau C + lam I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import (
    DerivativeDiscontinuous,
    GapTooSmall,
    ObstructionDetected,
    VerificationError,
)
from .oracle import aligned_oracle
from .signed_norm import SignedMagnitude, VectorTrack, build_signed_norm
from .spectral import CoalescenceReport, find_coalescence, spectrum
from .tracks import Grid, HermitianField, ScalarTrack, assemble
from .walk import Branch, EigenTrack, WalkOptions, walk

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PipelineOptions:
    tol_disc: float = 1e-20
    gap_min: float | None = None  # default 2 * sqrt(tol_disc)
    tol_unitary: float = 1e-10
    tol_offdiag: float = 1e-8
    eps_switch: float = 1e-6
    jump_factor: float = 20.0
    fd_dt: float | None = None  # default (b - a) * 1e-6
    deriv_disc_tol: float = 1e-3
    deriv_gap_tol: float = 1e-6
    tol_det: float = 1e-10
    orthogonal_complement: bool = False
    walk: WalkOptions = field(default_factory=WalkOptions)

    @property
    def effective_gap_min(self) -> float:
        return 2.0 * math.sqrt(self.tol_disc) if self.gap_min is None else self.gap_min

    def dt_for(self, a, b) -> float:
        return (b - a) * 1e-6 if self.fd_dt is None else self.fd_dt


@dataclass(frozen=True, eq=False)
class DegenerateDecomposition:
    Z: tuple[float, ...]
    mu: SignedMagnitude
    tau: SignedMagnitude
    lam: ScalarTrack
    C: HermitianField
    window: np.ndarray  # grid mask where C = B'/tau'
    det_C: np.ndarray
    norm_C: np.ndarray
    C_gap: np.ndarray
    reconstruction_defect: np.ndarray

    def summary(self):
        return {
            "Z": list(self.Z),
            "window_points": int(self.window.sum()),
            "max_abs_det_C": float(np.abs(self.det_C).max()),
            "max_norm_C_defect": float(np.abs(self.norm_C - 1.0).max()),
            "min_C_gap": float(self.C_gap.min()),
            "max_reconstruction_defect": float(self.reconstruction_defect.max()),
            "mu_sign_convention": "(-1)^i on the i-th segment between interior zeros of Z, i starting at 1",
            "tau_sign_convention": "same as mu",
        }


@dataclass(frozen=True, eq=False)
class UnitaryTrack:
    mode: str
    t: np.ndarray
    U: np.ndarray  # (n, 2, 2), columns are eigenvectors
    diag: np.ndarray  # (n, 2) diagonal of U* A U
    unitarity_defect: np.ndarray
    offdiag: np.ndarray
    jumps: np.ndarray
    lipschitz: float
    jump_threshold: float
    a_norm: np.ndarray
    walks: tuple[EigenTrack, ...]
    coalescence: CoalescenceReport | None = None
    decomposition: DegenerateDecomposition | None = None
    hypothesis: tuple[dict, ...] = ()

    @property
    def max_unitarity_defect(self) -> float:
        return float(self.unitarity_defect.max())

    @property
    def max_offdiag_relative(self) -> float:
        return float((self.offdiag / (1.0 + self.a_norm)).max())

    @property
    def max_jump(self) -> float:
        return float(self.jumps.max()) if self.jumps.size else 0.0

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.U.imag == 0.0))

    def summary(self):
        out = {
            "mode": self.mode,
            "n": int(self.t.size),
            "max_unitarity_defect": self.max_unitarity_defect,
            "max_offdiag": float(self.offdiag.max()),
            "max_offdiag_relative": self.max_offdiag_relative,
            "max_step_jump": self.max_jump,
            "empirical_lipschitz": self.lipschitz,
            "jump_threshold": self.jump_threshold,
            "real": self.is_real,
            "walks": [
                {
                    "branch": w.branch.value,
                    "switches": w.switch_count,
                    "segments": [
                        {"form": s.form.value, "t_start": s.t_start, "t_end": s.t_end,
                         "min_abs_denominator": s.min_abs_denominator}
                        for s in w.segments
                    ],
                    "handoffs": [h.to_dict() for h in w.handoffs],
                    "max_residual": w.max_residual,
                }
                for w in self.walks
            ],
            "conventions": {
                "column_order": "column 1 follows the larger eigenvalue of the walked field",
                "phase": "largest-magnitude component of each column real positive at t=a",
            },
        }
        if self.coalescence is not None:
            out["coalescence"] = self.coalescence.to_dict()
        if self.decomposition is not None:
            out["decomposition"] = self.decomposition.summary()
        if self.hypothesis:
            out["hypothesis"] = list(self.hypothesis)
        return out


def frobenius(f, g, hr, hc):
    return np.sqrt(f * f + g * g + 2.0 * (hr * hr + hc * hc))


def empirical_lipschitz(ts, f, g, hr, hc) -> float:
    """``max ||A(t_{i+1}) - A(t_i)||_F / (dt * gap)`` with the smaller gap of the step."""
    dt = np.diff(ts)
    dA = frobenius(np.diff(f), np.diff(g), np.diff(hr), np.diff(hc))
    gap = spectrum(f, g, hr, hc)[4]
    local_gap = np.minimum(gap[1:], gap[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dA > 0, dA / (dt * local_gap), 0.0)
    return float(ratio.max()) if ratio.size else 0.0


def _fix_phase(u):
    """Multiply a column track by one constant so its largest entry at t=a is real positive."""
    k = int(np.argmax(np.abs(u[0])))
    c = u[0, k]
    if np.isrealobj(u):
        return u if c > 0 else -u
    return u * (np.conj(c) / abs(c))


def diagonalize_distinct(field: HermitianField, grid: Grid, opts: PipelineOptions | None = None,
                         mode: str = "distinct") -> UnitaryTrack:
    """Unitary track for a field with distinct eigenvalues at every grid point.

    Raises
    ------
    GapTooSmall
        If the eigenvalue gap drops to ``gap_min`` or below.
    VerificationError
        If the result fails its unitarity, off-diagonal or continuity certificate.
    """
    opts = opts or PipelineOptions()
    ts = grid.points
    F, G, HR, HC = field.components(ts)
    gap = spectrum(F, G, HR, HC)[4]
    if gap.min() <= opts.effective_gap_min:
        i = int(np.argmin(gap))
        raise GapTooSmall(f"eigenvalue gap {gap[i]:.3g} at t={ts[i]:.6g} is below {opts.effective_gap_min:.3g}")

    plus = walk(field, Branch.PLUS, grid=grid, options=opts.walk)
    u1 = _fix_phase(plus.normalized())
    walks = [plus]
    if opts.orthogonal_complement:
        u2 = np.stack([-np.conj(u1[:, 1]), np.conj(u1[:, 0])], axis=-1)
        u2 = _fix_phase(u2)
    else:
        minus = walk(field, Branch.MINUS, grid=grid, options=opts.walk)
        walks.append(minus)
        u2 = _fix_phase(minus.normalized())
    U = np.empty((ts.size, 2, 2), dtype=complex)
    U[:, :, 0] = u1
    U[:, :, 1] = u2

    defect, offdiag, d1, d2 = _kernels.hermitian_metrics(U, F, G, HR, HC)
    jumps = _kernels.step_jumps(U)
    a_norm = frobenius(F, G, HR, HC)
    lip = empirical_lipschitz(ts, F, G, HR, HC)
    threshold = opts.jump_factor * (grid.b - grid.a) / grid.n * lip + 1e-12
    track = UnitaryTrack(
        mode=mode, t=ts, U=U, diag=np.stack([d1, d2], axis=-1), unitarity_defect=defect,
        offdiag=offdiag, jumps=jumps, lipschitz=lip, jump_threshold=threshold, a_norm=a_norm,
        walks=tuple(walks),
    )
    _verify(track, opts)
    return track


def _verify(track: UnitaryTrack, opts: PipelineOptions):
    if track.max_unitarity_defect > opts.tol_unitary:
        raise VerificationError(f"unitarity defect {track.max_unitarity_defect:.3g} exceeds {opts.tol_unitary:.3g}")
    if track.max_offdiag_relative > opts.tol_offdiag:
        raise VerificationError(f"off-diagonal residual {track.max_offdiag_relative:.3g} exceeds {opts.tol_offdiag:.3g}")
    if track.max_jump > track.jump_threshold:
        i = int(np.argmax(track.jumps))
        raise VerificationError(
            f"step jump {track.max_jump:.3g} at t={track.t[i]:.6g} exceeds the continuity "
            f"threshold {track.jump_threshold:.3g}"
        )


# -- C^1 hypotheses at coalescence points ----------------------------------------------

def _matrix_components(field, ts):
    return np.stack(field.components(ts), axis=-1)  # (n, 4): f, g, hr, hc


def one_sided_derivatives(field: HermitianField, z: float, dt: float):
    """Richardson-extrapolated one-sided derivatives of ``(f, g, h_r, h_c)`` at ``z``.

    Returns ``(left, right)``; a side is ``None`` when it leaves the interval.
    """
    a, b = field.a, field.b
    out = []
    for s in (-1.0, 1.0):
        if (s < 0 and z - dt < a) or (s > 0 and z + dt > b):
            out.append(None)
            continue
        vals = _matrix_components(field, np.array([z, z + 0.5 * s * dt, z + s * dt]))
        d_half = (vals[1] - vals[0]) / (0.5 * s * dt)
        d_full = (vals[2] - vals[0]) / (s * dt)
        out.append(2.0 * d_half - d_full)
    return out[0], out[1]


def _cnorm(c):
    return float(math.sqrt(c[0] ** 2 + c[1] ** 2 + 2.0 * (c[2] ** 2 + c[3] ** 2)))


def hypothesis_at(field: HermitianField, z: float, opts: PipelineOptions) -> dict:
    """Derivative continuity and ``A'(z)`` eigenvalue gap at a coalescence point."""
    dt = opts.dt_for(field.a, field.b)
    left, right = one_sided_derivatives(field, z, dt)
    sides = [d for d in (left, right) if d is not None]
    if left is not None and right is not None:
        jump = _cnorm(left - right)
        scale = 1.0 + max(_cnorm(left), _cnorm(right))
        deriv = 0.5 * (left + right)
    else:
        jump, scale = 0.0, 1.0 + _cnorm(sides[0])
        deriv = sides[0]
    dgap = float(spectrum(*[np.array([c]) for c in deriv])[4][0])
    return {
        "t": z,
        "derivative_jump": jump,
        "derivative_jump_bound": opts.deriv_disc_tol * scale,
        "derivative_continuous": jump <= opts.deriv_disc_tol * scale,
        "derivative_gap": dgap,
        "derivative_gap_bound": opts.deriv_gap_tol * (1.0 + _cnorm(deriv)),
        "derivative_distinct": dgap > opts.deriv_gap_tol * (1.0 + _cnorm(deriv)),
        "one_sided": left is None or right is None,
    }


# -- C^1 construction ---------------------------------------------------------------

class _DegenerateParts:
    """Evaluates ``mu``, ``lam``, ``B``, ``tau`` and ``C`` on arrays of ``t``."""

    def __init__(self, field: HermitianField, zeros, grid: Grid, opts: PipelineOptions):
        self.field = field
        self.a, self.b = field.a, field.b
        self.dt = opts.dt_for(self.a, self.b)
        comp = lambda k: ScalarTrack.from_function(lambda ts: self._v(ts)[k], self.a, self.b)  # noqa: E731
        self.v = VectorTrack(tuple(comp(k) for k in range(3)))
        self.mu = build_signed_norm(self.v, zeros, grid)
        bcomp = lambda k: ScalarTrack.from_function(lambda ts: self._bvec(ts)[k], self.a, self.b)  # noqa: E731
        self.bvec = VectorTrack(tuple(bcomp(k) for k in range(4)))
        self.tau = build_signed_norm(self.bvec, zeros, grid)
        self.tau_max = float(np.abs(self.tau.eval_many(grid.points)).max())
        self.eps = opts.eps_switch
        self._cache_key = None
        self._cache_val = None

    def _v(self, ts):
        f, g, hr, hc = self.field.components(ts)
        return f - g, 2.0 * hr, 2.0 * hc

    def B(self, ts):
        """``(B11, B22, h_r, h_c)`` and ``lam`` on ``ts``."""
        f, g, hr, hc = self.field.components(ts)
        mu = self.mu.eval_many(ts)
        lam = 0.5 * (f + g + mu)
        return (0.5 * (f - g - mu), 0.5 * (g - f - mu), hr, hc), lam

    def _bvec(self, ts):
        (b11, b22, hr, hc), _ = self.B(ts)
        return b11, b22, SQRT2 * hr, SQRT2 * hc

    def C(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        key = ts.tobytes()
        if key == self._cache_key:
            return self._cache_val
        (b11, b22, hr, hc), _ = self.B(ts)
        tau = self.tau.eval_many(ts)
        window = np.abs(tau) < self.eps * self.tau_max
        with np.errstate(divide="ignore", invalid="ignore"):
            out = [np.where(window, 0.0, x / tau) for x in (b11, b22, hr, hc)]
        if window.any():
            tw = ts[window]
            lo = np.where(tw - self.dt < self.a, tw, tw - self.dt)
            hi = np.where(tw + self.dt > self.b, tw, tw + self.dt)
            (bl, _) = self.B(lo)
            (bh, _) = self.B(hi)
            tau_d = (self.tau.eval_many(hi) - self.tau.eval_many(lo)) / (hi - lo)
            for k in range(4):
                out[k][window] = (bh[k] - bl[k]) / (hi - lo) / tau_d
        val = (tuple(out), window)
        self._cache_key, self._cache_val = key, val
        return val

    def field_C(self) -> HermitianField:
        track = lambda k: ScalarTrack.from_function(lambda ts: self.C(ts)[0][k], self.a, self.b)  # noqa: E731
        return HermitianField(*(track(k) for k in range(4)))


def degenerate_decomposition(field: HermitianField, grid: Grid, zeros,
                             opts: PipelineOptions | None = None) -> DegenerateDecomposition:
    opts = opts or PipelineOptions()
    parts = _DegenerateParts(field, zeros, grid, opts)
    ts = grid.points
    (c11, c22, chr_, chc), window = parts.C(ts)
    det = c11 * c22 - (chr_ ** 2 + chc ** 2)
    norm = frobenius(c11, c22, chr_, chc)
    cgap = spectrum(c11, c22, chr_, chc)[4]
    lam_track = ScalarTrack.from_function(lambda x: parts.B(x)[1], field.a, field.b)
    return DegenerateDecomposition(
        Z=tuple(zeros), mu=parts.mu, tau=parts.tau, lam=lam_track, C=parts.field_C(),
        window=window, det_C=det, norm_C=norm, C_gap=cgap,
        reconstruction_defect=np.zeros(ts.size),
    )


def diagonalize_c1(field: HermitianField, grid: Grid, opts: PipelineOptions | None = None) -> UnitaryTrack:
    """Unitary track for a C^1 field whose eigenvalues meet at finitely many points.

    Raises
    ------
    NotFinitelyMany
        Coalescence on a whole sub-interval.
    DerivativeDiscontinuous
        ``A`` has a corner at a coalescence point (one-sided derivatives differ).
    ObstructionDetected
        ``A'`` has a repeated eigenvalue at a coalescence point.
    """
    opts = opts or PipelineOptions()
    ts = grid.points
    cz = find_coalescence(field, grid, opts.tol_disc)
    hyp = []
    for z in cz.points:
        check = hypothesis_at(field, z, opts)
        hyp.append(check)
        if not check["derivative_continuous"]:
            raise DerivativeDiscontinuous(
                f"one-sided derivatives of A differ by {check['derivative_jump']:.3g} at t={z:.6g}"
            )
        if not check["derivative_distinct"]:
            raise ObstructionDetected(
                f"A' has a repeated eigenvalue (gap {check['derivative_gap']:.3g}) at coalescence point t={z:.6g}"
            )

    dec = degenerate_decomposition(field, grid, cz.interior, opts)
    bad_det = np.abs(dec.det_C).max()
    bad_norm = np.abs(dec.norm_C - 1.0).max()
    if bad_det > opts.tol_det or bad_norm > opts.tol_det:
        raise VerificationError(f"normalized field is not rank one of unit norm (det {bad_det:.3g}, norm {bad_norm:.3g})")

    inner = diagonalize_distinct(dec.C, grid, opts, mode="c1")
    U = inner.U
    F, G, HR, HC = field.components(ts)
    defect, offdiag, _, _ = _kernels.hermitian_metrics(U, F, G, HR, HC)
    tau = dec.tau.eval_many(ts)
    lam = dec.lam.eval_many(ts)
    diag = tau[:, None] * inner.diag + lam[:, None]

    A = assemble(F, G, HR, HC)
    Cm = assemble(*dec.C.components(ts))
    Uh = np.conj(np.swapaxes(U, 1, 2))
    lhs = Uh @ A @ U
    rhs = tau[:, None, None] * (Uh @ Cm @ U) + lam[:, None, None] * np.eye(2)
    recon = np.sqrt(np.sum(np.abs(lhs - rhs) ** 2, axis=(1, 2)))
    dec = replace(dec, reconstruction_defect=recon)

    track = UnitaryTrack(
        mode="c1", t=ts, U=U, diag=diag, unitarity_defect=defect, offdiag=offdiag,
        jumps=inner.jumps, lipschitz=inner.lipschitz, jump_threshold=inner.jump_threshold,
        a_norm=frobenius(F, G, HR, HC), walks=inner.walks, coalescence=cz, decomposition=dec,
        hypothesis=tuple(hyp),
    )
    if track.max_offdiag_relative > opts.tol_offdiag:
        raise VerificationError(f"off-diagonal residual {track.max_offdiag_relative:.3g} exceeds {opts.tol_offdiag:.3g}")
    return track


# -- obstruction diagnostics ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObstructionReport:
    t: np.ndarray
    jumps: np.ndarray
    max_jump: float
    max_jump_at: float
    coalescence: CoalescenceReport
    hypothesis: tuple[dict, ...]
    error: str | None = None

    @property
    def hypotheses_hold(self) -> bool:
        return (self.error is None and all(self.coalescence.is_isolated)
                and all(h["derivative_continuous"] and h["derivative_distinct"] for h in self.hypothesis))

    def summary(self):
        return {
            "n": int(self.t.size),
            "oracle_max_jump": self.max_jump,
            "oracle_max_jump_at": self.max_jump_at,
            "coalescence": self.coalescence.to_dict(),
            "hypothesis": list(self.hypothesis),
            "finitely_many_coalescence_points": all(self.coalescence.is_isolated),
            "c1_hypotheses_hold": self.hypotheses_hold,
            "error": self.error,
        }


def check_obstruction(field: HermitianField, grid: Grid, opts: PipelineOptions | None = None) -> ObstructionReport:
    """Greedy-aligned pointwise oracle plus the C^1 hypothesis checks; never raises on findings."""
    opts = opts or PipelineOptions()
    orc = aligned_oracle(field, grid.points)
    cz = find_coalescence(field, grid, opts.tol_disc, strict=False)
    hyp = tuple(hypothesis_at(field, z, opts) for z, iso in zip(cz.points, cz.is_isolated) if iso)
    return ObstructionReport(grid.points, orc.jumps, orc.max_jump, orc.max_jump_at, cz, hyp)
