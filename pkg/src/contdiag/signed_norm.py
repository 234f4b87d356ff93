"""Continuously differentiable signed magnitude of a vector track.

Given a C^1 vector track ``v`` vanishing at finitely many interior points
``t_1 < ... < t_s``, ``mu(t) = (-1)^i ||v(t)||_2`` on ``[t_{i-1}, t_i]`` is C^1:
the one-sided derivatives of ``||v||`` at a zero are ``+-||v'(t_i)||`` and the
sign flip glues them together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsortedZeros, ZeroNotOnTrack
from .tracks import Grid, ScalarTrack


@dataclass(frozen=True, eq=False)
class VectorTrack:
    components: tuple[ScalarTrack, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ConfigError("a vector track needs at least one component")
        if len({(c.a, c.b) for c in comps}) != 1:
            raise ConfigError("vector track components must share one interval")
        object.__setattr__(self, "components", comps)

    @property
    def a(self) -> float:
        return self.components[0].a

    @property
    def b(self) -> float:
        return self.components[0].b

    @property
    def dim(self) -> int:
        return len(self.components)

    def eval_many(self, ts) -> np.ndarray:
        """``(len(ts), dim)`` array."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.stack([c.eval_many(ts) for c in self.components], axis=-1)

    def norm(self, ts) -> np.ndarray:
        v = self.eval_many(ts)
        return np.sqrt(np.sum(v * v, axis=-1))

    def derivative_many(self, ts, dt=None) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.stack([c.derivative_many(ts, dt) for c in self.components], axis=-1)


@dataclass(frozen=True, eq=False)
class SignedMagnitude:
    """``mu`` with ``|mu| = ||base||``; sign ``(-1)^i`` on the i-th segment (1-based)."""

    zeros: tuple[float, ...]
    segment_signs: tuple[int, ...]
    base: VectorTrack

    @property
    def a(self) -> float:
        return self.base.a

    @property
    def b(self) -> float:
        return self.base.b

    def sign(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        # segment i is [t_{i-1}, t_i]; a zero itself belongs to the left segment
        seg = np.searchsorted(np.asarray(self.zeros, dtype=float), ts, side="left")
        return np.asarray(self.segment_signs, dtype=float)[seg]

    def eval_many(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return self.sign(ts) * self.base.norm(ts)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        out = self.eval_many(arr)
        return float(out[0]) if arr.ndim == 0 else out

    def as_track(self) -> ScalarTrack:
        return ScalarTrack.from_function(self.eval_many, self.a, self.b)


def build_signed_norm(v: VectorTrack, zeros, grid: Grid | None = None,
                      tol_zero: float | None = None) -> SignedMagnitude:
    """Signed magnitude of ``v`` alternating across the given interior zeros.

    ``tol_zero`` defaults to ``1e-8 * (1 + max ||v||)`` with the maximum taken
    over ``grid`` (1001 points by default).

    Raises
    ------
    UnsortedZeros
        If ``zeros`` is not strictly increasing.
    ZeroNotOnTrack
        If ``||v(t_i)|| > tol_zero`` at a listed zero.
    """
    zs = tuple(float(z) for z in zeros)
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise UnsortedZeros(f"zeros must be strictly increasing: {zs}")
    if any(not (v.a < z < v.b) for z in zs):
        raise ConfigError("zeros must lie in the open interval; endpoint zeros are irrelevant")
    if tol_zero is None:
        grid = grid or Grid(v.a, v.b, 1001)
        tol_zero = 1e-8 * (1.0 + float(v.norm(grid.points).max()))
    if zs:
        at = v.norm(np.array(zs))
        bad = np.flatnonzero(at > tol_zero)
        if bad.size:
            i = int(bad[0])
            raise ZeroNotOnTrack(f"||v({zs[i]})|| = {at[i]:.3g} exceeds {tol_zero:.3g}")
        signs = tuple((-1) ** i for i in range(1, len(zs) + 2))
    else:
        signs = (1,)
    return SignedMagnitude(zs, signs, v)


@dataclass(frozen=True)
class ZeroLimit:
    t: float
    left: float
    right: float
    expected: float  # the C^1 derivative value, sign of the right-hand segment times ||v'||

    @property
    def jump(self) -> float:
        return abs(self.right - self.left)


@dataclass(frozen=True)
class DerivativeCheck:
    dt: float
    max_jump: float
    per_zero: tuple[ZeroLimit, ...]


def _one_sided(m, z, dt, side):
    # second-order one-sided stencil through z + s*dt, z + 2s*dt, z + 3s*dt; the
    # zero itself is skipped, so a zero known only to rounding cannot put a sample
    # on the wrong side of the kink
    s = 1.0 if side > 0 else -1.0
    y = m.eval_many(z + s * dt * np.array([1.0, 2.0, 3.0]))
    return s * (-5.0 * y[0] + 8.0 * y[1] - 3.0 * y[2]) / (2.0 * dt)


def mu_derivative_check(m: SignedMagnitude, dt: float) -> DerivativeCheck:
    """Compare one-sided derivative estimates of ``mu`` at every zero."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    limits = []
    for i, z in enumerate(m.zeros):
        left = _one_sided(m, z, dt, -1)
        right = _one_sided(m, z, dt, +1)
        dv = m.base.derivative_many([z])[0]
        expected = float(m.segment_signs[i + 1]) * float(np.sqrt(np.sum(dv * dv)))
        limits.append(ZeroLimit(z, float(left), float(right), expected))
    max_jump = max((lim.jump for lim in limits), default=0.0)
    return DerivativeCheck(dt, max_jump, tuple(limits))
