"""Scalar tracks, grids and hermitian 2x2 fields on a compact interval."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from . import expr as _expr
from .errors import ConfigError, OutOfDomain

FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_i = a + i (b - a) / (n - 1)`` with both endpoints."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (self.n >= 2):
            raise ConfigError(f"grid needs at least 2 points, got {self.n}")
        if not (self.a < self.b):
            raise ConfigError(f"empty interval [{self.a}, {self.b}]")

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.a + np.arange(self.n) * self.spacing
        pts[-1] = self.b
        pts.setflags(write=False)
        return pts

    def refined(self, factor: int) -> "Grid":
        return Grid(self.a, self.b, (self.n - 1) * factor + 1)


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Values on increasing abscissae, linearly interpolated in between."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ConfigError("sample table needs matching 1-d arrays of length >= 2")
        if not np.all(np.diff(t) > 0):
            raise ConfigError("sample abscissae must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ConfigError("sample values must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __call__(self, ts):
        return np.interp(ts, self.t, self.values)


Body = Union[_expr.Node, SampleTable, Callable]


@dataclass(frozen=True, eq=False)
class ScalarTrack:
    """A real function on ``[a, b]``.

    ``body`` is an expression AST, a :class:`SampleTable`, or a vectorized
    callable. ``derivative`` is an AST or callable giving the exact
    derivative, or ``None`` to use finite differences.
    """

    a: float
    b: float
    body: Body
    derivative: _expr.Node | Callable | None = None
    source: str | None = field(default=None, compare=False)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_expr(cls, source: str, a: float, b: float, derivative="auto") -> "ScalarTrack":
        node = _expr.parse_expr(source)
        return cls.from_ast(node, a, b, derivative=derivative, source=source)

    @classmethod
    def from_ast(cls, node, a, b, derivative="auto", source=None) -> "ScalarTrack":
        if derivative == "auto":
            try:
                derivative = _expr.differentiate(node)
            except _expr.NotDifferentiable:
                derivative = None
        elif derivative == FINITE_DIFFERENCE:
            derivative = None
        elif isinstance(derivative, str):
            derivative = _expr.parse_expr(derivative)
        return cls(float(a), float(b), node, derivative, source)

    @classmethod
    def constant(cls, value: float, a: float, b: float) -> "ScalarTrack":
        return cls(float(a), float(b), _expr.Num(float(value)), _expr.Num(0.0), repr(float(value)))

    @classmethod
    def from_samples(cls, t, values) -> "ScalarTrack":
        table = SampleTable(t, values)
        return cls(float(table.t[0]), float(table.t[-1]), table, None)

    @classmethod
    def from_function(cls, fn, a, b, derivative=None) -> "ScalarTrack":
        return cls(float(a), float(b), fn, derivative)

    # -- evaluation --------------------------------------------------------------

    @property
    def is_expression(self) -> bool:
        return isinstance(self.body, _expr.Node)

    @property
    def has_analytic_derivative(self) -> bool:
        return self.derivative is not None

    def _check_domain(self, ts):
        if ts.size and (ts.min() < self.a or ts.max() > self.b):
            raise OutOfDomain(f"t outside [{self.a}, {self.b}]")

    def eval_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        self._check_domain(ts)
        body = self.body
        if isinstance(body, _expr.Node):
            return _expr.evaluate(body, ts)
        return np.asarray(body(ts), dtype=float)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return float(self.eval_many(arr[None])[0])
        return self.eval_many(arr)

    def default_dt(self) -> float:
        return (self.b - self.a) * 1e-6

    def derivative_many(self, ts, dt=None) -> np.ndarray:
        """Derivative on an array: analytic if available, else finite differences."""
        ts = np.asarray(ts, dtype=float)
        self._check_domain(ts)
        d = self.derivative
        if isinstance(d, _expr.Node):
            return _expr.evaluate(d, ts)
        if d is not None:
            return np.asarray(d(ts), dtype=float)
        return self.fd_derivative(ts, dt)

    def fd_derivative(self, ts, dt=None) -> np.ndarray:
        """Central differences, one-sided where the stencil leaves ``[a, b]``."""
        ts = np.asarray(ts, dtype=float)
        dt = self.default_dt() if dt is None else float(dt)
        if not dt > 0:
            raise ConfigError("finite-difference step must be positive")
        lo = np.where(ts - dt < self.a, ts, ts - dt)
        hi = np.where(ts + dt > self.b, ts, ts + dt)
        return (self.eval_many(hi) - self.eval_many(lo)) / (hi - lo)


def eval_track(track: ScalarTrack, t: float) -> float:
    return track(t)


def derivative_at(track: ScalarTrack, t: float, dt: float | None = None) -> float:
    return float(track.derivative_many(np.array([t], dtype=float), dt)[0])


@dataclass(frozen=True, eq=False)
class HermitianField:
    """``A(t) = [[f, h], [conj(h), g]]`` with ``h = h_r + i h_c``."""

    f: ScalarTrack
    g: ScalarTrack
    h_r: ScalarTrack
    h_c: ScalarTrack

    def __post_init__(self):
        spans = {(tr.a, tr.b) for tr in (self.f, self.g, self.h_r, self.h_c)}
        if len(spans) != 1:
            raise ConfigError("all four tracks must share the same interval")

    @classmethod
    def from_exprs(cls, f, g, h_re, h_im, a, b) -> "HermitianField":
        return cls(*(ScalarTrack.from_expr(s, a, b) for s in (f, g, h_re, h_im)))

    @classmethod
    def from_arrays(cls, t, f, g, h_re, h_im) -> "HermitianField":
        return cls(*(ScalarTrack.from_samples(t, v) for v in (f, g, h_re, h_im)))

    @property
    def a(self) -> float:
        return self.f.a

    @property
    def b(self) -> float:
        return self.f.b

    @property
    def tracks(self):
        return (self.f, self.g, self.h_r, self.h_c)

    @property
    def is_expression(self) -> bool:
        return all(tr.is_expression for tr in self.tracks)

    def components(self, ts):
        """``(f, g, h_r, h_c)`` evaluated on ``ts``."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return tuple(tr.eval_many(ts) for tr in self.tracks)

    def derivative_components(self, ts, dt=None):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return tuple(tr.derivative_many(ts, dt) for tr in self.tracks)

    def matrices(self, ts) -> np.ndarray:
        return assemble(*self.components(ts))

    def matrix(self, t) -> np.ndarray:
        return self.matrices([t])[0]


def assemble(f, g, hr, hc) -> np.ndarray:
    """Stack component arrays into ``(n, 2, 2)`` complex hermitian matrices."""
    f = np.asarray(f, dtype=float)
    out = np.empty(f.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = f
    out[..., 1, 1] = g
    out[..., 0, 1] = np.asarray(hr) + 1j * np.asarray(hc)
    out[..., 1, 0] = np.asarray(hr) - 1j * np.asarray(hc)
    return out
