"""Built-in fields with known outcomes.

Every entry names the mode it is run in and the exit code it must produce,
so the gallery doubles as the reachability check for the CLI error codes.
``tag`` records where the expectation comes from: ``PUBLISHED`` (a worked
counterexample), ``TRIVIAL`` (checkable by eye) or ``DERIVED`` (a hand
computation or an oracle run).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .tracks import HermitianField

CHI = "piecewise(t>=0, 1, 0)"
# exp(-1/t^2) extended by 0 at t = 0: C-infinity with every derivative zero there
PHI = "piecewise(t<=0, piecewise(t>=0, 0, exp(-1/t^2)), exp(-1/t^2))"
PSI = "piecewise(t<=0, 0, exp(-1/t^2))"


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    description: str
    f: str
    g: str
    h_re: str
    h_im: str
    a: float
    b: float
    mode: str
    expected_exit: int
    tag: str
    category: str
    real: bool = False

    def field(self) -> HermitianField:
        return HermitianField.from_exprs(self.f, self.g, self.h_re, self.h_im, self.a, self.b)

    def to_dict(self):
        return {
            "id": self.id, "description": self.description,
            "f": self.f, "g": self.g, "h_re": self.h_re, "h_im": self.h_im,
            "a": self.a, "b": self.b, "mode": self.mode,
            "expected_exit": self.expected_exit, "tag": self.tag,
            "category": self.category, "real": self.real,
        }


_ENTRIES = (
    # everywhere-distinct eigenvalues
    GalleryEntry("diag-const", "constant diag(1, 2); U is the swap, diagonal (2, 1)",
                 "1", "2", "0", "0", 0.0, 1.0, "distinct", 0, "TRIVIAL", "distinct", True),
    GalleryEntry("pauli-x", "constant [[0, 1], [1, 0]]; eigenvectors (1, +-1)/sqrt(2)",
                 "0", "0", "1", "0", 0.0, 1.0, "distinct", 0, "TRIVIAL", "distinct", True),
    GalleryEntry("reflection", "rotating reflection; eigenvalues +-1, eigenvectors rotate by t/2",
                 "cos(t)", "-cos(t)", "sin(t)", "0", 0.0, 2 * math.pi, "distinct", 0, "DERIVED",
                 "distinct", True),
    GalleryEntry("complex-twist", "linear diagonal with h = 0.5 exp(3it)",
                 "t", "-t", "0.5*cos(3*t)", "0.5*sin(3*t)", -1.0, 1.0, "distinct", 0, "DERIVED",
                 "distinct"),
    GalleryEntry("avoided-crossing", "Landau-Zener avoided crossing with gap 0.2 at t = 0",
                 "t", "-t", "0.1", "0", -1.0, 1.0, "distinct", 0, "DERIVED", "distinct", True),
    GalleryEntry("complex-sine", "h = sin(3t) exp(it) vanishing at three points, diagonal kept apart",
                 "1+0.5*t", "-0.5", "sin(3*t)*cos(t)", "sin(3*t)*sin(t)", -2.0, 2.0, "distinct", 0,
                 "DERIVED", "distinct"),
    # C^1 fields with finitely many coalescence points and distinct A' there
    GalleryEntry("c1-offdiag", "h_r = t; coalescence at 0 with A'(0) = [[0, 1], [1, 0]]; diagonal (t, -t)",
                 "0", "0", "t", "0", -1.0, 1.0, "c1", 0, "DERIVED", "c1", True),
    GalleryEntry("c1-diagonal", "diag(t, -t); U constant, diagonal (t, -t)",
                 "t", "-t", "0", "0", -1.0, 1.0, "c1", 0, "DERIVED", "c1", True),
    GalleryEntry("c1-multi", "sin(3t) times a smooth complex field; coalescence at 0 and +-pi/3",
                 "sin(3*t)+t^2", "-sin(3*t)+t^2", "sin(3*t)*cos(t)", "0.5*sin(3*t)*sin(t)",
                 -1.5, 1.5, "c1", 0, "DERIVED", "c1"),
    GalleryEntry("c1-complex", "complex field t*M + t^2*N, single coalescence at 0",
                 "t+t^2", "-t+0.5*t^2", "0.5*t+t^2", "0.3*t", -1.0, 1.0, "c1", 0, "DERIVED", "c1"),
    GalleryEntry("endpoint-coalescence", "coalescence only at the left endpoint t = 0",
                 "t", "-t", "0.5*t", "0", 0.0, 1.0, "c1", 0, "DERIVED", "endpoint", True),
    # the two counterexamples
    GalleryEntry("paper-ex-2.1", "t [[1, chi], [chi, chi]] with chi the step at 0; no continuous U",
                 "t", f"t*{CHI}", f"t*{CHI}", "0", -1.0, 1.0, "c1", 5, "PUBLISHED", "counterexample", True),
    GalleryEntry("paper-ex-smooth", "C-infinity [[phi, psi], [psi, psi]] built from exp(-1/t^2); A'(0) = 0",
                 PHI, PSI, PSI, "0", -1.0, 1.0, "c1", 4, "PUBLISHED", "counterexample", True),
    # remaining error paths
    GalleryEntry("zero-interval", "eigenvalues coincide on all of [-1, 0]",
                 "0", "0", "piecewise(t>=0, t, 0)", "0", -1.0, 1.0, "c1", 6, "TRIVIAL", "error", True),
    GalleryEntry("crossing-distinct", "diag(t, -t) run in distinct mode; the gap closes at 0",
                 "t", "-t", "0", "0", -1.0, 1.0, "distinct", 3, "TRIVIAL", "error", True),
    GalleryEntry("bad-expression", "unbalanced parenthesis in f",
                 "sin(t", "0", "1", "0", 0.0, 1.0, "distinct", 2, "TRIVIAL", "error", True),
)

GALLERY = {e.id: e for e in _ENTRIES}


def entries():
    return list(_ENTRIES)


def get(entry_id: str) -> GalleryEntry:
    try:
        return GALLERY[entry_id]
    except KeyError:
        raise ConfigError(f"unknown gallery id {entry_id!r}; try 'gallery list'") from None
