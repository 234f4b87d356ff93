"""Continuous diagonalization of 2x2 hermitian matrix fields."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    ContDiagError,
    DerivativeDiscontinuous,
    GapTooSmall,
    NotFinitelyMany,
    ObstructionDetected,
    VerificationError,
)
from .pipeline import (  # noqa: E402
    PipelineOptions,
    UnitaryTrack,
    check_obstruction,
    diagonalize_c1,
    diagonalize_distinct,
)
from .signed_norm import VectorTrack, build_signed_norm  # noqa: E402
from .spectral import eigenvalues_at, find_coalescence  # noqa: E402
from .tracks import Grid, HermitianField, ScalarTrack  # noqa: E402
from .walk import Branch, walk  # noqa: E402

__all__ = [
    "BACKEND", "Branch", "ConfigError", "ContDiagError", "DerivativeDiscontinuous", "GapTooSmall",
    "Grid", "HermitianField", "NotFinitelyMany", "ObstructionDetected", "PipelineOptions",
    "ScalarTrack", "UnitaryTrack", "VectorTrack", "VerificationError", "build_signed_norm",
    "check_obstruction", "diagonalize_c1", "diagonalize_distinct", "eigenvalues_at",
    "find_coalescence", "walk",
]
