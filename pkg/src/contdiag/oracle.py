"""Pointwise reference diagonalization, used to cross-check constructed tracks.

Each grid point is diagonalized independently with LAPACK (``numpy.linalg.eigh``)
and the columns are then reordered and rephased greedily to follow the
previous point. Where a continuous diagonalization exists the aligned frames
move by ``O(dt)`` per step; an obstruction shows up as an ``O(1)`` step that
does not shrink under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .tracks import HermitianField


def pointwise_frames(field: HermitianField, ts):
    """Eigenvalues ``(n, 2)`` (descending) and eigenvector frames ``(n, 2, 2)``."""
    w, v = np.linalg.eigh(field.matrices(ts))
    return w[:, ::-1], v[:, :, ::-1]


@dataclass(frozen=True, eq=False)
class AlignedOracle:
    t: np.ndarray
    eigenvalues: np.ndarray
    frames: np.ndarray
    jumps: np.ndarray

    @property
    def max_jump(self) -> float:
        return float(self.jumps.max()) if self.jumps.size else 0.0

    @property
    def max_jump_at(self) -> float:
        """Midpoint of the grid step with the largest jump."""
        if not self.jumps.size:
            return float(self.t[0])
        i = int(np.argmax(self.jumps))
        return float(0.5 * (self.t[i] + self.t[i + 1]))


def aligned_oracle(field: HermitianField, ts) -> AlignedOracle:
    ts = np.asarray(ts, dtype=float)
    w, frames = pointwise_frames(field, ts)
    aligned, jumps = _kernels.greedy_align(frames)
    return AlignedOracle(ts, w, aligned, jumps)


def column_alignment(U, frames, match_order=True):
    """``|<u_i, o_i>|`` per grid point and column, shape ``(n, 2)``.

    With ``match_order`` the oracle columns are taken in eigenvalue order
    (column 1 <-> larger eigenvalue); otherwise the column pairing that
    maximizes the total overlap is used at each point.
    """
    ov = np.abs(np.einsum("nri,nrj->nij", np.conj(U), frames))
    straight = np.stack([ov[:, 0, 0], ov[:, 1, 1]], axis=-1)
    if match_order:
        return straight
    swapped = np.stack([ov[:, 0, 1], ov[:, 1, 0]], axis=-1)
    use_swap = swapped.sum(axis=-1) > straight.sum(axis=-1)
    return np.where(use_swap[:, None], swapped, straight)
