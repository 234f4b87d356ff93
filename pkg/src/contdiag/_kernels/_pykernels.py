"""Pure numpy implementations of the grid kernels.

These define the reference semantics; ``_ckernels.pyx`` must agree with them
to rounding.
"""

import numpy as np


def closed_form(f, g, hr, hc):
    """Closed-form spectrum of ``[[f, h], [conj h, g]]`` on arrays.

    Returns ``(lam_plus, lam_minus, p, q, gap)`` with ``p = lam_plus - g`` and
    ``q = lam_plus - f`` (both >= 0), so that ``lam_minus - f = -p`` and
    ``lam_minus - g = -q``. Each quantity is formed without cancellation;
    ``p * q == |h|^2`` to rounding.
    """
    f, g, hr, hc = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f, g, hr, hc)))
    # divide by a power of two near the largest entry: exact, and keeps
    # products such as f*g and |h|^2 clear of underflow and overflow
    m = np.maximum(np.maximum(np.abs(f), np.abs(g)), np.maximum(np.abs(hr), np.abs(hc)))
    scale = np.where((m > 0) & np.isfinite(m), np.ldexp(1.0, np.frexp(m)[1]), 1.0)
    f, g, hr, hc = f / scale, g / scale, hr / scale, hc / scale
    s = f + g
    delta = f - g
    habs = np.hypot(hr, hc)
    gap = np.hypot(delta, 2.0 * habs)
    h2 = hr * hr + hc * hc
    det = f * g - h2
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.where(s >= 0, 0.5 * (s + gap), 0.5 * (s - gap))
        small = np.where(big != 0, det / big, 0.0)
        lam_plus = np.where(s >= 0, big, small) * scale
        lam_minus = np.where(s >= 0, small, big) * scale
        p = np.where(delta >= 0, 0.5 * (gap + delta), 2.0 * h2 / (gap - delta)) * scale
        q = np.where(delta <= 0, 0.5 * (gap - delta), 2.0 * h2 / (gap + delta)) * scale
    gap = gap * scale
    hi = np.maximum(lam_plus, lam_minus)
    lo = np.minimum(lam_plus, lam_minus)
    return hi, lo, p, q, gap


def greedy_align(vectors):
    """Reorder and rephase columns of each ``(2, 2)`` frame to follow the previous one.

    Returns the aligned copy and the Frobenius step between consecutive frames.
    """
    out = np.array(vectors, dtype=complex, copy=True)
    n = out.shape[0]
    jumps = np.zeros(max(n - 1, 0))
    for i in range(1, n):
        prev = out[i - 1]
        cur = out[i].copy()
        ov = prev.conj().T @ cur
        if abs(ov[0, 1]) + abs(ov[1, 0]) > abs(ov[0, 0]) + abs(ov[1, 1]):
            cur = cur[:, ::-1].copy()
            ov = ov[:, ::-1]
        for j in range(2):
            c = ov[j, j]
            if c != 0:
                cur[:, j] = cur[:, j] * (c.conjugate() / abs(c))
        out[i] = cur
        jumps[i - 1] = np.linalg.norm(cur - prev)
    return out, jumps


def hermitian_metrics(U, f, g, hr, hc):
    """``(unitarity_defect, |offdiag|, d1, d2)`` of ``U* A U`` per grid point."""
    U = np.asarray(U, dtype=complex)
    A = np.empty(U.shape, dtype=complex)
    A[:, 0, 0] = f
    A[:, 1, 1] = g
    A[:, 0, 1] = np.asarray(hr) + 1j * np.asarray(hc)
    A[:, 1, 0] = np.asarray(hr) - 1j * np.asarray(hc)
    Uh = np.conj(np.swapaxes(U, 1, 2))
    M = Uh @ A @ U
    G = Uh @ U
    G[:, 0, 0] -= 1.0
    G[:, 1, 1] -= 1.0
    defect = np.sqrt(np.sum(np.abs(G) ** 2, axis=(1, 2)))
    offdiag = np.maximum(np.abs(M[:, 0, 1]), np.abs(M[:, 1, 0]))
    return defect, offdiag, M[:, 0, 0].real.copy(), M[:, 1, 1].real.copy()


def step_jumps(U):
    U = np.asarray(U, dtype=complex)
    d = U[1:] - U[:-1]
    return np.sqrt(np.sum(np.abs(d) ** 2, axis=tuple(range(1, U.ndim))))
