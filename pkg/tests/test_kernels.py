import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from contdiag import _kernels
from contdiag.oracle import pointwise_frames
from contdiag.tracks import Grid, HermitianField

BACKENDS = _kernels.available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert _kernels.BACKEND in BACKENDS


@needs_both
@given(arrays(np.float64, (4, 17), elements=finite))
@settings(max_examples=100)
def test_closed_form_backends_agree(x):
    py = _kernels.get_backend("python").closed_form(*x)
    cy = _kernels.get_backend("cython").closed_form(*x)
    for a, b in zip(py, cy):
        np.testing.assert_array_equal(a, b)


def _frames(n=400, seed=3):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(-1, 1, n))
    fld = HermitianField.from_exprs("sin(3*t)", "t^2", "cos(2*t)", "0.5*sin(t)", -1, 1)
    return fld, t, pointwise_frames(fld, t)[1]


@needs_both
def test_alignment_and_metrics_backends_agree():
    fld, t, frames = _frames()
    py, cy = _kernels.get_backend("python"), _kernels.get_backend("cython")
    ap, jp = py.greedy_align(frames)
    ac, jc = cy.greedy_align(frames)
    np.testing.assert_allclose(ap, ac, atol=1e-13)
    np.testing.assert_allclose(jp, jc, atol=1e-13)
    comps = fld.components(t)
    for a, b in zip(py.hermitian_metrics(ap, *comps), cy.hermitian_metrics(ap, *comps)):
        np.testing.assert_allclose(a, b, atol=1e-13)
    np.testing.assert_allclose(py.step_jumps(ap), cy.step_jumps(ap), atol=1e-13)


def test_greedy_alignment_removes_phase_and_order_noise():
    fld, t, frames = _frames()
    rng = np.random.default_rng(0)
    noisy = frames * np.exp(1j * rng.uniform(0, 2 * np.pi, (t.size, 1, 2)))
    swap = rng.random(t.size) < 0.5
    noisy[swap] = noisy[swap][:, :, ::-1]
    aligned, jumps = _kernels.greedy_align(noisy)
    clean, clean_jumps = _kernels.greedy_align(frames)
    assert jumps.max() == pytest.approx(clean_jumps.max(), rel=1e-9)
    assert jumps.max() < 0.2


def test_pure_python_switch():
    env = dict(os.environ, CONTDIAG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import contdiag; print(contdiag.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_metrics_on_exact_diagonalization():
    grid = Grid(0, 1, 5)
    U = np.tile(np.eye(2, dtype=complex), (5, 1, 1))
    f, g = grid.points, -grid.points
    defect, off, d1, d2 = _kernels.hermitian_metrics(U, f, g, 0 * f, 0 * f)
    assert defect.max() == 0 and off.max() == 0
    np.testing.assert_array_equal(d1, f)
    np.testing.assert_array_equal(d2, g)
