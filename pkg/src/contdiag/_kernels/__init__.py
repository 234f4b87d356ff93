"""Grid kernels with a compiled core and a pure-Python fallback.

The Cython extension is used when it was built; set ``CONTDIAG_PURE_PYTHON=1``
to force the numpy implementations. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

KERNEL_NAMES = ("closed_form", "greedy_align", "hermitian_metrics", "step_jumps")


def available_backends():
    return ["python"] + (["cython"] if _ckernels is not None else [])


def get_backend(name):
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


if _ckernels is not None and os.environ.get("CONTDIAG_PURE_PYTHON") != "1":
    BACKEND = "cython"
else:
    BACKEND = "python"

_active = get_backend(BACKEND)
closed_form = _active.closed_form
greedy_align = _active.greedy_align
hermitian_metrics = _active.hermitian_metrics
step_jumps = _active.step_jumps
