"""Kernel backend selection and axis-sweep helpers.

The hot stencil kernels exist twice: a compiled Cython extension
(swimex._kernels_cy) and a vectorized numpy fallback (swimex._kernels_py).
The compiled backend is preferred when importable; set SWIMEX_KERNELS=py
or SWIMEX_KERNELS=cy to force one (cy raises if the extension is missing).
Both produce bitwise-identical results (the extension is compiled with
FP contraction disabled); see benchmarks/bench_kernels.py for timings.
"""

import os

import numpy as np

from ._kernels_py import GHOST

_requested = os.environ.get("SWIMEX_KERNELS", "auto").strip().lower()
if _requested in ("py", "numpy", "python"):
    from . import _kernels_py as _impl

    BACKEND = "numpy"
elif _requested in ("cy", "cython", "compiled"):
    from . import _kernels_cy as _impl

    BACKEND = "cython"
elif _requested in ("auto", ""):
    try:
        from . import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "numpy"
else:
    raise ValueError(f"unrecognized SWIMEX_KERNELS={_requested!r}")

weno5_faces = _impl.weno5_faces
weno5_weights = _impl.weno5_weights
weno5_faces_fixed = _impl.weno5_faces_fixed
interp4_ext = _impl.interp4_ext
grad4_ext = _impl.grad4_ext
div4_ext = _impl.div4_ext
flux_div4 = _impl.flux_div4


def diff_faces(faces, dx):
    """Two-point divergence of narrow (n+1) face fluxes."""
    return (faces[:, 1:] - faces[:, :-1]) / dx


def grad4_cell(lines, dx):
    """Fourth-order cell-centered first derivative (interior cells)."""
    g = GHOST
    n = lines.shape[1] - 2 * g
    a = lines[:, g - 2:g - 2 + n]
    b = lines[:, g - 1:g - 1 + n]
    c = lines[:, g + 1:g + 1 + n]
    d = lines[:, g + 2:g + 2 + n]
    return ((a - d) + 8.0 * (c - b)) / (12.0 * dx)


def to_lines(arr, axis):
    """View a ghosted field as a C-contiguous (nlines, npts) batch."""
    moved = np.moveaxis(arr, axis, -1)
    shape = moved.shape
    return np.ascontiguousarray(moved).reshape(-1, shape[-1]), shape


def from_lines(lines, shape, axis):
    """Inverse of to_lines for an output with a new last-axis length."""
    out = lines.reshape(shape[:-1] + (lines.shape[-1],))
    return np.moveaxis(out, -1, axis)


def sweep(fn, arr, axis, *args):
    """Apply a row-wise kernel along one axis of a ghosted field."""
    lines, shape = to_lines(arr, axis)
    return from_lines(fn(lines, *args), shape, axis)
