"""Steady-state solves of the vectorized four-level generator.

The steady state is the trace-one null vector of the 16x16 generator.
Trace preservation makes the 16 generator rows rank-deficient by exactly
one, so the row for d(rho_11)/dt is replaced by the trace functional and
the resulting square system solved directly.

Two backends produce identical results: a compiled Cython kernel
(assembly + LAPACK zgesv per grid point, no large temporaries) and a
pure-numpy batched solve. The kernel is preferred when the extension
built; set TCSPIN_FORCE_NUMPY=1 or call set_backend("numpy") to override.
See benchmarks/bench_steady_state.py for the comparison.
"""

import os

import numpy as np

from .model import DIAG_IDX, DIM, IDX_33, IDX_44

try:
    from . import _kernel

    HAVE_KERNEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None
    HAVE_KERNEL = False

_backend = None  # None = auto


def set_backend(name):
    """Force the solver backend: 'kernel', 'numpy', or None for auto."""
    global _backend
    if name not in (None, "kernel", "numpy"):
        raise ValueError("backend must be 'kernel', 'numpy', or None")
    if name == "kernel" and not HAVE_KERNEL:
        raise RuntimeError("compiled kernel not available")
    _backend = name


def active_backend():
    if _backend is not None:
        return _backend
    if os.environ.get("TCSPIN_FORCE_NUMPY"):
        return "numpy"
    return "kernel" if HAVE_KERNEL else "numpy"


_TRACE_ROW = np.zeros(DIM, dtype=complex)
_TRACE_ROW[DIAG_IDX] = 1.0
_RHS = np.zeros(DIM, dtype=complex)
_RHS[0] = 1.0


def steady_state_vector(generator):
    """Trace-one steady state of one generator, as a length-16 vector."""
    a = np.array(generator, dtype=complex)
    a[0, :] = _TRACE_ROW
    return np.linalg.solve(a, _RHS)


def fluorescence_batch(g0, d1diag, d2diag, det1, det2):
    """Excited-state population rho_33 + rho_44 for a batch of detunings.

    g0: (16, 16) constant generator; d1diag/d2diag: length-16 diagonal
    factors of the detuning-dependent parts; det1/det2: effective
    detunings per batch element (broadcast against each other).
    """
    det1, det2 = np.broadcast_arrays(
        np.atleast_1d(np.asarray(det1, dtype=float)),
        np.atleast_1d(np.asarray(det2, dtype=float)),
    )
    shape = det1.shape
    det1 = np.ascontiguousarray(det1.ravel())
    det2 = np.ascontiguousarray(det2.ravel())

    if active_backend() == "kernel":
        out = _kernel.fluorescence_batch(
            np.asfortranarray(g0, dtype=complex),
            np.ascontiguousarray(d1diag, dtype=complex),
            np.ascontiguousarray(d2diag, dtype=complex),
            det1,
            det2,
        )
        return np.asarray(out).reshape(shape)
    return _fluorescence_batch_numpy(g0, d1diag, d2diag, det1, det2).reshape(shape)


def _fluorescence_batch_numpy(g0, d1diag, d2diag, det1, det2):
    n = det1.size
    a = np.broadcast_to(g0, (n, DIM, DIM)).copy()
    idx = np.arange(DIM)
    a[:, idx, idx] += np.outer(det1, d1diag) + np.outer(det2, d2diag)
    a[:, 0, :] = _TRACE_ROW
    b = np.broadcast_to(_RHS, (n, DIM))
    x = np.linalg.solve(a, b[..., None])[..., 0]
    return np.real(x[:, IDX_33] + x[:, IDX_44])
