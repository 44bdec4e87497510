# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled steady-state kernel: per-point generator assembly + zgesv.

Mirrors solver._fluorescence_batch_numpy exactly; kept free of Python
objects inside the loop so scans and fit Jacobians stay cheap.
"""

import numpy as np
cimport numpy as cnp
from scipy.linalg.cython_lapack cimport zgesv

cnp.import_array()

DEF DIM = 16


def fluorescence_batch(
    double complex[::1, :] g0,
    double complex[::1] d1diag,
    double complex[::1] d2diag,
    double[::1] det1,
    double[::1] det2,
):
    """rho_33 + rho_44 of the trace-one steady state per batch element.

    g0 must be Fortran-ordered (16, 16); det1/det2 are the effective
    laser detunings per element.
    """
    cdef Py_ssize_t n = det1.shape[0]
    if det2.shape[0] != n:
        raise ValueError("det1 and det2 must have equal length")

    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef double complex a[DIM * DIM]
    cdef double complex b[DIM]
    cdef int ipiv[DIM]
    cdef int dim = DIM, nrhs = 1, info = 0
    cdef Py_ssize_t k, i, j
    cdef double complex t1, t2

    with nogil:
        for k in range(n):
            t1 = det1[k]
            t2 = det2[k]
            # column-major copy of g0 with the detuning diagonal added
            for j in range(DIM):
                for i in range(DIM):
                    a[j * DIM + i] = g0[i, j]
            for i in range(DIM):
                a[i * DIM + i] = a[i * DIM + i] + t1 * d1diag[i] + t2 * d2diag[i]
            # replace the d(rho_11)/dt row with the trace functional
            for j in range(DIM):
                a[j * DIM] = 0.0
            for j in range(0, DIM, 5):
                a[j * DIM] = 1.0
            for i in range(DIM):
                b[i] = 0.0
            b[0] = 1.0
            zgesv(&dim, &nrhs, a, &dim, ipiv, b, &dim, &info)
            if info != 0:
                with gil:
                    raise np.linalg.LinAlgError(
                        f"steady-state solve failed (zgesv info={info})"
                    )
            # rho_33 -> flat index 10, rho_44 -> 15 (row-major vec)
            out[k] = b[10].real + b[15].real
    return out_arr
