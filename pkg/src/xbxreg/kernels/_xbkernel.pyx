# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the XB log-density grid.

Same contract as kernels._ref.xb_loglik_grid; see that module for the
reference semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log, log1p

from scipy.special.cython_special cimport betainc, betaln

cnp.import_array()

BACKEND = "compiled"


def xb_loglik_grid(object y_in, object mu_in, object phi_in, object u_in):
    cdef double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(mu_in, dtype=np.float64)
    cdef double[::1] phi = np.ascontiguousarray(phi_in, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t T = u.shape[0]
    out_arr = np.empty((n, T), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef Py_ssize_t i, t
    cdef double p, q, lbeta, yi, one_p2u, z0, zi, f

    for i in range(n):
        yi = y[i]
        p = mu[i] * phi[i]
        q = (1.0 - mu[i]) * phi[i]
        lbeta = betaln(p, q)
        for t in range(T):
            one_p2u = 1.0 + 2.0 * u[t]
            if yi > 0.0 and yi < 1.0:
                zi = (yi + u[t]) / one_p2u
                out[i, t] = (
                    (p - 1.0) * log(zi)
                    + (q - 1.0) * log1p(-zi)
                    - lbeta
                    - log(one_p2u)
                )
            else:
                z0 = u[t] / one_p2u
                if yi == 0.0:
                    f = betainc(p, q, z0)
                else:
                    f = betainc(q, p, z0)
                out[i, t] = log(f) if f > 0.0 else -INFINITY
    return out_arr
