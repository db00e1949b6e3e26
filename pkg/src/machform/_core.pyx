# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled swing-equation kernels. Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, isfinite

cnp.import_array()


cdef void _pe(const double[:] x, const double[:] E, const double[:, :] G,
              const double[:, :] B, double[:] out) noexcept nogil:
    cdef Py_ssize_t i, j, n = x.shape[0]
    cdef double s, d
    for i in range(n):
        s = 0.0
        for j in range(n):
            d = x[i] - x[j]
            s += E[i] * E[j] * (G[i, j] * cos(d) + B[i, j] * sin(d))
        out[i] = s


def electrical_power_batch(angles, E, G, B):
    cdef const double[:, :] a = np.ascontiguousarray(angles, dtype=np.float64)
    cdef const double[:] e = np.ascontiguousarray(E, dtype=np.float64)
    cdef const double[:, :] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef const double[:, :] b = np.ascontiguousarray(B, dtype=np.float64)
    out = np.empty((a.shape[0], a.shape[1]))
    cdef double[:, :] o = out
    cdef Py_ssize_t t
    with nogil:
        for t in range(a.shape[0]):
            _pe(a[t], e, g, b, o[t])
    return out


def rk4_integrate(delta0, omega0, Pm, M, E, G, B, double dt, Py_ssize_t nsteps):
    cdef const double[:] pm = np.ascontiguousarray(Pm, dtype=np.float64)
    cdef const double[:] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef const double[:] e = np.ascontiguousarray(E, dtype=np.float64)
    cdef const double[:, :] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef const double[:, :] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = pm.shape[0]
    angles_arr = np.empty((nsteps + 1, n))
    speeds_arr = np.empty((nsteps + 1, n))
    cdef double[:, :] A = angles_arr
    cdef double[:, :] W = speeds_arr
    cdef double[:] x = np.array(delta0, dtype=np.float64)
    cdef double[:] w = np.array(omega0, dtype=np.float64)
    cdef double[:] xs = np.empty(n)
    cdef double[:] pe = np.empty(n)
    cdef double[:, :] kx = np.empty((4, n))
    cdef double[:, :] kw = np.empty((4, n))
    cdef double h2 = 0.5 * dt
    cdef double c
    cdef Py_ssize_t i, k, s
    cdef Py_ssize_t done = nsteps
    cdef bint bad
    A[0, :] = x
    W[0, :] = w
    with nogil:
        for k in range(nsteps):
            for s in range(4):
                if s == 0:
                    c = 0.0
                elif s == 3:
                    c = dt
                else:
                    c = h2
                for i in range(n):
                    if s == 0:
                        xs[i] = x[i]
                    else:
                        xs[i] = x[i] + c * kx[s - 1, i]
                _pe(xs, e, g, b, pe)
                for i in range(n):
                    if s == 0:
                        kx[s, i] = w[i]
                    else:
                        kx[s, i] = w[i] + c * kw[s - 1, i]
                    kw[s, i] = (pm[i] - pe[i]) / m[i]
            bad = False
            for i in range(n):
                x[i] = x[i] + dt / 6.0 * (kx[0, i] + 2.0 * kx[1, i] + 2.0 * kx[2, i] + kx[3, i])
                w[i] = w[i] + dt / 6.0 * (kw[0, i] + 2.0 * kw[1, i] + 2.0 * kw[2, i] + kw[3, i])
                if not (isfinite(x[i]) and isfinite(w[i])):
                    bad = True
            if bad:
                done = k
                break
            A[k + 1, :] = x
            W[k + 1, :] = w
    if done < nsteps:
        return angles_arr[: done + 1], speeds_arr[: done + 1], done
    return angles_arr, speeds_arr, nsteps
