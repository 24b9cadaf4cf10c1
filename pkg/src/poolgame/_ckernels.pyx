# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
from libc.math cimport fabs, INFINITY, NAN

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef double _rhs(double[::1] x, double[::1] w, double[::1] om, double price,
                 double[::1] u, double[::1] out) noexcept nogil:
    cdef Py_ssize_t m = x.shape[0], i, j
    cdef double total = 0.0, ybar = 0.0, v, norm = 0.0
    for j in range(m):
        total += om[j] * x[j]
    if total == 0.0:
        return NAN
    for i in range(m):
        u[i] = w[i] / total - price * om[i]
        ybar += x[i] * u[i]
    for i in range(m):
        v = x[i] * (u[i] - ybar)
        out[i] = v
        if v != v:
            norm = NAN
        elif norm == norm and fabs(v) > norm:
            norm = fabs(v)
    return norm


def replicator_rhs(x, weights, omega, double price):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    out = np.empty(xv.shape[0])
    cdef double[::1] o = out
    cdef double[::1] u = np.empty(xv.shape[0])
    cdef double total = 0.0
    cdef Py_ssize_t j
    for j in range(xv.shape[0]):
        total += om[j] * xv[j]
    if total == 0.0:
        raise ZeroDivisionError("zero total hash rate")
    _rhs(xv, w, om, price, u, o)
    return out


def rk4_integrate(x0, weights, omega, double price, double step, long n_steps,
                  double tol, long record_every):
    cdef Py_ssize_t m = len(x0), i
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] k1 = np.zeros(m), k2 = np.zeros(m), k3 = np.zeros(m)
    cdef double[::1] k4 = np.zeros(m), xs = np.zeros(m), u = np.zeros(m)
    cdef double h = step, hh = 0.5 * step, h6 = step / 6.0
    cdef double t = 0.0, norm, total, v, bad
    cdef double fail_time = NAN
    cdef long n = 0
    cdef bint converged

    cdef long cap = n_steps // record_every + 2
    rec_t = np.empty(cap)
    rec_x = np.empty((cap, m))
    cdef double[::1] rt = rec_t
    cdef double[:, ::1] rx = rec_x
    cdef long nrec = 1
    rt[0] = 0.0
    for i in range(m):
        rx[0, i] = x[i]

    norm = _rhs(x, w, om, price, u, k1)
    if norm != norm:
        return rec_t[:1], rec_x[:1], False, 0.0, norm
    converged = norm < tol
    with nogil:
        while not converged and n < n_steps:
            n += 1
            t = n * h
            for i in range(m):
                xs[i] = x[i] + hh * k1[i]
            bad = _rhs(xs, w, om, price, u, k2)
            for i in range(m):
                xs[i] = x[i] + hh * k2[i]
            bad += _rhs(xs, w, om, price, u, k3)
            for i in range(m):
                xs[i] = x[i] + h * k3[i]
            bad += _rhs(xs, w, om, price, u, k4)
            if bad != bad:
                fail_time = t
                break
            total = 0.0
            for i in range(m):
                v = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if v < 0.0:
                    v = 0.0
                xs[i] = v
                total += v
            if not (total > 0.0 and total < INFINITY):
                fail_time = t
                break
            for i in range(m):
                x[i] = xs[i] / total
            norm = _rhs(x, w, om, price, u, k1)
            if norm != norm or norm == INFINITY:
                fail_time = t
                break
            converged = norm < tol
            if converged or n % record_every == 0 or n == n_steps:
                rt[nrec] = t
                for i in range(m):
                    rx[nrec, i] = x[i]
                nrec += 1
    return rec_t[:nrec].copy(), rec_x[:nrec].copy(), bool(converged), fail_time, norm


def apply_switches(cnp.int64_t[::1] assign, const cnp.int64_t[::1] candidates,
                   const double[::1] draws, const double[:, ::1] table,
                   cnp.int64_t[::1] counts):
    cdef Py_ssize_t k, n = assign.shape[0], m = counts.shape[0]
    cdef cnp.int64_t cur, cand
    with nogil:
        for k in range(m):
            counts[k] = 0
        for k in range(n):
            cur = assign[k]
            cand = candidates[k]
            if draws[k] < table[cur, cand]:
                assign[k] = cand
                cur = cand
            counts[cur] += 1
