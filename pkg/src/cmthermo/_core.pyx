# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same signatures as ``_pycore``."""
from libc.math cimport exp, expm1, fabs, pow, INFINITY

KIND_FERMIONIC = 0
KIND_BOSONIC = 1


cdef inline double _kernel(int kind, double s, double x) nogil:
    cdef double a = fabs(x)
    cdef double q, num, r
    if a == 0.0:
        return 0.0
    q = exp(-a)
    num = q if x > 0 else q * q
    if kind == 0:
        return a * a * num / ((1.0 + q) * (1.0 + q) * (1.0 + q))
    # |x|^{2+s}/d^3 as |x|^{s-1} (|x|/d)^3 so tiny gaps do not underflow
    r = a / -expm1(-a)
    return pow(a, s - 1.0) * r * r * r * num


def fi_pair_sum(const double[::1] u, const double[::1] wi, const double[::1] wj, int kind, double s):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t a, b
    cdef double total = 0.0, row
    with nogil:
        for a in range(n):
            row = 0.0
            for b in range(n):
                row += wj[b] * _kernel(kind, s, u[b] - u[a])
            total += wi[a] * row
    return total


cdef inline Py_ssize_t _bisect_right(const double[:, ::1] cum, Py_ssize_t r, double v) nogil:
    cdef Py_ssize_t lo = 0, hi = cum.shape[1], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if v < cum[r, mid]:
            hi = mid
        else:
            lo = mid + 1
    if lo >= cum.shape[1]:
        lo = cum.shape[1] - 1
    return lo


def simulate_block(const double[:, ::1] cum_rates, Py_ssize_t state, double t, double tau,
                   const double[::1] exp_draws, const double[::1] unif_draws,
                   double[::1] out_times, long[::1] out_states, Py_ssize_t n_out):
    cdef Py_ssize_t m = cum_rates.shape[1]
    cdef Py_ssize_t cap = out_times.shape[0]
    cdef Py_ssize_t n_draws = exp_draws.shape[0]
    cdef Py_ssize_t i = 0
    cdef double total, dwell
    cdef bint finished = False
    with nogil:
        while i < n_draws and n_out < cap:
            total = cum_rates[state, m - 1]
            dwell = exp_draws[i] / total if total > 0 else INFINITY
            if t + dwell >= tau:
                i += 1
                t = tau
                finished = True
                break
            t += dwell
            state = _bisect_right(cum_rates, state, unif_draws[i] * total)
            out_times[n_out] = t
            out_states[n_out] = state
            n_out += 1
            i += 1
    return i, n_out, state, t, finished


def stats_block(const double[:, ::1] cum_rates, const long[::1] manifold, Py_ssize_t state,
                double t, double tau, const double[::1] exp_draws, const double[::1] unif_draws,
                double[::1] acc):
    cdef Py_ssize_t m = cum_rates.shape[1]
    cdef Py_ssize_t n_draws = exp_draws.shape[0]
    cdef Py_ssize_t i = 0, nxt
    cdef double total, dwell
    cdef double k = acc[0], l = acc[1], tau0 = acc[2], jumps = acc[3]
    cdef bint finished = False
    with nogil:
        while i < n_draws:
            total = cum_rates[state, m - 1]
            dwell = exp_draws[i] / total if total > 0 else INFINITY
            i += 1
            if t + dwell >= tau:
                if manifold[state] == 0:
                    tau0 += tau - t
                t = tau
                finished = True
                break
            if manifold[state] == 0:
                tau0 += dwell
            t += dwell
            nxt = _bisect_right(cum_rates, state, unif_draws[i - 1] * total)
            if manifold[state] == 0 and manifold[nxt] == 1:
                k += 1
            elif manifold[state] == 1 and manifold[nxt] == 0:
                l += 1
            jumps += 1
            state = nxt
    acc[0] = k
    acc[1] = l
    acc[2] = tau0
    acc[3] = jumps
    return i, state, t, finished
