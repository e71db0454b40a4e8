# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernel; same contract as ``weakgauss._pykernel``."""

import numpy as np

from libc.math cimport cos, log1p, sqrt
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586

# must match rng.WEAK_TAG / rng.PROJECTIVE_TAG
cdef uint64_t WEAK_TAG = 0
cdef uint64_t PROJECTIVE_TAG = 1


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t fold(uint64_t h, uint64_t idx, uint64_t position) noexcept nogil:
    return mix64(h ^ mix64(idx + (position + 1) * GOLDEN))


cdef inline double uniform(uint64_t key, uint64_t j) noexcept nogil:
    return <double>(mix64(key + (j + 1) * GOLDEN) >> 11) * INV_2_53


cdef inline double normal(uint64_t key, uint64_t j) noexcept nogil:
    cdef double u1 = uniform(key, 2 * j)
    cdef double u2 = uniform(key, 2 * j + 1)
    return sqrt(-2.0 * log1p(-u1)) * cos(TWO_PI * u2)


cdef inline double sum_(double* x, int m) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(m):
        s += x[i]
    return s


cdef inline double ssd(double* x, int m) noexcept nogil:
    # sum of squared deviations from the channel mean
    cdef double mu = sum_(x, m) / m
    cdef double s = 0.0
    cdef double d
    cdef int i
    for i in range(m):
        d = x[i] - mu
        s += d * d
    return s


cdef void weak_quadrature(double* weak, double* strong, int h, double a, double b,
                          bint deconvolve, bint weighted, double* centre,
                          double* spread) noexcept nogil:
    cdef double var = (ssd(weak, h) + ssd(strong, h)) / (2 * (h - 1))
    cdef double ww, ws
    if deconvolve:
        var = var - 0.5 * (a + b)
        if var < 0.0:
            var = 0.0
    if weighted:
        ww = 1.0 / (var + a)
        ws = 1.0 / (var + b)
        centre[0] = (ww * sum_(weak, h) + ws * sum_(strong, h)) / (ww * h + ws * h)
    else:
        centre[0] = (sum_(weak, h) + sum_(strong, h)) / (2 * h)
    spread[0] = sqrt(var)


def simulate_block(uint64_t prefix_key, long run_start, long n_runs, double q0, double p0,
                   double dq, double dp, int n, double dqm, bint deconvolve=True,
                   bint weighted=False):
    if n < 4 or n % 2:
        raise ValueError("kernel needs an even ensemble size >= 4")
    cdef int h = n // 2
    cdef double dpm = 0.5 / dqm
    cdef double a = dqm * dqm
    cdef double b = dpm * dpm
    cdef double s_wq = sqrt(dq * dq + a)
    cdef double s_sp = sqrt(dp * dp + b)
    cdef double s_wp = sqrt(dp * dp + a)
    cdef double s_sq = sqrt(dq * dq + b)
    out_arr = np.empty((n_runs, 8), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* buf = <double*> malloc(4 * h * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* wq = buf
    cdef double* sq = buf + h
    cdef double* wp = buf + 2 * h
    cdef double* sp = buf + 3 * h
    cdef long r
    cdef int i
    cdef uint64_t run_key, kw, kp
    try:
        with nogil:
            for r in range(n_runs):
                run_key = fold(prefix_key, <uint64_t>(run_start + r), 4)
                kw = fold(run_key, WEAK_TAG, 5)
                for i in range(h):
                    wq[i] = q0 + s_wq * normal(kw, 2 * i)
                    sp[i] = p0 + s_sp * normal(kw, 2 * i + 1)
                for i in range(h):
                    wp[i] = p0 + s_wp * normal(kw, n + 2 * i)
                    sq[i] = q0 + s_sq * normal(kw, n + 2 * i + 1)
                weak_quadrature(wq, sq, h, a, b, deconvolve, weighted, &out[r, 0], &out[r, 2])
                weak_quadrature(wp, sp, h, a, b, deconvolve, weighted, &out[r, 1], &out[r, 3])

                kp = fold(run_key, PROJECTIVE_TAG, 5)
                for i in range(h):
                    wq[i] = q0 + dq * normal(kp, i)
                    wp[i] = p0 + dp * normal(kp, h + i)
                out[r, 4] = sum_(wq, h) / h
                out[r, 5] = sum_(wp, h) / h
                out[r, 6] = sqrt(ssd(wq, h) / (h - 1))
                out[r, 7] = sqrt(ssd(wp, h) / (h - 1))
    finally:
        free(buf)
    return out_arr
