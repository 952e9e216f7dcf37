# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline unsigned char _parity(uint64_t x) nogil:
    # xor-fold; vectorises where a popcount call would not
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return <unsigned char>(x & 1)


def fwht_inplace(double[::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double x, y
    with nogil:
        while h < n:
            i = 0
            while i < n:
                for j in range(i, i + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
                i += 2 * h
            h *= 2
    return np.asarray(a)


def masked_parity(const int64_t[::1] xs, int64_t mask):
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef uint64_t m = <uint64_t>mask
    with nogil:
        for i in range(n):
            o[i] = _parity((<uint64_t>xs[i]) & m)
    return out


def monomial_apply(const int64_t[::1] xs, const int64_t[:, ::1] prog, bint inverse):
    cdef Py_ssize_t n = xs.shape[0], g = prog.shape[0], i, r, row
    ys_arr = np.array(xs, dtype=np.int64, copy=True)
    ph_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] ys = ys_arr
    cdef int64_t[::1] ph = ph_arr
    cdef int64_t mask, k
    with nogil:
        # one pass per program row keeps the inner loop branch-light
        for r in range(g):
            row = g - 1 - r if inverse else r
            mask = prog[row, 1]
            if prog[row, 0] == 0:
                for i in range(n):
                    ys[i] = ys[i] ^ mask
            else:
                k = -prog[row, 2] if inverse else prog[row, 2]
                for i in range(n):
                    if (ys[i] & mask) == mask:
                        ph[i] += k
        for i in range(n):
            ph[i] = ph[i] & 7
    return ys_arr, ph_arr


def sv_apply_1q(double complex[::1] psi, Py_ssize_t outer, Py_ssize_t inner,
                double complex u00, double complex u01,
                double complex u10, double complex u11):
    # real arithmetic: C complex multiply goes through the slow NaN-safe path
    cdef double *v = <double *>&psi[0]
    cdef double ar00 = u00.real, ai00 = u00.imag, ar01 = u01.real, ai01 = u01.imag
    cdef double ar10 = u10.real, ai10 = u10.imag, ar11 = u11.real, ai11 = u11.imag
    cdef double xr, xi, yr, yi
    cdef Py_ssize_t o, j, lo, hi
    with nogil:
        for o in range(outer):
            lo = 2 * (o * 2 * inner)
            hi = lo + 2 * inner
            for j in range(inner):
                xr = v[lo + 2 * j]
                xi = v[lo + 2 * j + 1]
                yr = v[hi + 2 * j]
                yi = v[hi + 2 * j + 1]
                v[lo + 2 * j] = ar00 * xr - ai00 * xi + ar01 * yr - ai01 * yi
                v[lo + 2 * j + 1] = ar00 * xi + ai00 * xr + ar01 * yi + ai01 * yr
                v[hi + 2 * j] = ar10 * xr - ai10 * xi + ar11 * yr - ai11 * yi
                v[hi + 2 * j + 1] = ar10 * xi + ai10 * xr + ar11 * yi + ai11 * yr
    return np.asarray(psi)


def sv_apply_phase(double complex[::1] psi, int nbits, Py_ssize_t inner,
                   int64_t mask, double complex phase):
    cdef double *v = <double *>&psi[0]
    cdef double pr = phase.real, pi = phase.imag, xr, xi
    cdef int64_t free = (((<int64_t>1) << nbits) - 1) & ~mask
    cdef int64_t sub = 0
    cdef Py_ssize_t j, base
    with nogil:
        # walk only the rows containing every mask bit
        while True:
            base = 2 * (mask | sub) * inner
            for j in range(inner):
                xr = v[base + 2 * j]
                xi = v[base + 2 * j + 1]
                v[base + 2 * j] = pr * xr - pi * xi
                v[base + 2 * j + 1] = pr * xi + pi * xr
            if sub == free:
                break
            sub = (sub - free) & free
    return np.asarray(psi)
