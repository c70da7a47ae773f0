# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled odometer loops for the exact density sums."""

from libc.stdlib cimport calloc, free


def exact_density(long[::1] sizes, double[::1] wflat, long[::1] woff,
                  double[::1] table, long[:, ::1] positions, long[:, ::1] strides,
                  unsigned char[::1] edges):
    cdef Py_ssize_t nc = sizes.shape[0]
    cdef Py_ssize_t nk = positions.shape[0]
    cdef Py_ssize_t ns = positions.shape[1]
    cdef long* digit = <long*> calloc(nc, sizeof(long))
    if digit == NULL:
        raise MemoryError()
    cdef double total = 0.0
    cdef double w, p
    cdef Py_ssize_t j, e, s
    cdef long flat
    try:
        while True:
            w = 1.0
            for j in range(nc):
                w *= wflat[woff[j] + digit[j]]
            for e in range(nk):
                flat = 0
                for s in range(ns):
                    flat += strides[e, s] * digit[positions[e, s]]
                p = table[flat]
                if edges[e]:
                    w *= p
                else:
                    w *= 1.0 - p
            total += w
            j = nc - 1
            while j >= 0:
                digit[j] += 1
                if digit[j] < sizes[j]:
                    break
                digit[j] = 0
                j -= 1
            if j < 0:
                break
    finally:
        free(digit)
    return total


def exact_density_table(long[::1] sizes, double[::1] wflat, long[::1] woff,
                        double[::1] table, long[:, ::1] positions, long[:, ::1] strides,
                        double[::1] out):
    cdef Py_ssize_t nc = sizes.shape[0]
    cdef Py_ssize_t nk = positions.shape[0]
    cdef Py_ssize_t ns = positions.shape[1]
    cdef Py_ssize_t width = out.shape[0]  # 2**nk, allocated by the caller
    cdef long* digit = <long*> calloc(nc, sizeof(long))
    cdef double* vec = <double*> calloc(width, sizeof(double))
    if digit == NULL or vec == NULL:
        free(digit)
        free(vec)
        raise MemoryError()
    cdef double w, p
    cdef Py_ssize_t j, e, c, s, half
    cdef long flat
    try:
        while True:
            w = 1.0
            for j in range(nc):
                w *= wflat[woff[j] + digit[j]]
            vec[0] = w
            half = 1
            for e in range(nk):
                flat = 0
                for s in range(ns):
                    flat += strides[e, s] * digit[positions[e, s]]
                p = table[flat]
                for c in range(half):
                    vec[half + c] = vec[c] * p
                    vec[c] = vec[c] * (1.0 - p)
                half *= 2
            for c in range(width):
                out[c] += vec[c]
            j = nc - 1
            while j >= 0:
                digit[j] += 1
                if digit[j] < sizes[j]:
                    break
                digit[j] = 0
                j -= 1
            if j < 0:
                break
    finally:
        free(digit)
        free(vec)
