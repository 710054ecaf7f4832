# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled inner loops: fold shifting, farthest point sampling, greedy regions."""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport partial_sort

ctypedef fused real_t:
    float
    double

ctypedef long long i64


def shift_folds(real_t[:, ::1] x, Py_ssize_t k, Py_ssize_t scale, Py_ssize_t block, bint inverse):
    cdef Py_ssize_t L = x.shape[0], D = x.shape[1]
    cdef Py_ssize_t w = D // k
    cdef Py_ssize_t b, start, i, f, c, dst, off
    out_arr = np.empty((L, D), dtype=np.float32 if real_t is float else np.float64)
    cdef real_t[:, ::1] out = out_arr
    with nogil:
        for f in range(k):
            off = (f * scale) % block
            if inverse:
                off = (block - off) % block
            for b in range(L // block):
                start = b * block
                for i in range(block):
                    dst = start + (i + off) % block
                    for c in range(f * w, (f + 1) * w):
                        out[dst, c] = x[start + i, c]
    return out_arr


def fps(const i64[:, ::1] coords, Py_ssize_t count, Py_ssize_t seed):
    cdef Py_ssize_t n = coords.shape[0]
    cdef Py_ssize_t r, i, best
    cdef i64 dx, dy, d, best_d
    centers_arr = np.empty(count, dtype=np.int64)
    cdef i64[::1] centers = centers_arr
    mind_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] mind = mind_arr
    with nogil:
        for i in range(n):
            dx = coords[i, 0] - coords[seed, 0]
            dy = coords[i, 1] - coords[seed, 1]
            mind[i] = dx * dx + dy * dy
        mind[seed] = -1
        centers[0] = seed
        for r in range(1, count):
            best = -1
            best_d = -1
            for i in range(n):
                if mind[i] > best_d:
                    best_d = mind[i]
                    best = i
            centers[r] = best
            mind[best] = -1
            for i in range(n):
                if mind[i] >= 0:
                    dx = coords[i, 0] - coords[best, 0]
                    dy = coords[i, 1] - coords[best, 1]
                    d = dx * dx + dy * dy
                    if d < mind[i]:
                        mind[i] = d
    return centers_arr


def assign_greedy(const i64[:, ::1] coords, const i64[::1] centers, Py_ssize_t k):
    cdef Py_ssize_t n = coords.shape[0], R = centers.shape[0]
    cdef Py_ssize_t r, i, j, take, c
    cdef i64 dx, dy
    cdef vector[pair[i64, i64]] cand
    members_arr = np.empty((R, k), dtype=np.int64)
    pad_arr = np.zeros((R, k), dtype=np.bool_)
    cdef i64[:, ::1] members = members_arr
    cdef cnp.npy_bool[:, ::1] pad = pad_arr
    claimed_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] claimed = claimed_arr
    for r in range(R):
        claimed[centers[r]] = 1
    with nogil:
        for r in range(R):
            c = centers[r]
            cand.clear()
            for i in range(n):
                if not claimed[i]:
                    dx = coords[i, 0] - coords[c, 0]
                    dy = coords[i, 1] - coords[c, 1]
                    cand.push_back(pair[i64, i64](dx * dx + dy * dy, i))
            take = k - 1
            if <Py_ssize_t>cand.size() < take:
                take = cand.size()
            partial_sort(cand.begin(), cand.begin() + take, cand.end())
            members[r, 0] = c
            for j in range(take):
                members[r, j + 1] = cand[j].second
                claimed[cand[j].second] = 1
            for j in range(take + 1, k):
                members[r, j] = c
                pad[r, j] = 1
    return members_arr, pad_arr


cdef extern from "<math.h>" nogil:
    double erfc(double)
    double exp(double)


def gelu(real_t[::1] x):
    """Exact GELU and its derivative, elementwise over a flat array."""
    cdef Py_ssize_t n = x.shape[0], i
    cdef double v, cdf, pdf
    dt = np.float32 if real_t is float else np.float64
    out_arr = np.empty(n, dtype=dt)
    der_arr = np.empty(n, dtype=dt)
    cdef real_t[::1] out = out_arr
    cdef real_t[::1] der = der_arr
    with nogil:
        for i in range(n):
            v = x[i]
            cdf = 0.5 * erfc(-v * 0.7071067811865476)
            pdf = 0.3989422804014327 * exp(-0.5 * v * v)
            out[i] = <real_t>(v * cdf)
            der[i] = <real_t>(cdf + v * pdf)
    return out_arr, der_arr
