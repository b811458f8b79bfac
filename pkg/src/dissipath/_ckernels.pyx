# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics must match ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int _popcount_below(int64_t det, int idx) nogil:
    cdef uint64_t m = (<uint64_t>det) & ((<uint64_t>1 << idx) - 1)
    cdef int c = 0
    while m:
        m &= m - 1
        c += 1
    return c


cdef inline int64_t _lookup(const int64_t[::1] dets, int64_t key) nogil:
    cdef int64_t lo = 0, hi = dets.shape[0] - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if dets[mid] == key:
            return mid
        elif dets[mid] < key:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


def excitation_table(const int64_t[::1] dets, int n_so):
    cdef Py_ssize_t D = dets.shape[0]
    cdef Py_ssize_t cap = D * n_so * n_so
    cdef cnp.ndarray[int64_t, ndim=1] P = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] Q = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] R = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] C = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] S = np.empty(cap, dtype=np.float64)
    cdef Py_ssize_t n = 0, col
    cdef int p, q, par
    cdef int64_t det, removed, new, row
    with nogil:
        for col in range(D):
            det = dets[col]
            for q in range(n_so):
                if not ((det >> q) & 1):
                    continue
                removed = det ^ (<int64_t>1 << q)
                for p in range(n_so):
                    if (removed >> p) & 1:
                        continue
                    new = removed | (<int64_t>1 << p)
                    row = _lookup(dets, new)
                    par = _popcount_below(det, q) + _popcount_below(removed, p)
                    P[n] = p
                    Q[n] = q
                    R[n] = row
                    C[n] = col
                    S[n] = -1.0 if (par & 1) else 1.0
                    n += 1
    return P[:n], Q[:n], R[:n], C[:n], S[:n]


def hitting_times(const double[:, ::1] cum, const int64_t[::1] start,
                  uint64_t seed, int64_t cap, int64_t target):
    cdef Py_ssize_t n = start.shape[0], D = cum.shape[0], i
    cdef cnp.ndarray[int64_t, ndim=1] steps = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] capped = np.zeros(n, dtype=np.uint8)
    cdef uint64_t state
    cdef int64_t j, t, k
    cdef double u
    with nogil:
        for i in range(n):
            state = _mix(seed ^ _mix(<uint64_t>i + GOLDEN))
            j = start[i]
            t = 0
            while j != target and t < cap:
                state = state + GOLDEN
                u = <double>(_mix(state) >> 11) * (1.0 / 9007199254740992.0)
                k = 0
                while k < D - 1 and u >= cum[j, k]:
                    k += 1
                j = k
                t += 1
            steps[i] = t
            capped[i] = 1 if j != target else 0
    return steps, capped.astype(bool)
