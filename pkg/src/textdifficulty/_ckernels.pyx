# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise kernels over sparsely stored per-class rows.

Rows use CSR layout: row ``r`` owns ``indices[indptr[r]:indptr[r+1]]``
(strictly increasing) and the matching values.  Results are condensed
upper-triangle vectors in ``(0,1), (0,2), ..., (1,2), ...`` order.
"""
import numpy as np

from libc.math cimport sqrt, log
from libc.stdint cimport int64_t


cdef inline double _lookup(const int64_t[:] indptr, const int64_t[:] indices,
                           const double[:] values, Py_ssize_t row, int64_t key) nogil:
    cdef Py_ssize_t lo = indptr[row], hi = indptr[row + 1], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[row + 1] and indices[lo] == key:
        return values[lo]
    return 0.0


def hellinger_condensed(const int64_t[:] indptr, const int64_t[:] indices, const double[:] roots):
    """Pairwise Hellinger similarity from square-rooted probabilities."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t a, b, i, j, ea, eb, k = 0
    cdef double s, d, hs
    out = np.zeros(n * (n - 1) // 2 if n > 1 else 0, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for a in range(n):
            ea = indptr[a + 1]
            for b in range(a + 1, n):
                eb = indptr[b + 1]
                i = indptr[a]
                j = indptr[b]
                s = 0.0
                while i < ea and j < eb:
                    if indices[i] == indices[j]:
                        d = roots[i] - roots[j]
                        s += d * d
                        i += 1
                        j += 1
                    elif indices[i] < indices[j]:
                        s += roots[i] * roots[i]
                        i += 1
                    else:
                        s += roots[j] * roots[j]
                        j += 1
                while i < ea:
                    s += roots[i] * roots[i]
                    i += 1
                while j < eb:
                    s += roots[j] * roots[j]
                    j += 1
                hs = 1.0 - sqrt(0.5 * s)
                if hs < 0.0:
                    hs = 0.0
                o[k] = hs
                k += 1
    return out


def top_mi_condensed(const int64_t[:] indptr, const int64_t[:] indices, const double[:] counts,
                     const int64_t[:] tindptr, const int64_t[:] tindices, const double[:] totals):
    """Pairwise mutual information over the union of each pair's top keys."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t a, b, i, j, ea, eb, k = 0
    cdef int64_t w
    cdef double s, ca, cb, p, pa, pb, ta, tb
    out = np.zeros(n * (n - 1) // 2 if n > 1 else 0, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for a in range(n):
            ea = tindptr[a + 1]
            ta = totals[a]
            for b in range(a + 1, n):
                eb = tindptr[b + 1]
                tb = totals[b]
                i = tindptr[a]
                j = tindptr[b]
                s = 0.0
                while i < ea or j < eb:
                    if j >= eb or (i < ea and tindices[i] < tindices[j]):
                        w = tindices[i]
                        i += 1
                    elif i >= ea or tindices[j] < tindices[i]:
                        w = tindices[j]
                        j += 1
                    else:
                        w = tindices[i]
                        i += 1
                        j += 1
                    ca = _lookup(indptr, indices, counts, a, w)
                    if ca <= 0.0:
                        continue
                    cb = _lookup(indptr, indices, counts, b, w)
                    if cb <= 0.0:
                        continue
                    p = (ca + cb) / (ta + tb)
                    pa = ca / ta
                    pb = cb / tb
                    s += p * log(p / (pa * pb))
                o[k] = s
                k += 1
    return out
