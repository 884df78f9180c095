"""Pure-Python/numpy twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same CSR layout, same condensed output order.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import sparse


def hellinger_condensed(indptr, indices, roots):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    roots = np.asarray(roots, dtype=np.float64)
    n = len(indptr) - 1
    if n < 2:
        return np.zeros(0)
    width = int(indices.max()) + 1 if len(indices) else 1
    mat = sparse.csr_matrix((roots, indices, indptr), shape=(n, width))
    squares = mat.multiply(mat).tocsr()
    out = []
    for a in range(n - 1):
        lo, hi = indptr[a], indptr[a + 1]
        cols, ra = indices[lo:hi], roots[lo:hi]
        rest = mat[a + 1:]
        # keys of row a: direct squared differences (zero where b lacks the key)
        own = ((ra[None, :] - rest[:, cols].toarray()) ** 2).sum(axis=1)
        # keys only in row b
        outside = np.ones(width)
        outside[cols] = 0.0
        other = squares[a + 1:] @ outside
        out.append(own + other)
    s = np.concatenate(out)
    return np.clip(1.0 - np.sqrt(0.5 * s), 0.0, 1.0)


def top_mi_condensed(indptr, indices, counts, tindptr, tindices, totals):
    indptr = np.asarray(indptr, dtype=np.int64)
    tindptr = np.asarray(tindptr, dtype=np.int64)
    n = len(indptr) - 1
    if n < 2:
        return np.zeros(0)
    rows = [dict(zip(indices[indptr[r]:indptr[r + 1]].tolist(), counts[indptr[r]:indptr[r + 1]].tolist()))
            for r in range(n)]
    tops = [set(tindices[tindptr[r]:tindptr[r + 1]].tolist()) for r in range(n)]
    width = int(max(np.max(indices, initial=0), np.max(tindices, initial=0))) + 1
    top_m = sparse.csr_matrix((np.ones(len(tindices)), tindices, tindptr), shape=(n, width))
    has_m = sparse.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, width))
    touch = top_m @ has_m.T
    touch = (touch + touch.T).tocoo()
    out = np.zeros(n * (n - 1) // 2)
    for a, b in zip(touch.row.tolist(), touch.col.tolist()):
        if a >= b:
            continue
        ra, rb, ta, tb = rows[a], rows[b], totals[a], totals[b]
        s = 0.0
        for w in sorted(tops[a] | tops[b]):
            ca = ra.get(w, 0.0)
            cb = rb.get(w, 0.0)
            if ca <= 0.0 or cb <= 0.0:
                continue
            p = (ca + cb) / (ta + tb)
            s += p * math.log(p / ((ca / ta) * (cb / tb)))
        out[a * n - a * (a + 1) // 2 + (b - a - 1)] = s
    return out
