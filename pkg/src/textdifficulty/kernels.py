"""Backend selection for the pairwise kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation.  Setting ``TEXTDIFFICULTY_PURE_PYTHON=1`` forces the
fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("TEXTDIFFICULTY_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

hellinger_condensed = _impl.hellinger_condensed
top_mi_condensed = _impl.top_mi_condensed


def available_backends() -> dict:
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found


def pack_rows(rows, key_index: dict):
    """CSR-pack a list of ``{key: value}`` dicts using ``key_index`` ids.

    Returns ``(indptr, indices, values)`` with indices sorted within rows.
    """
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    idx_parts, val_parts = [], []
    for r, row in enumerate(rows):
        ids = np.fromiter((key_index[k] for k in row), dtype=np.int64, count=len(row))
        vals = np.fromiter(row.values(), dtype=np.float64, count=len(row))
        order = np.argsort(ids, kind="stable")
        idx_parts.append(ids[order])
        val_parts.append(vals[order])
        indptr[r + 1] = indptr[r] + len(row)
    indices = np.concatenate(idx_parts) if idx_parts else np.zeros(0, dtype=np.int64)
    values = np.concatenate(val_parts) if val_parts else np.zeros(0)
    return indptr, indices, values


def condensed_index(i: int, j: int, n: int) -> int:
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)
