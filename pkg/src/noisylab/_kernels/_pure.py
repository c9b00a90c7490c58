"""Pure numpy implementations of the packed-bit kernels."""

from __future__ import annotations

import numpy as np


def codeword_table(row_masks: np.ndarray) -> np.ndarray:
    """All 2^k XOR combinations of ``k`` uint64 row bitmasks.

    Entry ``m`` is the XOR of the rows selected by the set bits of ``m``
    (bit ``i`` of the index selects row ``i``). Entry 0 is 0.
    """
    rows = np.asarray(row_masks, dtype=np.uint64)
    k = len(rows)
    if k > 24:
        raise ValueError(f"refusing to expand 2^{k} codewords (k > 24)")
    table = np.zeros(1 << k, dtype=np.uint64)
    size = 1
    for i in range(k):
        table[size : 2 * size] = table[:size] ^ rows[i]
        size *= 2
    return table


def hamming_scan(table: np.ndarray, target: int, mask: int) -> np.ndarray:
    """Per-entry popcount of ``(table ^ target) & mask``."""
    table = np.asarray(table, dtype=np.uint64)
    xored = (table ^ np.uint64(target)) & np.uint64(mask)
    return np.bitwise_count(xored).astype(np.int64)
