"""Hot combinatorial kernels with a compiled/pure backend selected at import.

The two kernels are the inner loop of code enumeration and list decoding:

- ``codeword_table(row_masks)``: expand the 2^k GF(2) row-span of ``k`` bitmask
  rows into a table indexed by message integer.
- ``hamming_scan(table, target, mask)``: popcount of ``(table ^ target) & mask``
  per entry (Hamming distances on the unmasked positions).

Both operate on codewords packed into single ``uint64`` words (word length
<= 64 bits). The Cython extension ``_fast`` is used when available; setting
the environment variable ``NOISYLAB_KERNELS=pure`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pure

BACKEND = "pure"

if os.environ.get("NOISYLAB_KERNELS", "").lower() != "pure":
    try:
        from . import _fast  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build-environment dependent
        _fast = None  # type: ignore[assignment]
else:
    _fast = None  # type: ignore[assignment]

_impl = _fast if BACKEND == "compiled" else _pure

codeword_table = _impl.codeword_table
hamming_scan = _impl.hamming_scan

__all__ = ["BACKEND", "codeword_table", "hamming_scan"]
