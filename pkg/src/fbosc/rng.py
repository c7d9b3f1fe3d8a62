"""Counter-based Gaussian noise streams.

Sample ``k`` of stream ``s`` under seed ``seed`` is a pure function of
``(seed, s, k)``: draws are made in fixed blocks from a Philox generator whose
key is ``(seed, s)`` and whose counter is set from the block index.  Any slice
of a stream can therefore be regenerated independently, so chunked or
parallel generation is bit-identical to a single pass.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: Samples per counter block.
BLOCK = 1 << 16


# small consecutive draws reuse the block they fall in
@lru_cache(maxsize=8)
def _block_normals(seed: int, stream: int, block: int, width: int) -> np.ndarray:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    # Philox4x64 consumes one counter step per four 64-bit outputs; spacing
    # blocks far apart keeps their counter ranges disjoint
    counter = np.array([0, block, 0, 0], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
    out = gen.standard_normal((BLOCK, width))
    out.flags.writeable = False
    return out


def standard_normals(seed: int, stream: int, start: int, stop: int, width: int = 1) -> np.ndarray:
    """Standard normals for sample indices ``start <= k < stop``, shape ``(stop - start, width)``."""
    if stop < start or start < 0:
        raise ValueError("need 0 <= start <= stop")
    out = np.empty((stop - start, width))
    b0, b1 = start // BLOCK, (stop - 1) // BLOCK if stop > start else start // BLOCK - 1
    pos = 0
    for b in range(b0, b1 + 1):
        blk = _block_normals(seed, stream, b, width)
        lo = max(start - b * BLOCK, 0)
        hi = min(stop - b * BLOCK, BLOCK)
        out[pos:pos + hi - lo] = blk[lo:hi]
        pos += hi - lo
    return out


def random_uniform(seed: int, stream: int) -> float:
    """A single uniform variate in ``[0, 1)`` tied to ``(seed, stream)``."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return float(np.random.Generator(np.random.Philox(key=key)).random())
