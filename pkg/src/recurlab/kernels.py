"""Triple-correlation kernels: compiled extension when available, numpy otherwise.

``BACKEND`` names the implementation picked at import; set
``RECURLAB_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_WORD = 64


def pack_words(mask: np.ndarray) -> np.ndarray:
    """Little-endian bit packing into ``uint64`` words (bit ``x`` of the set is bit ``x % 64`` of word ``x // 64``)."""
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    nw = -(-n // _WORD)
    padded = np.zeros(nw * _WORD, dtype=bool)
    padded[:n] = mask
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def shifted_tables(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Word arrays for the masked set and its 64 bit-offset cyclic copies."""
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    nw = -(-n // _WORD)
    # doubled string covers every rotation window, plus slack for the offset reads
    reps = 2 + -(-(2 * _WORD) // n)
    ext = pack_words(np.tile(mask, reps))
    need = 2 * nw + 2
    if len(ext) < need + 1:
        ext = np.concatenate([ext, np.zeros(need + 1 - len(ext), dtype=np.uint64)])
    base = ext[: need + 1]
    shifted = np.empty((_WORD, need), dtype=np.uint64)
    shifted[0] = base[:need]
    for r in range(1, _WORD):
        shifted[r] = (base[:need] >> np.uint64(r)) | (base[1 : need + 1] << np.uint64(_WORD - r))
    words = pack_words(mask)
    return words, shifted


def scan_counts_numpy(words: np.ndarray, shifted: np.ndarray, n: int, a: int, b: int, threads: int = 1) -> np.ndarray:
    nw = len(words)
    out = np.empty(n, dtype=np.int64)
    for d in range(n):
        s1 = (a * d) % n
        s2 = (b * d) % n
        q1, r1 = divmod(s1, _WORD)
        q2, r2 = divmod(s2, _WORD)
        joint = words & shifted[r1, q1 : q1 + nw] & shifted[r2, q2 : q2 + nw]
        out[d] = int(np.bitwise_count(joint).sum(dtype=np.int64))
    return out


def scan_counts_naive(mask: np.ndarray, a: int, b: int, ds=None) -> np.ndarray:
    """Reference: ``count(A & roll(A, -a d) & roll(A, -b d))`` for each requested ``d``."""
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    ds = np.arange(n) if ds is None else np.asarray(ds)
    return np.asarray([np.count_nonzero(mask & np.roll(mask, -(a * int(d)) % n) & np.roll(mask, -(b * int(d)) % n))
                       for d in ds], dtype=np.int64)


try:
    if os.environ.get("RECURLAB_PURE_PYTHON"):
        raise ImportError("pure-python mode requested")
    from ._scan import scan_counts as _compiled_scan
except ImportError:
    _compiled_scan = None

BACKEND = "compiled" if _compiled_scan is not None else "numpy"


def scan_counts(words, shifted, n, a, b, threads: int = 1, backend: str | None = None) -> np.ndarray:
    use = backend or BACKEND
    if use == "compiled":
        if _compiled_scan is None:
            raise RuntimeError("compiled kernel is not built")
        return _compiled_scan(words, shifted, int(n), int(a), int(b), int(threads))
    if use == "numpy":
        return scan_counts_numpy(words, shifted, n, a, b, threads)
    raise ValueError(f"unknown backend {use!r}")
