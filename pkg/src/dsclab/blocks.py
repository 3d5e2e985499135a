"""Conversions between integer block indexes and symbol sequences.

A block of n symbols from an alphabet of size a is indexed big-endian:
index = sum_k sym[k] * a**(n-1-k), so symbol 0 is the most significant
digit.  All tables in the package use this convention.
"""

import numpy as np


def index_to_symbols(idx, alphabet: int, n: int) -> np.ndarray:
    """Digit-expand block indexes; idx may be a scalar or an array."""
    idx = np.asarray(idx, dtype=np.int64)
    place = alphabet ** (n - 1 - np.arange(n, dtype=np.int64))
    return (idx[..., None] // place) % alphabet


def symbols_to_index(sym, alphabet: int):
    sym = np.asarray(sym, dtype=np.int64)
    n = sym.shape[-1]
    place = alphabet ** (n - 1 - np.arange(n, dtype=np.int64))
    out = (sym * place).sum(axis=-1)
    return int(out) if out.ndim == 0 else out


def all_blocks(alphabet: int, n: int) -> np.ndarray:
    """All a**n blocks as a (a**n, n) symbol array, in index order."""
    return index_to_symbols(np.arange(alphabet ** n), alphabet, n)
