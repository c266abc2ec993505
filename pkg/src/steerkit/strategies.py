"""Enumeration of deterministic response strategies.

A strategy assigns one outcome to each setting; the full set for m
settings and o outcomes has o^m elements.  Enumeration order is
lexicographic in the tuple (a_0, ..., a_{m-1}), so index k encodes the
base-o digits of k with setting 0 as the most significant digit.  All
enumeration-based routines (local and steering bounds, LHS programs,
brute-force game values) share this order, which makes reported
maximizers and tie-breaks deterministic.
"""

from __future__ import annotations

import numpy as np

__all__ = ["strategy_count", "all_strategies", "iter_strategies", "indicator"]


def strategy_count(settings: int, outcomes: int) -> int:
    if settings < 1 or outcomes < 1:
        raise ValueError("need at least one setting and one outcome")
    return outcomes**settings


def _block(start: int, stop: int, settings: int, outcomes: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), settings), dtype=np.int64)
    for x in range(settings - 1, -1, -1):
        out[:, x] = idx % outcomes
        idx = idx // outcomes
    return out


def all_strategies(settings: int, outcomes: int, cap: int = 1 << 20) -> np.ndarray:
    """All strategies as an (o^m, m) array in lexicographic order."""
    n = strategy_count(settings, outcomes)
    if n > cap:
        raise ValueError(f"{n} strategies exceed the cap {cap}")
    return _block(0, n, settings, outcomes)


def iter_strategies(settings: int, outcomes: int, chunk: int = 4096):
    """Yield lexicographic (k, m) strategy blocks of at most `chunk` rows."""
    n = strategy_count(settings, outcomes)
    for start in range(0, n, chunk):
        yield _block(start, min(start + chunk, n), settings, outcomes)


def indicator(strategies: np.ndarray, outcomes: int) -> np.ndarray:
    """One-hot table D[k, x, a] = 1 if strategy k answers a on setting x."""
    k, m = strategies.shape
    out = np.zeros((k, m, outcomes))
    out[np.arange(k)[:, None], np.arange(m)[None, :], strategies] = 1.0
    return out
