"""Calkin-Wilf tree, Stern diatomic sequence, Newman's enumeration and Stern-Brocot levels.

Generation ``n`` holds ``2^(n-1)`` rationals in breadth-first order; the
children of ``a/b`` are ``a/(a+b)`` (left) and ``(a+b)/b`` (right). Bulk
work runs on int64 numpy arrays; the largest entry of generation ``n`` is a
Fibonacci number, far inside int64 for every guarded ``n``.
"""
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.tree.models import TreeGeneration
from src.utils.constants import MAX_GENERATION, MAX_EMPIRICAL_GENERATION
from src.utils.exceptions import SizeLimitError, DomainError
from src.utils.logger import get_logger

logger = get_logger("tree.calkin_wilf")

ChunkCallback = Callable[[np.ndarray, np.ndarray], None]


def _expand(numerators: np.ndarray, denominators: np.ndarray, depth: int) -> Tuple[np.ndarray, np.ndarray]:
    a, b = numerators, denominators
    for _ in range(depth):
        total = a + b
        a, b = np.stack([a, total], axis=1).ravel(), np.stack([total, b], axis=1).ravel()
    return a, b


def _root():
    return np.array([1], dtype=np.int64), np.array([1], dtype=np.int64)


def _check_index(n: int):
    if n < 1:
        raise DomainError(f"generation index must be >= 1, got {n}")


def generation_arrays(n: int) -> Tuple[np.ndarray, np.ndarray]:
    _check_index(n)
    if n > MAX_EMPIRICAL_GENERATION:
        raise SizeLimitError(f"generation_arrays is limited to n <= {MAX_EMPIRICAL_GENERATION}; use walk()",
                             limit=MAX_EMPIRICAL_GENERATION)
    return _expand(*_root(), n - 1)


def generation(n: int) -> TreeGeneration:
    _check_index(n)
    if n > MAX_GENERATION:
        raise SizeLimitError(f"generation is limited to n <= {MAX_GENERATION}; use walk()",
                             limit=MAX_GENERATION)
    a, b = _expand(*_root(), n - 1)
    members = tuple(Fraction(int(p), int(q)) for p, q in zip(a, b))
    logger.debug(f"Built generation {n} with {len(members)} members")
    return TreeGeneration(n=n, members=members)


def _level_nodes(level: int) -> Iterator[Tuple[int, int]]:
    if level <= MAX_EMPIRICAL_GENERATION:
        a, b = generation_arrays(level)
        for p, q in zip(a, b):
            yield int(p), int(q)
        return
    for k in range(2 ** (level - 1), 2 ** level):
        yield stern(k), stern(k + 1)


def walk(n: int, callback: ChunkCallback, chunk_depth: int = 16, progress: bool = False):
    """Stream generation ``n`` to ``callback`` as contiguous breadth-first chunks.

    Each chunk is the full set of depth-``chunk_depth`` descendants of one node
    of generation ``n - chunk_depth``, so concatenating the chunks in call order
    reproduces the generation.
    """
    _check_index(n)
    if n <= chunk_depth + 1:
        callback(*_expand(*_root(), n - 1))
        return

    level = n - chunk_depth
    nodes = _level_nodes(level)
    if progress:
        nodes = tqdm(nodes, total=2 ** (level - 1), desc=f"generation {n}")
    chunks = 0
    for p, q in nodes:
        callback(*_expand(np.array([p], dtype=np.int64), np.array([q], dtype=np.int64), chunk_depth))
        chunks += 1
    logger.info(f"Walked generation {n} in {chunks} chunks of depth {chunk_depth}")


def stern(n: int) -> int:
    if n < 0:
        raise DomainError(f"stern is defined for n >= 0, got {n}")
    a, b = 1, 0
    while n:
        if n & 1:
            b += a
        else:
            a += b
        n >>= 1
    return b


def newman_next(x: Fraction) -> Fraction:
    x = Fraction(x)
    if x <= 0:
        raise DomainError(f"newman_next needs x > 0, got {x}")
    floor = x.numerator // x.denominator
    return 1 / (2 * floor + 1 - x)


def newman_sequence(count: int, start: Fraction = Fraction(1)) -> Iterator[Fraction]:
    x = Fraction(start)
    for _ in range(count):
        yield x
        x = newman_next(x)


def stern_brocot_level(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """The ``2^(n-1)`` mediants of depth ``n`` in [0, 1], left to right."""
    _check_index(n)
    if n > MAX_EMPIRICAL_GENERATION:
        raise SizeLimitError(f"stern_brocot_level is limited to n <= {MAX_EMPIRICAL_GENERATION}",
                             limit=MAX_EMPIRICAL_GENERATION)
    p = np.array([0, 1], dtype=np.int64)
    q = np.array([1, 1], dtype=np.int64)
    for level in range(1, n + 1):
        mediant_p = p[:-1] + p[1:]
        mediant_q = q[:-1] + q[1:]
        if level == n:
            return mediant_p, mediant_q
        merged_p = np.empty(2 * len(p) - 1, dtype=np.int64)
        merged_q = np.empty(2 * len(q) - 1, dtype=np.int64)
        merged_p[0::2], merged_p[1::2] = p, mediant_p
        merged_q[0::2], merged_q[1::2] = q, mediant_q
        p, q = merged_p, merged_q


def export_generation_csv(n: int, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    a, b = generation_arrays(n)
    pd.DataFrame({"index": np.arange(len(a)), "numerator": a, "denominator": b}).to_csv(path, index=False)
    logger.info(f"Exported generation {n} ({len(a)} rows) to {path}")
    return path
