"""Increasing index sequences Q(k, n) in lexicographic order.

Sequences are plain tuples of 1-based integers, e.g. ``(1, 3)``. Ranks are
1-based as well, so ``unrank(1, k, n) == (1, ..., k)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from ._validation import DomainError, check_k, check_n

__all__ = [
    "LexTable",
    "generate_sequences",
    "rank",
    "unrank",
    "signature",
    "complement",
    "validate_sequence",
]


@dataclass(frozen=True)
class LexTable:
    """All of Q(k, n), lexicographically sorted."""

    k: int
    n: int
    seqs: tuple
    _positions: dict = field(repr=False, compare=False)

    @property
    def r(self):
        return len(self.seqs)

    def __len__(self):
        return len(self.seqs)

    def __iter__(self):
        return iter(self.seqs)

    def __getitem__(self, i):
        return self.seqs[i]

    def index_of(self, seq):
        """0-based position of `seq` in the table."""
        try:
            return self._positions[tuple(seq)]
        except KeyError:
            raise DomainError(f"{seq!r} is not in Q({self.k},{self.n})") from None

    def zero_based(self):
        """``(r, k)`` integer array of 0-based indices, one row per sequence."""
        return np.array(self.seqs, dtype=np.intp).reshape(self.r, self.k) - 1


@lru_cache(maxsize=256)
def generate_sequences(k, n):
    """Return the table of all C(n, k) increasing k-sequences from {1..n}.

    >>> generate_sequences(2, 3).seqs
    ((1, 2), (1, 3), (2, 3))
    """
    n = check_n(n)
    k = check_k(k, n)
    seqs = tuple(combinations(range(1, n + 1), k))
    return LexTable(k, n, seqs, {s: i for i, s in enumerate(seqs)})


def validate_sequence(seq, n):
    """Check that `seq` is a valid element of Q(len(seq), n) and return it as a tuple."""
    n = check_n(n)
    seq = tuple(int(v) for v in seq)
    if not seq:
        raise DomainError("index sequence must be non-empty")
    if any(v < 1 or v > n for v in seq):
        raise DomainError(f"{seq!r} has entries outside 1..{n}")
    if any(a >= b for a, b in zip(seq, seq[1:])):
        raise DomainError(f"{seq!r} is not strictly increasing")
    return seq


def rank(seq, n):
    """1-based lexicographic rank of `seq` within Q(len(seq), n)."""
    seq = validate_sequence(seq, n)
    k = len(seq)
    pos = 1
    prev = 0
    for i, v in enumerate(seq, start=1):
        # count sequences that agree so far but take a smaller value here
        for w in range(prev + 1, v):
            pos += comb(n - w, k - i)
        prev = v
    return pos


def unrank(i, k, n):
    """Inverse of :func:`rank`."""
    n = check_n(n)
    k = check_k(k, n)
    total = comb(n, k)
    if isinstance(i, bool) or int(i) != i or not 1 <= i <= total:
        raise DomainError(f"rank {i!r} outside [1, {total}]")
    rem = int(i) - 1
    out = []
    v = 1
    for slot in range(1, k + 1):
        while True:
            block = comb(n - v, k - slot)
            if rem < block:
                break
            rem -= block
            v += 1
        out.append(v)
        v += 1
    return tuple(out)


def signature(seq):
    """``(-1) ** sum(seq)``."""
    return -1 if sum(seq) % 2 else 1


def complement(seq, n):
    """``{1..n} \\ seq`` in increasing order."""
    seq = validate_sequence(seq, n)
    if len(seq) == n:
        raise DomainError("the complement of the full sequence is empty")
    present = set(seq)
    return tuple(v for v in range(1, n + 1) if v not in present)
