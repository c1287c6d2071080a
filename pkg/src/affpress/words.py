"""Finite words over the alphabet {1, ..., N} and deterministic enumeration helpers."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

from .errors import InputError


@dataclass(frozen=True)
class Word:
    """A non-empty finite sequence of symbols from {1, ..., N}.

    Words index matrix products: appending a symbol corresponds to multiplying
    by that symbol's matrix on the left, so the last symbol is the leftmost
    factor of the product.
    """

    symbols: tuple[int, ...]

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise InputError("word must be non-empty")
        for s in self.symbols:
            if not isinstance(s, int) or s < 1:
                raise InputError(f"word symbols must be integers >= 1, got {s!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.symbols + as_symbols(other))

    def repeat(self, m: int) -> "Word":
        if m < 1:
            raise InputError("repeat count must be >= 1")
        return Word(self.symbols * m)


def as_symbols(word, n_symbols: int | None = None) -> tuple[int, ...]:
    """Coerce a Word or raw int sequence to a validated symbol tuple.

    Symbols are 1-based; if ``n_symbols`` is given, every symbol must be <= it.
    """
    if isinstance(word, Word):
        syms = word.symbols
    else:
        try:
            syms = tuple(int(s) for s in word)
        except TypeError as exc:
            raise InputError(f"cannot interpret {word!r} as a word") from exc
    if len(syms) == 0:
        raise InputError("word must be non-empty")
    for s in syms:
        if s < 1 or (n_symbols is not None and s > n_symbols):
            raise InputError(
                f"word symbol {s} out of range 1..{n_symbols if n_symbols else '?'}"
            )
    return syms


def words_of_length(n_symbols: int, length: int) -> Iterator[tuple[int, ...]]:
    """All words of the given length in lexicographic order."""
    if length < 1:
        raise InputError("length must be >= 1")
    return product(range(1, n_symbols + 1), repeat=length)


def words_up_to_length(n_symbols: int, max_length: int) -> Iterator[tuple[int, ...]]:
    """All words of length 1..max_length, shortest first, lexicographic within a length."""
    for length in range(1, max_length + 1):
        yield from words_of_length(n_symbols, length)


def word_from_index(index: int, n_symbols: int, length: int) -> tuple[int, ...]:
    """Inverse of the lexicographic word indexing used by the enumerations.

    index = sum_j (w_j - 1) * N^(length - j), i.e. the first symbol is the most
    significant digit.
    """
    syms = []
    for _ in range(length):
        index, r = divmod(index, n_symbols)
        syms.append(r + 1)
    return tuple(reversed(syms))


def count_words(n_symbols: int, length: int) -> int:
    return n_symbols**length


def symbol_counts(word: Iterable[int], n_symbols: int) -> list[int]:
    """Occurrences of each symbol 1..N in the word."""
    counts = [0] * n_symbols
    for s in word:
        counts[s - 1] += 1
    return counts
