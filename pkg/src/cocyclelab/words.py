"""Finite words over {1..N}, word sources standing in for infinite words, and
exhaustive / random enumeration of word spaces.

Symbols are 1-based and stored first-letter-first, so ``Word((1, 2), 2)``
means "apply T_1, then T_2".
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError

DEFAULT_ENUM_BUDGET = 2**26
BUDGET_ENV = "COCYCLELAB_ENUM_BUDGET"

# random sources generate symbols in blocks; a block is a pure function of (seed, index)
_BLOCK = 4096


def enumeration_budget() -> int:
    """Max number of words an exhaustive enumeration may produce."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_ENUM_BUDGET
    return int(raw)


def check_budget(N: int, n: int, budget: int | None = None) -> int:
    """Return N**n, or raise BudgetError if it exceeds the budget."""
    budget = enumeration_budget() if budget is None else budget
    count = N**n
    if count > budget:
        raise BudgetError(f"N^n = {N}^{n} = {count} words exceeds enumeration budget {budget}")
    return count


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        for s in self.symbols:
            if not 1 <= s <= self.alphabet_size:
                raise ValueError(f"symbol {s} outside 1..{self.alphabet_size}")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.symbols[item], self.alphabet_size)
        return self.symbols[item]

    def __add__(self, other: Word) -> Word:
        return concat(self, other)

    def __str__(self):
        sep = "" if self.alphabet_size <= 9 else "."
        return sep.join(str(s) for s in self.symbols)

    @classmethod
    def parse(cls, text: str, alphabet_size: int) -> Word:
        text = text.strip()
        if not text:
            return cls((), alphabet_size)
        if alphabet_size > 9 or "." in text:
            parts = text.split(".")
        else:
            parts = list(text)
        return cls(tuple(int(p) for p in parts), alphabet_size)


def concat(u: Word, v: Word) -> Word:
    if u.alphabet_size != v.alphabet_size:
        raise ValueError("cannot concatenate words over different alphabets")
    return Word(u.symbols + v.symbols, u.alphabet_size)


def word_array(N: int, n: int, budget: int | None = None) -> np.ndarray:
    """All N**n words as an (N**n, n) int array, rows in lexicographic order."""
    count = check_budget(N, n, budget)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = idx % N + 1
        idx //= N
    return out


def enumerate_words(N: int, n: int, budget: int | None = None) -> list[Word]:
    if N < 1 or n < 0:
        raise ValueError("need N >= 1 and n >= 0")
    check_budget(N, n, budget)
    return [Word(w, N) for w in itertools.product(range(1, N + 1), repeat=n)]


def sample_word(N: int, n: int, rng: np.random.Generator) -> Word:
    """Draw a word uniformly from the N**n words of length n."""
    if N < 1 or n < 1:
        raise ValueError("need N >= 1 and n >= 1")
    return Word(tuple(rng.integers(1, N + 1, size=n).tolist()), N)


def sample_words(N: int, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform words as a (count, n) int array."""
    return rng.integers(1, N + 1, size=(count, n))


@functools.lru_cache(maxsize=256)
def _random_block(seed: int, N: int, block: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    out = rng.integers(1, N + 1, size=_BLOCK)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class WordSource:
    """A rule producing the symbol of an (infinite) word at any index m >= 1.

    kind is one of "explicit" (a finite prefix; reading past it is an error),
    "periodic" (the payload word repeated forever) or "random" (a seeded
    uniform stream). ``offset`` implements the shift.
    """

    kind: str
    alphabet_size: int
    word: tuple[int, ...] = ()
    seed: int = 0
    offset: int = 0

    def __post_init__(self):
        if self.kind not in ("explicit", "periodic", "random"):
            raise ValueError(f"unknown word source kind {self.kind!r}")
        Word(self.word, self.alphabet_size)  # validates symbols
        if self.kind == "periodic" and not self.word:
            raise ValueError("periodic source needs a non-empty word")
        if self.offset < 0:
            raise ValueError("offset must be >= 0")

    @classmethod
    def explicit(cls, word: Word) -> WordSource:
        return cls("explicit", word.alphabet_size, word=word.symbols)

    @classmethod
    def periodic(cls, word: Word) -> WordSource:
        return cls("periodic", word.alphabet_size, word=word.symbols)

    @classmethod
    def random(cls, N: int, seed: int) -> WordSource:
        return cls("random", N, seed=int(seed))

    def symbol(self, m: int) -> int:
        """Symbol at 1-based index m."""
        if m < 1:
            raise IndexError("word indices start at 1")
        i = m - 1 + self.offset
        if self.kind == "explicit":
            if i >= len(self.word):
                raise IndexError(f"explicit source has only {len(self.word)} symbols")
            return self.word[i]
        if self.kind == "periodic":
            return self.word[i % len(self.word)]
        return int(_random_block(self.seed, self.alphabet_size, i // _BLOCK)[i % _BLOCK])

    def symbols(self, start: int, stop: int) -> np.ndarray:
        """Symbols at indices start..stop-1 (1-based) as an int array."""
        if start < 1 or stop < start:
            raise IndexError("bad symbol range")
        lo, hi = start - 1 + self.offset, stop - 1 + self.offset
        if self.kind == "explicit":
            if hi > len(self.word):
                raise IndexError(f"explicit source has only {len(self.word)} symbols")
            return np.asarray(self.word[lo:hi], dtype=np.int64)
        if self.kind == "periodic":
            per = np.asarray(self.word, dtype=np.int64)
            return per[np.arange(lo, hi) % len(per)]
        if hi == lo:
            return np.zeros(0, dtype=np.int64)
        blocks = [
            _random_block(self.seed, self.alphabet_size, b)
            for b in range(lo // _BLOCK, (hi - 1) // _BLOCK + 1)
        ]
        flat = np.concatenate(blocks)
        base = (lo // _BLOCK) * _BLOCK
        return flat[lo - base : hi - base].astype(np.int64)

    def prefix(self, n: int) -> Word:
        return Word(tuple(self.symbols(1, n + 1).tolist()), self.alphabet_size)

    def tag(self) -> str:
        """Short label used in CSV rows."""
        if self.kind == "random":
            body = f"random:{self.seed}"
        else:
            body = f"{self.kind}:{Word(self.word, self.alphabet_size)}"
        return body if self.offset == 0 else f"{body}>>{self.offset}"


def shift(source: WordSource, k: int) -> WordSource:
    """sigma^k: drop the first k symbols."""
    if k < 0:
        raise ValueError("shift amount must be >= 0")
    return WordSource(
        source.kind, source.alphabet_size, word=source.word, seed=source.seed,
        offset=source.offset + k,
    )
