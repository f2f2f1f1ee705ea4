import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from cocyclelab import BudgetError, Word, WordSource, concat, enumerate_words, sample_word, shift
from cocyclelab.words import word_array


def test_enumerate_small_case():
    words = enumerate_words(2, 2)
    assert [str(w) for w in words] == ["11", "12", "21", "22"]


def test_enumerate_empty_word():
    words = enumerate_words(3, 0)
    assert len(words) == 1 and len(words[0]) == 0


def test_enumerate_count_3_10():
    # oracle: count N**n by direct product
    assert len(enumerate_words(3, 10)) == 3**10 == 59049


def test_enumerate_budget():
    with pytest.raises(BudgetError):
        enumerate_words(2, 10, budget=1000)
    with pytest.raises(BudgetError):
        word_array(3, 30)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
@pytest.mark.parametrize("n", range(0, 9))
def test_enumerate_distinct_and_sorted(N, n):
    if N**n > 70000:
        pytest.skip("large")
    words = [w.symbols for w in enumerate_words(N, n)]
    assert len(words) == N**n == len(set(words))
    assert words == sorted(words)
    assert word_array(N, n).tolist() == [list(w) for w in words]


def test_word_rejects_bad_symbols():
    with pytest.raises(ValueError):
        Word((0, 1), 2)
    with pytest.raises(ValueError):
        Word((3,), 2)


def test_serialization_roundtrip():
    assert str(Word((3, 1, 2), 3)) == "312"
    w = Word((10, 1, 12), 12)
    assert str(w) == "10.1.12"
    assert Word.parse(str(w), 12) == w
    assert Word.parse("312", 3) == Word((3, 1, 2), 3)


@given(st.integers(1, 4), st.lists(st.integers(1, 4), max_size=6), st.lists(st.integers(1, 4), max_size=6))
def test_concat_length_and_prefix(N, u, v):
    u = Word([min(s, N) for s in u], N)
    v = Word([min(s, N) for s in v], N)
    uv = concat(u, v)
    assert len(uv) == len(u) + len(v)
    assert uv[: len(u)] == u
    assert concat(Word((), N), u) == u == concat(u, Word((), N))


def test_concat_exhaustive_small():
    for u in enumerate_words(2, 3):
        for v in enumerate_words(2, 2):
            uv = u + v
            assert len(uv) == 5 and uv.symbols[:3] == u.symbols and uv.symbols[3:] == v.symbols


def test_sample_single_letter():
    rng = np.random.default_rng(123)
    assert str(sample_word(1, 5, rng)) == "11111"


def test_sample_deterministic_with_reset_stream():
    a = sample_word(4, 3, np.random.default_rng(99))
    b = sample_word(4, 3, np.random.default_rng(99))
    assert a == b


def test_sample_symbol_frequency_band():
    rng = np.random.default_rng(2024)
    draws = np.array([sample_word(2, 12, rng).symbols for _ in range(100_000)])
    freq = np.mean(draws == 1)
    assert 0.494 <= freq <= 0.506


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sample_chi_square_uniform(n):
    rng = np.random.default_rng(n)
    draws = 20_000
    counts = {}
    for _ in range(draws):
        w = sample_word(2, n, rng).symbols
        counts[w] = counts.get(w, 0) + 1
    observed = np.array([counts.get(w.symbols, 0) for w in enumerate_words(2, n)])
    _, pval = stats.chisquare(observed)
    assert pval > 1e-3


def test_shift_periodic():
    src = shift(WordSource.periodic(Word((1, 2), 2)), 1)
    assert [src.symbol(m) for m in range(1, 7)] == [2, 1, 2, 1, 2, 1]


def test_shift_zero_is_identity():
    src = WordSource.explicit(Word.parse("3121", 3))
    assert shift(src, 0) == src
    assert [shift(src, 0).symbol(m) for m in range(1, 5)] == [3, 1, 2, 1]


def test_explicit_source_end():
    src = WordSource.explicit(Word.parse("12", 2))
    with pytest.raises(IndexError):
        src.symbol(3)


@given(st.integers(0, 2**32), st.integers(0, 8), st.integers(0, 8))
def test_shift_composes(seed, a, b):
    w = WordSource.random(3, seed)
    lhs = shift(shift(w, a), b)
    rhs = shift(w, a + b)
    assert [lhs.symbol(m) for m in range(1, 30)] == [rhs.symbol(m) for m in range(1, 30)]
    assert [lhs.symbol(m) for m in range(1, 30)] == [w.symbol(m + a + b) for m in range(1, 30)]


def test_random_source_block_boundaries():
    src = WordSource.random(5, 11)
    direct = [src.symbol(m) for m in range(4000, 4200)]
    assert src.symbols(4000, 4200).tolist() == direct
    assert set(direct) <= {1, 2, 3, 4, 5}
    assert WordSource.random(5, 11).prefix(300) == src.prefix(300)
