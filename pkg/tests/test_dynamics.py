import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cocyclelab import DomainError, MapFamily, Word, WordSource, apply_map, apply_word, concat, orbit
from cocyclelab.dynamics import apply_map_array, mod1


def test_apply_map_examples():
    fam = MapFamily.expanding_affine(2)
    assert apply_map(fam, 1, 0.0) == 0.0
    assert apply_map(fam, 2, 0.4) == pytest.approx(0.2, abs=1e-15)
    rot = MapFamily.rotation([0.25])
    assert apply_map(rot, 1, 0.9) == pytest.approx(0.15, abs=1e-15)


def test_domain_errors():
    fam = MapFamily.expanding_affine(2)
    for x in (-0.1, 1.0, 1.5):
        with pytest.raises(DomainError):
            apply_map(fam, 1, x)
    with pytest.raises(DomainError):
        apply_map(fam, 3, 0.5)


def test_mod1_clamps_to_half_open_interval():
    assert mod1(np.nextafter(1.0, 0.0) + 0.0) < 1.0
    y = -1e-20
    assert 0.0 <= mod1(y) < 1.0
    arr = mod1(np.array([-1e-20, 2.5, 3.0]))
    assert np.all((arr >= 0) & (arr < 1))


def test_expanding_slopes():
    fam = MapFamily.expanding_affine(3)
    assert fam.degrees == (2, 3, 4)
    assert apply_map(fam, 3, 0.1) == pytest.approx(0.4)


def test_apply_word_examples():
    fam = MapFamily.expanding_affine(2)
    assert apply_word(fam, Word((), 2), 0.37) == 0.37
    assert apply_word(fam, Word((1, 2), 2), 0.1) == pytest.approx(0.6, abs=1e-15)


words2 = st.lists(st.integers(1, 2), max_size=12)


@given(words2, words2, st.floats(0.0, 1.0, exclude_max=True))
def test_apply_word_composition(u, v, x):
    fam = MapFamily.expanding_affine(2)
    u, v = Word(u, 2), Word(v, 2)
    assert apply_word(fam, concat(u, v), x) == apply_word(fam, v, apply_word(fam, u, x))


def test_orbit_examples():
    fam = MapFamily.expanding_affine(2)
    src = WordSource.periodic(Word((1,), 2))
    assert orbit(fam, src, 0.42, 0).states == (0.42,)
    seg = orbit(fam, src, 1 / 3, 4)
    np.testing.assert_allclose(seg.states, [1 / 3, 2 / 3, 1 / 3, 2 / 3, 1 / 3], atol=1e-14)


def test_orbit_last_state_matches_apply_word():
    fam = MapFamily.expanding_affine(3)
    rng = np.random.default_rng(5)
    for i in range(100):
        src = WordSource.random(3, i)
        x = float(rng.random())
        n = int(rng.integers(0, 40))
        seg = orbit(fam, src, x, n)
        assert len(seg) == n + 1
        assert seg.states[-1] == apply_word(fam, src.prefix(n), x)


def test_orbit_recomputation_bit_exact():
    fam = MapFamily.piecewise_affine([
        {"breakpoints": [0, "1/3", 1], "slopes": [3, 1.5], "offsets": [0, -0.5]},
        {"breakpoints": [0, 1], "slopes": [2], "offsets": [0.25]},
    ])
    seg = orbit(fam, WordSource.random(2, 3), 0.123, 200)
    for k, j in enumerate(seg.symbols):
        assert apply_map(fam, j, seg.states[k]) == seg.states[k + 1]


@pytest.mark.parametrize("j", [1, 2, 3])
def test_expanding_maps_preserve_lebesgue(j):
    # one-sample Kolmogorov-Smirnov distance against the uniform CDF
    fam = MapFamily.expanding_affine(3)
    xs = np.random.default_rng(j).random(1_000_000)
    ys = np.sort(apply_map_array(fam, j, xs))
    n = len(ys)
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    ks = max(np.max(ecdf_hi - ys), np.max(ys - ecdf_lo))
    assert ks < 0.005


def test_piecewise_affine_rational_breakpoints_and_degree():
    fam = MapFamily.piecewise_affine([{"breakpoints": ["0", "1/2", "1"], "slopes": [2, 2], "offsets": [0, -1]}])
    assert fam.map(1).breakpoints == (0.0, 0.5, 1.0)
    assert fam.degrees == (2,)
    assert apply_map(fam, 1, 0.75) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        MapFamily.piecewise_affine([{"breakpoints": [0, 0.7, 0.5, 1], "slopes": [1, 1, 1]}])
