import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimodet.constellation import (SymbolVector, make_alphabet,
                                   random_symbol_vector, se_children,
                                   slice_index, slice_indices)

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
sizes = st.sampled_from([4, 16, 64, 256])


def linear_scan(value, levels):
    return int(np.argmin(np.abs(value - levels)))


def test_qpsk_levels():
    a = make_alphabet(4)
    assert a.q == 2
    np.testing.assert_allclose(a.levels, np.array([-1, 1]) / math.sqrt(2))


def test_16qam_levels():
    a = make_alphabet(16)
    assert a.q == 4
    assert a.scale == pytest.approx(1 / math.sqrt(10), rel=1e-15)
    np.testing.assert_allclose(a.levels,
                               np.array([-3, -1, 1, 3]) / math.sqrt(10))


def test_64qam_scale_from_unit_energy():
    # Solve 2 * mean(scale * odd)^2 = 1 over the odd grid.
    odd = np.arange(-7, 8, 2)
    scale = 1 / math.sqrt(2 * np.mean(odd ** 2))
    a = make_alphabet(64)
    assert a.q == 8
    assert scale == pytest.approx(1 / math.sqrt(42))
    np.testing.assert_allclose(a.levels, odd * scale, rtol=1e-14)


@pytest.mark.parametrize('c', [4, 16, 64, 256, 1024])
def test_unit_average_symbol_energy(c):
    a = make_alphabet(c)
    points = a.levels[:, None] + 1j * a.levels[None, :]
    assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize('c', [0, 1, 2, 8, 32, 12, 15.5, -16])
def test_bad_constellation_size(c):
    with pytest.raises(ValueError):
        make_alphabet(c)


def test_slice_fixed_points():
    a = make_alphabet(16)
    for k, lev in enumerate(a.levels):
        assert slice_index(lev, a) == k


def test_slice_saturates():
    a = make_alphabet(16)
    assert slice_index(1000.0, a) == 3
    assert slice_index(-1000.0, a) == 0


def test_slice_midpoint_goes_low():
    a = make_alphabet(16)
    assert slice_index(0.0, a) == 1
    for k, m in enumerate(a.midpoints):
        assert slice_index(m, a) == k


def test_slice_matches_linear_scan():
    rng = np.random.default_rng(11)
    for c in (4, 16, 64):
        a = make_alphabet(c)
        v = rng.uniform(-2, 2, size=100_000)
        got = slice_indices(v, a)
        want = np.argmin(np.abs(v[:, None] - a.levels[None, :]), axis=1)
        np.testing.assert_array_equal(got, want)


def test_se_children_examples():
    a = make_alphabet(16)
    assert se_children(a.levels[1], a)[0] == 1
    assert se_children(a.levels[0] - 5.0, a) == [0, 1, 2, 3]
    assert se_children(a.levels[3] + 5.0, a) == [3, 2, 1, 0]


def test_se_children_matches_sort_oracle():
    rng = np.random.default_rng(12)
    for c in (4, 16, 64):
        a = make_alphabet(c)
        for center in rng.uniform(-1.5, 1.5, size=10_000 // 3):
            want = sorted(range(a.q),
                          key=lambda k: (abs(center - a.levels[k]), k))
            assert se_children(center, a) == want


@given(finite, sizes)
def test_slice_is_first_se_child(v, c):
    a = make_alphabet(c)
    order = se_children(v, a)
    assert order[0] == slice_index(v, a)
    assert sorted(order) == list(range(a.q))


@given(finite, sizes)
def test_slice_is_nearest(v, c):
    a = make_alphabet(c)
    k = slice_index(v, a)
    assert np.all(abs(v - a.levels[k]) <= np.abs(v - a.levels))


def test_random_symbols_reproducible():
    a = make_alphabet(4)
    s1 = random_symbol_vector(4, a, np.random.default_rng(5))
    s2 = random_symbol_vector(4, a, np.random.default_rng(5))
    np.testing.assert_array_equal(s1.indices, s2.indices)
    np.testing.assert_array_equal(s1.values, a.levels[s1.indices])


def test_random_symbols_uniform():
    a = make_alphabet(16)
    s = random_symbol_vector(100_000, a, np.random.default_rng(6))
    counts = np.bincount(s.indices, minlength=4)
    n, p = 100_000, 0.25
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 5 * sigma)


def test_random_symbols_rejects_empty():
    with pytest.raises(ValueError):
        random_symbol_vector(0, make_alphabet(4), np.random.default_rng(0))


def test_symbol_vector_validation_and_complex():
    a = make_alphabet(16)
    s = SymbolVector.from_indices([0, 3, 1, 2], a)
    np.testing.assert_allclose(
        s.to_complex(), a.levels[[0, 3]] + 1j * a.levels[[1, 2]])
    with pytest.raises(ValueError):
        SymbolVector.from_indices([0, 4], a)
