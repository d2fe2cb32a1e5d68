import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from equidep.copula_core import (
    EmpiricalCopula,
    PseudoSample,
    Sample,
    empirical_copula_eval,
    pseudo_observations,
)
from equidep.errors import InvalidInputError
from oracles import empirical_copula_brute


def test_pseudo_observations_rank_over_n_plus_one():
    ps = pseudo_observations(Sample([3.2, 1.1, 5.0], [10, 20, 30]))
    np.testing.assert_allclose(ps.us, [0.50, 0.25, 0.75])
    np.testing.assert_allclose(ps.vs, [0.25, 0.50, 0.75])


def test_ties_get_average_ranks():
    ps = pseudo_observations(Sample([1, 1, 2], [1, 2, 3]))
    np.testing.assert_allclose(ps.us, [0.375, 0.375, 0.75])


def test_sorted_distinct_input_is_identity_ordering():
    ps = pseudo_observations(Sample([1, 2, 3, 4], [4, 3, 2, 1]))
    np.testing.assert_allclose(ps.us, [0.2, 0.4, 0.6, 0.8])


@pytest.mark.parametrize(
    "xs, ys",
    [([1.0], [2.0]), ([], []), ([1.0, 2.0], [1.0]), ([1.0, np.nan], [1.0, 2.0])],
)
def test_sample_rejects_invalid(xs, ys):
    with pytest.raises(InvalidInputError):
        Sample(xs, ys)


def test_sample_is_read_only():
    s = Sample([1.0, 2.0], [3.0, 4.0])
    with pytest.raises(ValueError):
        s.xs[0] = 5.0


def test_pseudo_sample_must_be_interior():
    with pytest.raises(InvalidInputError):
        PseudoSample([0.0, 0.5], [0.5, 0.5])
    with pytest.raises(InvalidInputError):
        PseudoSample([0.5, 1.0], [0.5, 0.5])


def test_empirical_copula_corners():
    rng = np.random.default_rng(3)
    ec = EmpiricalCopula(pseudo_observations(Sample(rng.random(30), rng.random(30))))
    assert empirical_copula_eval(ec, 1, 1) == 1.0
    assert empirical_copula_eval(ec, 0, 0) == 0.0


def test_empirical_copula_two_points():
    ec = EmpiricalCopula(PseudoSample([1 / 3, 2 / 3], [1 / 3, 2 / 3]))
    assert empirical_copula_eval(ec, 0.5, 0.5) == 0.5


@pytest.mark.parametrize("u, v", [(-0.1, 0.5), (0.5, 1.01), (2, 2)])
def test_empirical_copula_rejects_outside_unit_square(u, v):
    ec = EmpiricalCopula(PseudoSample([0.5], [0.5]))
    with pytest.raises(InvalidInputError):
        empirical_copula_eval(ec, u, v)


def test_lattice_and_point_evaluations_match_direct_count():
    rng = np.random.default_rng(11)
    x = np.round(rng.random(40), 1)  # forces ties
    ps = pseudo_observations(Sample(x, rng.random(40)))
    ec = EmpiricalCopula(ps)
    edges = np.linspace(0, 1, 13)
    lat = ec.on_lattice(edges, edges)
    for i, u in enumerate(edges):
        for j, v in enumerate(edges):
            assert lat[i, j] == pytest.approx(empirical_copula_brute(ps.us, ps.vs, u, v))
    pts = ec.at_points(chunk=7)
    for k in range(ps.n):
        assert pts[k] == pytest.approx(empirical_copula_brute(ps.us, ps.vs, ps.us[k], ps.vs[k]))


# integer-valued floats keep both transforms strictly increasing in float64
finite = st.integers(-1000, 1000).map(float)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.integers(2, 40), elements=finite), st.data())
def test_increasing_transform_leaves_pseudo_observations_unchanged(xs, data):
    ys = data.draw(arrays(float, xs.size, elements=finite))
    base = pseudo_observations(Sample(xs, ys))
    moved = pseudo_observations(Sample(np.exp(xs / 100.0) + 3.0, ys**3 + ys))
    assert np.array_equal(base.us, moved.us)
    assert np.array_equal(base.vs, moved.vs)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_tie_free_ranks_are_the_full_grid(n, seed):
    rng = np.random.default_rng(seed)
    ps = pseudo_observations(Sample(rng.permutation(n) * 1.5, rng.random(n)))
    np.testing.assert_array_equal(np.sort(ps.us), np.arange(1, n + 1) / (n + 1.0))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.lists(st.floats(0, 1), min_size=4, max_size=4))
def test_empirical_copula_is_monotone(n, seed, pts):
    rng = np.random.default_rng(seed)
    ec = EmpiricalCopula(pseudo_observations(Sample(rng.random(n), rng.random(n))))
    u1, u2 = sorted(pts[:2])
    v1, v2 = sorted(pts[2:])
    assert ec(u1, v1) <= ec(u2, v1) <= ec(u2, v2)
    assert ec(u1, v1) <= ec(u1, v2) <= ec(u2, v2)
