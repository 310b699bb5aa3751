import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyncoreset import _kernels
from dyncoreset.seeding import SeedingConfig, bicriteria, kmeanspp, kmeanspp_config, lloyd_step


def test_first_center_follows_weight():
    X = np.array([[0.0], [5.0]])
    w = np.array([1.0, 3.0])
    # running weight is [1, 4]; targets 0.8 and 1.2
    assert _kernels.seed_indices(X, w, 1, np.array([0.2])).tolist() == [0]
    assert _kernels.seed_indices(X, w, 1, np.array([0.3])).tolist() == [1]


def test_later_centers_follow_weighted_d2():
    X = np.array([[0.0], [1.0], [10.0]])
    w = np.array([1.0, 2.0, 1.0])
    # first pick x=0; then mass is w*d2 = [0, 2, 100]
    got = _kernels.seed_indices(X, w, 2, np.array([0.0, 0.015]))
    assert got.tolist() == [0, 1]
    got = _kernels.seed_indices(X, w, 2, np.array([0.0, 0.03]))
    assert got.tolist() == [0, 2]


def test_empirical_pair_frequencies():
    X = np.array([[0.0], [1.0], [3.0]])
    w = np.array([1.0, 2.0, 1.0])
    expect = np.zeros((3, 3))
    for i in range(3):
        d2 = w * (X[:, 0] - X[i, 0]) ** 2
        expect[i] = w[i] / w.sum() * d2 / d2.sum()
    rng = np.random.default_rng(0)
    trials = 6000
    seen = np.zeros((3, 3))
    for _ in range(trials):
        c = kmeanspp(X, w, 2, rng, lloyd_step=False)[:, 0]
        seen[[0.0, 1.0, 3.0].index(c[0]), [0.0, 1.0, 3.0].index(c[1])] += 1
    sd = np.sqrt(expect * (1 - expect) / trials)
    assert np.all(np.abs(seen / trials - expect) <= 4 * sd + 1e-12)


def test_stops_when_every_point_is_covered():
    X = np.array([[1.0, 1.0]] * 4 + [[2.0, 2.0]] * 3)
    C = kmeanspp(X, None, 5, 0, lloyd_step=False)
    assert len(C) == 2
    assert {tuple(c) for c in C} == {(1.0, 1.0), (2.0, 2.0)}


def test_consumes_exactly_k_prime_uniforms():
    X = np.zeros((3, 2))
    a = np.random.default_rng(9)
    kmeanspp(X, None, 6, a)
    b = np.random.default_rng(9)
    b.random(6)
    assert a.random() == b.random()


def naive_lloyd(C, X, w):
    out = C.copy()
    lab = np.argmin(((X[:, None, :] - C[None]) ** 2).sum(-1), axis=1)
    for j in range(len(C)):
        m = lab == j
        if w[m].sum() > 0:
            out[j] = (w[m, None] * X[m]).sum(0) / w[m].sum()
    return out


@given(st.integers(0, 10_000), st.integers(1, 40), st.integers(1, 6))
def test_lloyd_matches_naive(seed, n, m):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    w = rng.uniform(0.1, 3, size=n)
    C = rng.normal(size=(m, 2)) * 3
    np.testing.assert_allclose(lloyd_step(C, X, w), naive_lloyd(C, X, w), rtol=1e-12, atol=1e-12)


def test_empty_cluster_keeps_center():
    C = np.array([[0.0], [100.0]])
    out = lloyd_step(C, [[1.0], [2.0]])
    assert out.tolist() == [[1.5], [100.0]]


def test_deterministic_and_config():
    X = np.random.default_rng(1).normal(size=(300, 3))
    a = kmeanspp(X, None, 7, 42)
    b = kmeanspp_config(X, None, SeedingConfig(7, rng_seed=42))
    np.testing.assert_array_equal(a, b)
    assert bicriteria(X, None, 4, 0).shape == (8, 3)


def test_errors():
    with pytest.raises(ValueError):
        kmeanspp(np.zeros((0, 2)), None, 2)
    with pytest.raises(ValueError):
        kmeanspp(np.zeros((3, 2)), None, 0)
    with pytest.raises(ValueError):
        SeedingConfig(0)
