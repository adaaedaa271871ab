import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvi.errors import InvalidInputError
from fvi.linalg import inf_norm
from fvi.projection import (KINDS, check_nonexpansion, column_normalized,
                            make_projector, normalize_linear, project_l1,
                            project_l2, project_l2_constrained, project_linf,
                            project_linf_constrained)
from oracles import l1_fit_value

H2 = np.array([[1.0], [2.0]])
V2 = np.array([1.0, 1.0])


@pytest.mark.parametrize("kind, weight", [
    ("l2", 0.6), ("linf", 2.0 / 3.0), ("l1", 0.5), ("l2c", 0.5),
    ("linfc", 0.5), ("npinv", 0.5), ("nht", 0.5),
])
def test_two_state_example_weights(kind, weight):
    w = make_projector(kind, H2)(V2)
    assert w[0] == pytest.approx(weight, abs=1e-9)


def test_unknown_kind():
    with pytest.raises(InvalidInputError):
        make_projector("l3", H2)


def test_projections_reproduce_representable_vectors():
    rng = np.random.default_rng(0)
    H = rng.standard_normal((8, 3))
    w = rng.standard_normal(3)
    v = H @ w
    for fn in (project_l2, project_linf, project_l1):
        np.testing.assert_allclose(H @ fn(H, v), v, atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_l1_matches_weighted_median(seed):
    rng = np.random.default_rng(seed)
    h = rng.uniform(-2, 2, size=(7, 1))
    v = rng.standard_normal(7)
    w = project_l1(h, v)
    assert np.sum(np.abs(h @ w - v)) == pytest.approx(l1_fit_value(h, v), abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_linf_is_optimal_against_grid(seed):
    rng = np.random.default_rng(seed)
    h = rng.uniform(0.5, 2, size=(6, 1))
    v = rng.standard_normal(6)
    err = np.max(np.abs(h @ project_linf(h, v) - v))
    grid = np.linspace(-5, 5, 200_001)
    best = np.min(np.max(np.abs(np.outer(grid, h[:, 0]) - v), axis=1))
    assert err <= best + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 10), st.integers(1, 4))
def test_norm_bounded_kinds_do_not_enlarge(seed, N, K):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((N, K))
    v = rng.standard_normal(N)
    for fn in (project_l2_constrained, project_linf_constrained):
        assert inf_norm(H @ fn(H, v)) <= inf_norm(v) * (1 + 1e-7) + 1e-9


def test_l1_fit_can_exceed_input_norm():
    # unique weighted-median optimum; ||Hw|| exceeds ||v|| once N >= 3
    H = np.array([[-0.63114158], [0.9291375], [0.03381452], [-0.71603228]])
    v = np.array([1.75532128, -0.94888558, -0.41906156, 1.44647289])
    w = project_l1(H, v)
    assert w[0] == pytest.approx(v[3] / H[3, 0], abs=1e-9)
    assert inf_norm(H @ w) > 1.06 * inf_norm(v)


@pytest.mark.parametrize("seed", range(20))
def test_l1_norm_bound_with_single_column_two_states(seed):
    rng = np.random.default_rng(seed)
    H = rng.uniform(-2, 2, size=(2, 1))
    v = rng.standard_normal(2)
    assert inf_norm(H @ project_l1(H, v)) <= inf_norm(v) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 12), st.integers(1, 5))
def test_normalized_linear_has_unit_norm(seed, N, K):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((N, K))
    for kind in ("npinv", "nht"):
        G = make_projector(kind, H).G
        assert inf_norm(H @ G) == pytest.approx(1.0, abs=1e-10)


def test_normalize_linear_shape_check_and_zero():
    with pytest.raises(InvalidInputError):
        normalize_linear(np.ones((2, 2)), H2)
    assert np.all(normalize_linear(np.zeros((1, 2)), H2) == 0)


def test_column_normalized():
    H = np.array([[1.0, 0.0], [1.0, 2.0]])
    np.testing.assert_allclose(column_normalized(H), [[0.5, 0.0], [0.5, 1.0]])
    with pytest.raises(InvalidInputError):
        column_normalized(np.array([[1.0, 0.0]]))


def test_check_nonexpansion_flags_least_squares():
    H = np.array([[1.0], [2.0]])
    rep = check_nonexpansion(H, make_projector("l2", H), trials=50)
    assert rep.operator_norm == pytest.approx(1.2)
    assert not rep.nonexpansive
    rep = check_nonexpansion(H, make_projector("npinv", H), trials=50)
    assert rep.nonexpansive and rep.violations == 0


def test_l1_pairwise_counterexample():
    # the L1 fit tracks the median of the three unit rows and can move faster than v
    H = np.array([[1.0], [1.0], [1.0], [2.0]])
    v = np.array([0.0, -1.0, 1.0, 10.0])
    vp = v + np.array([0.0, 0.0, 0.1, 0.0])
    diff = inf_norm(H @ project_l1(H, v) - H @ project_l1(H, vp))
    assert diff == pytest.approx(0.2, abs=1e-9)
    assert diff > inf_norm(v - vp)


def test_all_kinds_return_k_weights():
    rng = np.random.default_rng(4)
    H = rng.uniform(0, 1, size=(6, 2))
    v = rng.standard_normal(6)
    for kind in KINDS:
        w = make_projector(kind, H)(v)
        assert np.shape(w) == (2,)
        assert np.all(np.isfinite(w))
