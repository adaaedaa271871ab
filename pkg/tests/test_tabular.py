import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvi.errors import InvalidInputError
from fvi.projection import Projector, make_projector
from fvi.tabular import (CONVERGED, DIVERGED, MAX_ITERS, FlatMdp,
                         apriori_error_bound, avi_iterate, bellman_apply,
                         exact_vi, greedy_policy, policy_value,
                         random_flat_mdp)
from oracles import enumerate_policies_value


def two_state_jump(reward=0.0):
    """Both states move to the second state; one action."""
    P = np.array([[[0.0, 1.0], [0.0, 1.0]]])
    return FlatMdp(P, np.full((1, 2), reward), 0.9)


def test_validation_errors():
    with pytest.raises(InvalidInputError):
        FlatMdp(np.array([[[0.5, 0.4], [0.0, 1.0]]]), np.zeros((1, 2)), 0.9)
    with pytest.raises(InvalidInputError):
        FlatMdp(np.array([[[1.0, 0.0], [0.0, 1.0]]]), np.zeros((1, 2)), 1.0)
    with pytest.raises(InvalidInputError):
        FlatMdp(np.array([[[1.0, 0.0], [0.0, 1.0]]]), np.zeros((2, 2)), 0.5)
    with pytest.raises(InvalidInputError):
        FlatMdp(np.array([[[-0.5, 1.5], [0.0, 1.0]]]), np.zeros((1, 2)), 0.5)


def test_single_state_geometric_value():
    mdp = FlatMdp(np.ones((1, 1, 1)), np.ones((1, 1)), 0.5)
    v, trace = exact_vi(mdp, eps=1e-12)
    assert v[0] == pytest.approx(2.0, abs=1e-11)
    assert trace.status == CONVERGED


def test_bellman_apply_is_gamma_contraction_on_example():
    rng = np.random.default_rng(0)
    mdp = random_flat_mdp(rng, 6, 3, 0.8)
    u, w = rng.standard_normal(6), rng.standard_normal(6)
    lhs = np.max(np.abs(bellman_apply(mdp, u) - bellman_apply(mdp, w)))
    assert lhs <= 0.8 * np.max(np.abs(u - w)) + 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_exact_vi_matches_policy_enumeration(seed):
    rng = np.random.default_rng(seed)
    mdp = random_flat_mdp(rng, 4, 2, 0.9)
    v, trace = exact_vi(mdp, eps=1e-11)
    assert trace.status == CONVERGED
    np.testing.assert_allclose(v, enumerate_policies_value(mdp.P, mdp.r, 0.9), atol=1e-8)
    np.testing.assert_allclose(policy_value(mdp, greedy_policy(mdp, v)), v, atol=1e-8)


def test_exact_vi_max_iters():
    rng = np.random.default_rng(1)
    v, trace = exact_vi(random_flat_mdp(rng, 5, 2, 0.99), eps=1e-12, max_iters=3)
    assert trace.status == MAX_ITERS and trace.iterations == 3


def test_greedy_policy_ties_lowest_index():
    mdp = FlatMdp(np.ones((3, 1, 1)), np.zeros((3, 1)), 0.5)
    assert greedy_policy(mdp, np.zeros(1)).tolist() == [0]


def test_avi_divergence_under_least_squares():
    mdp = two_state_jump()
    H = np.array([[1.0], [2.0]])
    w, trace = avi_iterate(mdp, H, make_projector("l2", H), w0=[1.0], record=True)
    assert trace.status == DIVERGED
    ratios = [b[0] / a[0] for a, b in zip(trace.history, trace.history[1:])]
    np.testing.assert_allclose(ratios, 1.08, atol=1e-9)


def test_avi_normalized_projection_converges_to_zero():
    mdp = two_state_jump()
    H = np.array([[1.0], [2.0]])
    w, trace = avi_iterate(mdp, H, make_projector("npinv", H), eps=1e-12, w0=[1.0], record=True)
    assert trace.status == CONVERGED
    assert abs(w[0]) < 1e-11
    assert trace.history[1][0] / trace.history[0][0] == pytest.approx(0.9, abs=1e-9)


def test_avi_zero_start_stays_at_zero_without_reward():
    mdp = two_state_jump()
    H = np.array([[1.0], [2.0]])
    w, trace = avi_iterate(mdp, H, make_projector("l2", H))
    assert trace.status == CONVERGED and w[0] == 0.0


def test_avi_identity_basis_equals_exact_vi():
    rng = np.random.default_rng(5)
    mdp = random_flat_mdp(rng, 7, 3, 0.9)
    H = np.eye(7)
    proj = Projector.explicit(np.eye(7), H)
    w, t_avi = avi_iterate(mdp, H, proj, eps=1e-9, record=True)
    v, t_vi = exact_vi(mdp, eps=1e-9, record=True)
    assert t_avi.iterations == t_vi.iterations
    for a, b in zip(t_avi.history, t_vi.history):
        np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)


def test_avi_rejects_bad_shapes():
    mdp = two_state_jump()
    with pytest.raises(InvalidInputError):
        avi_iterate(mdp, np.ones((3, 1)), lambda v: v[:1])
    with pytest.raises(InvalidInputError):
        avi_iterate(mdp, np.ones((2, 1)), lambda v: v)


def test_apriori_bound_zero_when_basis_spans_optimum():
    rng = np.random.default_rng(2)
    mdp = random_flat_mdp(rng, 5, 2, 0.9)
    v_star, _ = exact_vi(mdp, eps=1e-12)
    H = v_star.reshape(-1, 1)
    assert apriori_error_bound(mdp, H, make_projector("l2", H), v_star) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(1, 3), st.floats(0.1, 0.95))
def test_exact_vi_fixed_point_residual(seed, n, a, gamma):
    mdp = random_flat_mdp(np.random.default_rng(seed), n, a, gamma)
    eps = 1e-8
    v, trace = exact_vi(mdp, eps=eps)
    assert trace.status == CONVERGED
    assert np.max(np.abs(bellman_apply(mdp, v) - v)) <= eps * (1 + gamma) / (1 - gamma)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_avi_contracts_in_value_space_for_normalized_kinds(seed):
    rng = np.random.default_rng(seed)
    mdp = random_flat_mdp(rng, 10, 2, 0.9)
    H = rng.uniform(0, 1, size=(10, 3))
    for kind in ("npinv", "nht"):
        _, trace = avi_iterate(mdp, H, make_projector(kind, H), eps=1e-9)
        assert trace.status == CONVERGED
        d = trace.value_deltas
        assert all(b <= 0.9 * a + 1e-9 for a, b in zip(d, d[1:]))
