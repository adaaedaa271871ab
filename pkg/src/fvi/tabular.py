"""Explicit (flat) MDPs: Bellman operator, exact value iteration, greedy
policies, and approximate value iteration with a pluggable projection."""
from dataclasses import dataclass, field

import numpy as np

from fvi.errors import InvalidInputError
from fvi.linalg import as_matrix, as_vector

STOCH_TOL = 1e-9
DIVERGENCE_THRESHOLD = 1e8

CONVERGED = "converged"
MAX_ITERS = "max-iters"
DIVERGED = "diverged"


@dataclass(frozen=True, eq=False)
class FlatMdp:
    """Tabular MDP with ``P[a, x, y] = P(y | x, a)`` and ``r[a, x] = R(x, a)``."""

    P: np.ndarray
    r: np.ndarray
    gamma: float
    start: int = 0

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if P.ndim != 3 or P.shape[1] != P.shape[2]:
            raise InvalidInputError(f"P must have shape (A, N, N), got {P.shape}")
        if r.shape != P.shape[:2]:
            raise InvalidInputError(f"r must have shape {P.shape[:2]}, got {r.shape}")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(r))):
            raise InvalidInputError("transition and reward tables must be finite")
        if np.any(P < 0):
            raise InvalidInputError("transition probabilities must be non-negative")
        bad = np.abs(P.sum(axis=2) - 1.0) > STOCH_TOL
        if np.any(bad):
            a, x = map(int, np.argwhere(bad)[0])
            raise InvalidInputError(f"row {x} of P[{a}] sums to {P[a, x].sum()!r}")
        if not 0.0 <= float(self.gamma) < 1.0:
            raise InvalidInputError(f"discount must lie in [0, 1), got {self.gamma}")
        if not 0 <= int(self.start) < P.shape[1]:
            raise InvalidInputError(f"start state {self.start} out of range")
        P.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "start", int(self.start))

    @property
    def n_states(self):
        return self.P.shape[1]

    @property
    def n_actions(self):
        return self.P.shape[0]

    def q_values(self, v):
        """``r^a + gamma P^a v`` for every action, shape (A, N)."""
        return self.r + self.gamma * (self.P @ v)


@dataclass
class IterationTrace:
    """Per-iteration record of a fixed-point run.

    ``deltas[t]`` is the max-norm change of the iterate (weights for AVI,
    values for exact VI); ``value_deltas`` holds the value-space change
    ``||H(w_{t+1} - w_t)||_inf`` for AVI runs. ``history`` (iterates
    ``x_1, x_2, ...``) is filled only when recording was requested.
    """

    deltas: list = field(default_factory=list)
    status: str = MAX_ITERS
    value_deltas: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.deltas)


def bellman_apply(mdp, v):
    """Apply the Bellman optimality operator: componentwise max over actions."""
    v = as_vector(v, mdp.n_states, "value vector")
    return mdp.q_values(v).max(axis=0)


def exact_vi(mdp, eps=1e-8, max_iters=100_000, record=False):
    """Value iteration from ``v_0 = 0`` until ``||v_{t+1} - v_t||_inf <= eps``.

    On convergence ``||T v - v||_inf <= gamma * eps``, comfortably inside the
    documented guard ``eps * (1 + gamma) / (1 - gamma)``.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    v = np.zeros(mdp.n_states)
    trace = IterationTrace()
    for _ in range(int(max_iters)):
        v_new = mdp.q_values(v).max(axis=0)
        delta = float(np.max(np.abs(v_new - v), initial=0.0))
        trace.deltas.append(delta)
        if record:
            trace.history.append(v_new.copy())
        v = v_new
        if delta <= eps:
            trace.status = CONVERGED
            break
    return v, trace


def greedy_policy(mdp, v):
    """Greedy action per state; ties go to the lowest action index."""
    v = as_vector(v, mdp.n_states, "value vector")
    return np.argmax(mdp.q_values(v), axis=0)


def policy_value(mdp, policy):
    """Exact value of a deterministic policy by solving ``(I - gamma P^pi) v = r^pi``."""
    policy = np.asarray(policy, dtype=int)
    if policy.shape != (mdp.n_states,) or np.any((policy < 0) | (policy >= mdp.n_actions)):
        raise InvalidInputError("policy must give one valid action per state")
    idx = np.arange(mdp.n_states)
    P_pi = mdp.P[policy, idx, :]
    r_pi = mdp.r[policy, idx]
    return np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * P_pi, r_pi)


def _check_basis(mdp, H):
    H = as_matrix(H, "H")
    if H.shape[0] != mdp.n_states:
        raise InvalidInputError(f"H has {H.shape[0]} rows for {mdp.n_states} states")
    return H


def avi_iterate(mdp, H, proj, eps=1e-8, max_iters=100_000, w0=None, record=False,
                divergence_threshold=DIVERGENCE_THRESHOLD):
    """Approximate value iteration ``w <- proj(max_a(r^a + gamma P^a H w))``.

    Args:
        mdp: the flat MDP.
        H: N x K basis matrix.
        proj: callable mapping a length-N vector to K weights (a Projector).
        eps: stop once ``||w_{t+1} - w_t||_inf <= eps``.
        max_iters: iteration budget.
        w0: starting weights; zero by default.
        record: keep every iterate in ``trace.history``.
        divergence_threshold: declare divergence once ``||w||_inf`` exceeds it.

    Returns:
        (weights, IterationTrace)
    """
    H = _check_basis(mdp, H)
    K = H.shape[1]
    w = np.zeros(K) if w0 is None else as_vector(w0, K, "w0").copy()
    PH = mdp.P @ H
    trace = IterationTrace()
    for _ in range(int(max_iters)):
        target = (mdp.r + mdp.gamma * (PH @ w)).max(axis=0)
        w_new = np.asarray(proj(target), dtype=float).reshape(-1)
        if w_new.shape != (K,):
            raise InvalidInputError(f"projection returned shape {w_new.shape}, expected ({K},)")
        step = w_new - w
        trace.deltas.append(float(np.max(np.abs(step), initial=0.0)))
        trace.value_deltas.append(float(np.max(np.abs(H @ step), initial=0.0)))
        if record:
            trace.history.append(w_new.copy())
        w = w_new
        if not np.all(np.isfinite(w)) or np.max(np.abs(w), initial=0.0) > divergence_threshold:
            trace.status = DIVERGED
            break
        if trace.deltas[-1] <= eps:
            trace.status = CONVERGED
            break
    return w, trace


def apriori_error_bound(mdp, H, proj, v_star):
    """Upper bound ``||H proj(v*) - v*||_inf / (1 - gamma)`` on ``||H w* - v*||_inf``.

    The guarantee needs ``H proj`` to be a max-norm non-expansion; the number
    is returned for any projection.
    """
    H = _check_basis(mdp, H)
    v_star = as_vector(v_star, mdp.n_states, "v_star")
    err = float(np.max(np.abs(H @ np.asarray(proj(v_star)) - v_star), initial=0.0))
    return err / (1.0 - mdp.gamma)


def random_flat_mdp(rng, n_states, n_actions, gamma, reward_scale=1.0):
    """Random MDP with Dirichlet(1) transition rows and uniform rewards."""
    P = rng.dirichlet(np.ones(n_states), size=(n_actions, n_states))
    P /= P.sum(axis=2, keepdims=True)
    r = reward_scale * rng.uniform(-1.0, 1.0, size=(n_actions, n_states))
    return FlatMdp(P, r, gamma)
