"""Factored value iteration on a uniformly sampled subset of the state space.

All matrices are restricted to the sampled states and built from local-scope
tables, so one run is polynomial in the model description and the sample
size. It never touches the exponentially large full state space.
"""
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from fvi.errors import InvalidInputError
from fvi.factored.model import (FLATTEN_CAP, assignments, check_basis,
                                flatten, flatten_basis, reward_vectors)
from fvi.projection import KINDS, make_projector
from fvi.tabular import (CONVERGED, DIVERGED, DIVERGENCE_THRESHOLD,
                         IterationTrace, apriori_error_bound, exact_vi)

IID = "iid"
DISTINCT = "distinct"
# enumerate-and-permute when distinct-sampling from at most this many states
_PERMUTE_LIMIT = 2 ** 20


@dataclass(frozen=True)
class FviConfig:
    """Run settings. ``samples=None`` means "use every state, in index order"."""

    samples: int = None
    epsilon: float = 1e-6
    max_iters: int = 10_000
    seed: int = 0
    projection: str = "npinv"
    sampling: str = IID
    oracle: bool = False
    flatten_cap: int = FLATTEN_CAP

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidInputError("epsilon must be positive")
        if self.samples is not None and int(self.samples) < 1:
            raise InvalidInputError("sample count must be at least 1")
        if self.projection not in KINDS:
            raise InvalidInputError(f"unknown projection {self.projection!r}")
        if self.sampling not in (IID, DISTINCT):
            raise InvalidInputError(f"sampling must be {IID!r} or {DISTINCT!r}")
        if int(self.max_iters) < 1:
            raise InvalidInputError("max_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class SampledSystem:
    """Restriction of the AVI equations to the sampled states.

    ``B[a]`` equals ``(P^a H)`` at the sampled rows, ``r[a]`` the rewards;
    ``G`` is ``None`` for non-linear projections.
    """

    states: np.ndarray
    H: np.ndarray
    B: np.ndarray
    r: np.ndarray
    projector: object
    gamma: float

    @property
    def G(self):
        return self.projector.G

    def backup(self, w):
        """``max_a(r^a + gamma B^a w)`` on the sampled states."""
        return (self.r + self.gamma * (self.B @ w)).max(axis=0)


@dataclass
class FviReport:
    weights: np.ndarray
    trace: IterationTrace
    residual: float
    config: FviConfig
    n_samples: int
    rank: int
    rank_deficient: bool
    wall_time: float
    apriori_bound: float = None
    oracle_error: float = None
    warnings: list = field(default_factory=list)

    @property
    def status(self):
        return self.trace.status


def sample_states(space, n, seed=0, mode=IID):
    """Draw ``n`` states uniformly (``iid``) or as a uniform ``n``-subset (``distinct``)."""
    n = int(n)
    if n < 1:
        raise InvalidInputError("sample count must be at least 1")
    rng = np.random.default_rng(seed)
    if mode == IID:
        return np.column_stack([rng.integers(0, k, size=n) for k in space.sizes]).astype(np.int64)
    if mode != DISTINCT:
        raise InvalidInputError(f"unknown sampling mode {mode!r}")
    N = space.size
    if n > N:
        raise InvalidInputError(f"cannot draw {n} distinct states from {N}")
    from fvi.factored.model import decode
    if N <= _PERMUTE_LIMIT:
        return decode(rng.permutation(N)[:n], space.sizes)
    seen, out = set(), []
    while len(out) < n:
        x = tuple(int(rng.integers(0, k)) for k in space.sizes)
        if x not in seen:
            seen.add(x)
            out.append(x)
    return np.asarray(out, dtype=np.int64)


def backprojection(fmdp, basis, states, a):
    """Rows of ``B^a`` at ``states``, shape (S, K).

    ``B[x, k] = sum over y[C_k] of prod_{i in C_k} P_i(y[i] | x[Gamma_i], a) * h_k(y[C_k])``,
    a sum over the local assignments of ``C_k`` only.
    """
    X = fmdp.space.check_states(states)
    S = X.shape[0]
    cols = []
    for h in basis:
        Y = assignments(h.sizes)
        weight = np.ones((S, Y.shape[0]))
        for t, i in enumerate(h.scope):
            weight *= fmdp.factors[i].probs(X, a)[:, Y[:, t]]
        cols.append(weight @ h.table)
    return np.column_stack(cols)


def build_backprojection_row(fmdp, basis, x, a):
    """``B^a[x, :]`` for a single state ``x``."""
    a = int(a)
    if not 0 <= a < fmdp.n_actions:
        raise InvalidInputError(f"action {a} out of range")
    return backprojection(fmdp, basis, np.asarray(x)[None, :], a)[0]


def assemble_sampled(fmdp, basis, states, kind="npinv", gamma=None):
    """Build the sampled system; the projector is derived from the sampled ``H``."""
    check_basis(basis, fmdp.space)
    X = fmdp.space.check_states(states)
    if X.shape[0] == 0:
        raise InvalidInputError("need at least one sampled state")
    H = flatten_basis(basis, fmdp.space, X)
    B = np.stack([backprojection(fmdp, basis, X, a) for a in range(fmdp.n_actions)])
    r = reward_vectors(fmdp, X)
    proj = make_projector(kind, H)
    return SampledSystem(X, H, B, r, proj, fmdp.gamma if gamma is None else float(gamma))


def iterate_sampled(system, eps, max_iters, record=False, divergence_threshold=DIVERGENCE_THRESHOLD):
    """``w_{t+1} = G max_a(r^a + gamma B^a w_t)`` from ``w_0 = 0``."""
    K = system.H.shape[1]
    w = np.zeros(K)
    trace = IterationTrace()
    for _ in range(int(max_iters)):
        w_new = np.asarray(system.projector(system.backup(w)), dtype=float)
        step = w_new - w
        trace.deltas.append(float(np.max(np.abs(step), initial=0.0)))
        trace.value_deltas.append(float(np.max(np.abs(system.H @ step), initial=0.0)))
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


def sampled_residual(system, w):
    return float(np.max(np.abs(system.backup(w) - system.H @ w), initial=0.0))


def bellman_residual(fmdp, basis, w, states):
    """``max_x |max_a(r^a + gamma B^a w) - H w|`` over the given states."""
    X = fmdp.space.check_states(states)
    H = flatten_basis(basis, fmdp.space, X)
    B = np.stack([backprojection(fmdp, basis, X, a) for a in range(fmdp.n_actions)])
    r = reward_vectors(fmdp, X)
    w = np.asarray(w, dtype=float)
    backed = (r + fmdp.gamma * (B @ w)).max(axis=0)
    return float(np.max(np.abs(backed - H @ w), initial=0.0))


def fvi_solve(fmdp, basis, cfg=None, record=False):
    """Run factored value iteration and return an :class:`FviReport`."""
    cfg = cfg or FviConfig()
    t0 = time.perf_counter()
    notes = []
    if cfg.samples is None:
        states = fmdp.space.all_states(cfg.flatten_cap)
    else:
        if int(cfg.samples) < basis.K:
            raise InvalidInputError(f"need at least K={basis.K} samples, got {cfg.samples}")
        states = sample_states(fmdp.space, cfg.samples, cfg.seed, cfg.sampling)
    system = assemble_sampled(fmdp, basis, states, cfg.projection)
    rank = int(np.linalg.matrix_rank(system.H))
    if rank < basis.K:
        msg = f"sampled basis matrix has rank {rank} < K={basis.K}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    w, trace = iterate_sampled(system, cfg.epsilon, cfg.max_iters, record)
    residual = sampled_residual(system, w) if trace.status != DIVERGED else float("nan")

    bound = err = None
    if cfg.oracle and fmdp.space.size <= cfg.flatten_cap:
        flat = flatten(fmdp, cfg.flatten_cap)
        v_star, _ = exact_vi(flat, 1e-10)
        H_full = flatten_basis(basis, fmdp.space, cap=cfg.flatten_cap)
        bound = apriori_error_bound(flat, H_full, make_projector(cfg.projection, H_full), v_star)
        if trace.status != DIVERGED:
            err = float(np.max(np.abs(H_full @ w - v_star)))
    return FviReport(w, trace, residual, cfg, int(states.shape[0]), rank, rank < basis.K,
                     time.perf_counter() - t0, bound, err, notes)


def plan_sample_size(m, k, eps, delta):
    """Samples needed for the uniform sampled-product bound:
    ``ceil(2 m^2 / eps^2 * ln(2 k m / delta))``."""
    if not (0 < eps < 1 and 0 < delta < 1):
        raise InvalidInputError("eps and delta must lie in (0, 1)")
    m, k = int(m), int(k)
    if m < 1 or k < 1:
        raise InvalidInputError("m and k must be at least 1")
    return math.ceil(2.0 * m * m / (eps * eps) * math.log(2.0 * k * m / delta))
