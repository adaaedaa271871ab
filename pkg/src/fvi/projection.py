"""Projections from value space (length N) to basis weights (length K).

Linear operators carry their K x N matrix ``G``; the norm-minimising ones
(L1, L-inf and the max-norm-constrained variants) solve an LP or QP per call.
"""
from dataclasses import dataclass

import numpy as np

from fvi.errors import InvalidInputError
from fvi.linalg import (LpProblem, as_matrix, as_vector, frank_wolfe_cls,
                        inf_norm, mat_pinv, simplex_solve)

KINDS = ("l2", "l2c", "linf", "linfc", "l1", "npinv", "nht")
EXPLICIT = "explicit"
LINEAR_KINDS = ("l2", "npinv", "nht", EXPLICIT)

# slack allowed on the L1 optimum when minimising ||Hw||_inf over the optimal face
L1_FACE_TOL = 1e-12
NONEXPANSION_TOL = 1e-7


def _check(H, v):
    H = as_matrix(H, "H")
    return H, as_vector(v, H.shape[0], "v")


def _solve(lp, what):
    sol = simplex_solve(lp)
    if not sol.optimal:
        raise RuntimeError(f"{what} LP returned status {sol.status}")
    return sol


def project_l2(H, v):
    """Least-squares weights ``H^+ v``."""
    H, v = _check(H, v)
    return mat_pinv(H) @ v


def project_l2_constrained(H, v):
    """Least squares subject to ``||Hw||_inf <= ||v||_inf`` (Frank-Wolfe)."""
    H, v = _check(H, v)
    return frank_wolfe_cls(H, v, inf_norm(v))


def _linf_lp(H, v, cap=None):
    # variables (w, t): minimise t with -t <= Hw - v <= t
    N, K = H.shape
    ones = np.ones((N, 1))
    rows = [np.hstack([H, -ones]), np.hstack([-H, -ones])]
    rhs = [v, -v]
    if cap is not None:
        zeros = np.zeros((N, 1))
        rows += [np.hstack([H, zeros]), np.hstack([-H, zeros])]
        rhs += [np.full(N, cap), np.full(N, cap)]
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    c = np.zeros(K + 1)
    c[-1] = 1.0
    bounds = ((None, None),) * K + ((0.0, None),)
    return LpProblem(c, A, ("<=",) * A.shape[0], b, bounds)


def project_linf(H, v):
    """Weights minimising the max-norm residual ``||Hw - v||_inf``."""
    H, v = _check(H, v)
    return _solve(_linf_lp(H, v), "L-inf projection").x[:-1]


def project_linf_constrained(H, v):
    """Max-norm residual minimiser subject to ``||Hw||_inf <= ||v||_inf``."""
    H, v = _check(H, v)
    return _solve(_linf_lp(H, v, cap=inf_norm(v)), "constrained L-inf projection").x[:-1]


def project_l1(H, v):
    """Weights minimising ``||Hw - v||_1``.

    L1 minimisers need not be unique. When the first LP cannot certify a
    unique optimum, a second LP picks, among the optimal weights, one
    minimising ``||Hw||_inf``. For a single basis column and two states the
    result satisfies ``||Hw||_inf <= ||v||_inf``; in general it need not
    (see ``tests/test_projection.py`` for a unique-optimum counterexample).
    """
    H, v = _check(H, v)
    N, K = H.shape
    eye = np.eye(N)
    # variables (w, s+, s-): Hw - s+ + s- = v
    A_eq = np.hstack([H, -eye, eye])
    c = np.concatenate([np.zeros(K), np.ones(2 * N)])
    bounds = ((None, None),) * K + ((0.0, None),) * (2 * N)
    first = _solve(LpProblem(c, A_eq, ("=",) * N, v, bounds), "L1 projection")
    if first.unique:
        return first.x[:K]
    best = first.objective

    # variables (w, s+, s-, u): minimise u over the (slightly relaxed) optimal face
    zN = np.zeros((N, 1))
    zNN = np.zeros((N, 2 * N))
    A = np.vstack([
        np.hstack([A_eq, zN]),
        np.concatenate([np.zeros(K), np.ones(2 * N), [0.0]])[None, :],
        np.hstack([H, zNN, -np.ones((N, 1))]),
        np.hstack([-H, zNN, -np.ones((N, 1))]),
    ])
    b = np.concatenate([v, [best + L1_FACE_TOL * max(1.0, best)], np.zeros(2 * N)])
    senses = ("=",) * N + ("<=",) * (1 + 2 * N)
    c2 = np.zeros(K + 2 * N + 1)
    c2[-1] = 1.0
    second = simplex_solve(LpProblem(c2, A, senses, b, bounds + ((0.0, None),)))
    if not second.optimal:
        return first.x[:K]
    return second.x[:K]


def _column_abs_sums(M):
    return np.sum(np.abs(M), axis=0)


def normalize_linear(G, H):
    """Rescale a K x N linear projection so that ``||H N(G)||_inf = 1``.

    Entry ``(k, x)`` of ``G`` is divided by the absolute column sum of ``H``
    at basis index ``k`` times the absolute column sum of ``G`` at state
    ``x``; zero denominators give zero entries. The result is then divided by
    ``||H N(G)||_inf`` (when non-zero), which makes the max-norm exactly one.
    """
    G = as_matrix(G, "G")
    H = as_matrix(H, "H")
    N, K = H.shape
    if G.shape != (K, N):
        raise InvalidInputError(f"G has shape {G.shape}, expected {(K, N)} to match H")
    denom = np.outer(_column_abs_sums(H), _column_abs_sums(G))
    out = np.zeros_like(G)
    nz = denom > 0
    out[nz] = G[nz] / denom[nz]
    c = inf_norm(H @ out)
    if c > 0:
        out /= c
    return out


def column_normalized(H):
    """``H`` with each column divided by its sum: ``Pr(x | s)`` under a uniform prior."""
    H = as_matrix(H, "H")
    sums = H.sum(axis=0)
    if np.any(sums == 0):
        raise InvalidInputError("H has an all-zero column")
    return H / sums


@dataclass(frozen=True, eq=False)
class Projector:
    """A projection operator bound to a basis matrix ``H``.

    Calling it maps a length-N vector to K weights. Linear kinds store their
    matrix in ``G``.
    """

    kind: str
    H: np.ndarray
    G: np.ndarray = None

    @property
    def is_linear(self):
        return self.G is not None

    def __call__(self, v):
        if self.G is not None:
            return self.G @ as_vector(v, self.G.shape[1], "v")
        return _SOLVERS[self.kind](self.H, v)

    @classmethod
    def explicit(cls, G, H):
        G = as_matrix(G, "G")
        H = as_matrix(H, "H")
        if G.shape != (H.shape[1], H.shape[0]):
            raise InvalidInputError(f"G has shape {G.shape}, H has shape {H.shape}")
        return cls(EXPLICIT, H, G)


_SOLVERS = {
    "l2": project_l2,
    "l2c": project_l2_constrained,
    "linf": project_linf,
    "linfc": project_linf_constrained,
    "l1": project_l1,
}


def make_projector(kind, H):
    """Build the projector named ``kind`` (one of :data:`KINDS`) for basis ``H``."""
    H = as_matrix(H, "H")
    if kind == "l2":
        return Projector("l2", H, mat_pinv(H))
    if kind == "npinv":
        return Projector("npinv", H, normalize_linear(mat_pinv(H), H))
    if kind == "nht":
        return Projector("nht", H, normalize_linear(H.T, H))
    if kind in _SOLVERS:
        return Projector(kind, H)
    raise InvalidInputError(f"unknown projection kind {kind!r}; expected one of {', '.join(KINDS)}")


@dataclass(frozen=True)
class NonExpansionReport:
    """Empirical check of ``||H P v - H P v'||_inf <= ||v - v'||_inf``.

    ``bound_violations`` counts sampled ``v`` with ``||H P v||_inf > ||v||_inf``
    (the pair test with ``v' = 0``). ``operator_norm`` is ``||H G||_inf`` for
    linear projectors and ``None`` otherwise.
    """

    trials: int
    max_ratio: float
    violations: int
    bound_violations: int
    max_bound_ratio: float
    operator_norm: float = None

    @property
    def nonexpansive(self):
        if self.operator_norm is not None:
            return self.operator_norm <= 1.0 + NONEXPANSION_TOL
        return self.violations == 0


def check_nonexpansion(H, proj, trials=100, seed=0):
    """Sample ``trials`` standard-normal pairs and report expansion ratios."""
    H = as_matrix(H, "H")
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    N = H.shape[0]
    max_ratio = max_bound = 0.0
    violations = bound_violations = 0
    for _ in range(int(trials)):
        v = rng.standard_normal(N)
        vp = rng.standard_normal(N)
        hv = H @ np.asarray(proj(v))
        hvp = H @ np.asarray(proj(vp))
        ratio = inf_norm(hv - hvp) / inf_norm(v - vp)
        bound = inf_norm(hv) / inf_norm(v)
        max_ratio = max(max_ratio, ratio)
        max_bound = max(max_bound, bound)
        violations += ratio > 1.0 + NONEXPANSION_TOL
        bound_violations += bound > 1.0 + NONEXPANSION_TOL
    op = None
    if getattr(proj, "G", None) is not None:
        op = inf_norm(H @ proj.G)
    return NonExpansionReport(int(trials), max_ratio, int(violations), int(bound_violations),
                              max_bound, op)
