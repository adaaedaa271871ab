"""Approximate matrix products from uniformly sampled inner indices.

``sampled_product`` draws ``n`` inner indices uniformly with repetition and
rescales by ``N/n``, an unbiased estimate of ``A @ B``. When the factors are
local-scope matrices (values depend only on a few state variables), the
inner dimension collapses to the assignments of the joint scope; see
:func:`collapse_local_scope`.
"""
import math
from dataclasses import dataclass

import numpy as np

from fvi.errors import InvalidInputError
from fvi.factored.model import FLATTEN_CAP, VarSpace, assignments, local_index
from fvi.linalg import as_matrix, inf_norm

COLUMNS = "columns"
ROWS = "rows"


def _draw(N, n, seed):
    n = int(n)
    if n < 1:
        raise InvalidInputError("sample count must be at least 1")
    return np.random.default_rng(seed).integers(0, N, size=n)


def sampled_product(A, B, n, seed=0):
    """``(N/n) * sum_i A[:, r_i] B[r_i, :]`` for ``n`` uniform i.i.d. indices ``r_i``."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[1] != B.shape[0]:
        raise InvalidInputError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    N = A.shape[1]
    idx = _draw(N, n, seed)
    return (N / idx.shape[0]) * (A[:, idx] @ B[idx, :])


@dataclass(frozen=True, eq=False)
class ScopedMatrix:
    """Dense matrix whose state-indexed axis depends only on ``x[scope]``.

    ``axis="columns"`` means columns are indexed by full states (a left
    factor), ``axis="rows"`` means rows are (a right factor).
    """

    matrix: np.ndarray
    scope: tuple
    space: VarSpace
    axis: str = COLUMNS
    check_cap: int = FLATTEN_CAP

    def __post_init__(self):
        if self.axis not in (COLUMNS, ROWS):
            raise InvalidInputError(f"axis must be {COLUMNS!r} or {ROWS!r}")
        M = as_matrix(self.matrix, "matrix").copy()
        scope = self.space.check_scope(self.scope)
        N = self.space.size
        along = M.shape[1] if self.axis == COLUMNS else M.shape[0]
        if along != N:
            raise InvalidInputError(f"state axis has length {along}, expected {N}")
        if N <= self.check_cap:
            li = local_index(self.space.all_states(N), scope, self.space.scope_sizes(scope))
            _, first = np.unique(li, return_index=True)
            ref = M[:, first[li]] if self.axis == COLUMNS else M[first[li], :]
            if not np.array_equal(ref, M):
                raise InvalidInputError(f"matrix is not local-scope on variables {scope}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "scope", scope)

    @classmethod
    def from_local(cls, space, scope, table, axis=COLUMNS):
        """Expand a local table to full states.

        ``table`` has shape (p, n_assign) for ``axis="columns"`` or
        (n_assign, k) for ``axis="rows"``.
        """
        scope = space.check_scope(scope)
        T = as_matrix(table, "table")
        n_assign = math.prod(space.scope_sizes(scope))
        li = local_index(space.all_states(space.size), scope, space.scope_sizes(scope))
        if axis == COLUMNS:
            if T.shape[1] != n_assign:
                raise InvalidInputError(f"table needs {n_assign} columns")
            M = T[:, li]
        else:
            if T.shape[0] != n_assign:
                raise InvalidInputError(f"table needs {n_assign} rows")
            M = T[li, :]
        return cls(M, scope, space, axis, check_cap=0)


def collapse_local_scope(A, B):
    """Representatives ``(A', B', N1)`` with ``A @ B == N1 * A' @ B'``.

    ``A'`` keeps one column and ``B'`` one row per assignment of the joint
    scope ``Z = Z1 | Z2`` (other variables set to 0); ``N1 = N / N0`` is the
    size of each equivalence class.
    """
    if not (isinstance(A, ScopedMatrix) and isinstance(B, ScopedMatrix)):
        raise InvalidInputError("collapse needs two ScopedMatrix arguments")
    if A.space != B.space:
        raise InvalidInputError("scoped matrices live on different state spaces")
    if A.axis != COLUMNS or B.axis != ROWS:
        raise InvalidInputError("left factor must be column-scoped and right factor row-scoped")
    space = A.space
    Z = tuple(sorted(set(A.scope) | set(B.scope)))
    sizes = space.scope_sizes(Z)
    N0 = math.prod(sizes)
    reps = np.zeros((N0, space.m), dtype=np.int64)
    if Z:
        reps[:, list(Z)] = assignments(sizes)
    idx = space.index(reps)
    return A.matrix[:, idx], B.matrix[idx, :], space.size // N0


def _scoped_terms(terms):
    if not terms:
        raise InvalidInputError("need at least one (A_i, B_j) term")
    lefts, rights = [], []
    for A, B in terms:
        for M, axis, bucket in ((A, COLUMNS, lefts), (B, ROWS, rights)):
            if not isinstance(M, ScopedMatrix) or M.axis != axis:
                raise InvalidInputError("terms must be (column-scoped, row-scoped) ScopedMatrix pairs")
            if all(M is not other for other in bucket):
                bucket.append(M)
    return lefts, rights


def sampled_product_scoped(terms, n, seed=0):
    """Estimate ``(sum_i A_i)(sum_j B_j)`` with one index sample shared by all pairs.

    ``terms`` lists the left factors ``A_i`` and right factors ``B_j`` as
    pairs; every distinct ``A_i`` is combined with every distinct ``B_j``.
    """
    lefts, rights = _scoped_terms(terms)
    A = sum(M.matrix for M in lefts)
    B = sum(M.matrix for M in rights)
    if A.shape[1] != B.shape[0]:
        raise InvalidInputError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    N = A.shape[1]
    idx = _draw(N, n, seed)
    return (N / idx.shape[0]) * (A[:, idx] @ B[idx, :])


@dataclass
class SketchReport:
    trials: int
    n_samples: int
    epsilon: float
    delta: float
    max_error: float
    max_threshold: float
    max_ratio: float
    violations: int
    scoped: bool
    n: int
    n0: int

    @property
    def violation_rate(self):
        return self.violations / self.trials

    @property
    def threshold_ratio(self):
        """``N0 / N``: how much smaller the scoped threshold scale is."""
        return self.n0 / self.n

    def as_dict(self):
        return {"trials": self.trials, "n_samples": self.n_samples, "epsilon": self.epsilon,
                "delta": self.delta, "max_error": self.max_error, "max_threshold": self.max_threshold,
                "max_error_over_threshold": self.max_ratio, "violations": self.violations,
                "violation_rate": self.violation_rate, "scoped": self.scoped, "n": self.n,
                "n0": self.n0, "threshold_ratio": self.threshold_ratio}


def dense_generator(p, N, k, low=-1.0, high=1.0):
    """Generator of uniform random ``A (p x N)``, ``B (N x k)`` pairs."""
    def gen(rng):
        return rng.uniform(low, high, size=(p, N)), rng.uniform(low, high, size=(N, k))
    return gen


def scoped_generator(space, p, k, n_left=2, n_right=2, max_scope=2):
    """Generator of random sums of local-scope terms with scopes of size ``<= max_scope``."""
    def scope(rng):
        size = int(rng.integers(0, max_scope + 1))
        return tuple(sorted(rng.choice(space.m, size=size, replace=False).tolist()))

    def gen(rng):
        lefts, rights = [], []
        for _ in range(n_left):
            Z = scope(rng)
            n = math.prod(space.scope_sizes(Z))
            lefts.append(ScopedMatrix.from_local(space, Z, rng.uniform(-1, 1, size=(p, n)), COLUMNS))
        for _ in range(n_right):
            Z = scope(rng)
            n = math.prod(space.scope_sizes(Z))
            rights.append(ScopedMatrix.from_local(space, Z, rng.uniform(-1, 1, size=(n, k)), ROWS))
        return [(A, B) for A in lefts for B in rights]
    return gen


def verify_bound(generator, n_samples, eps, delta, trials=100, seed=0):
    """Monte-Carlo check of the sampled-product error bound.

    ``generator(rng)`` returns either a dense pair ``(A, B)``, judged against
    ``eps * N * ||A|| * ||B^T||``, or a list of scoped pairs, judged against
    ``eps * N0 * p * q * max ||A_i|| * max ||B_j||`` where ``N0`` is the largest
    joint-scope size over the pairs. Norms are max row sums. The report
    only counts exceedances; it asserts nothing.
    """
    trials = int(trials)
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    worst_err = worst_thr = worst_ratio = 0.0
    violations = 0
    scoped = None
    n_full = n0 = 0
    for child in children:
        gen_seed, draw_seed = child.spawn(2)
        made = generator(np.random.default_rng(gen_seed))
        if isinstance(made, list):
            lefts, rights = _scoped_terms(made)
            A = sum(M.matrix for M in lefts)
            B = sum(M.matrix for M in rights)
            space = lefts[0].space
            N0 = max(math.prod(space.scope_sizes(sorted(set(L.scope) | set(R.scope))))
                     for L in lefts for R in rights)
            C_hat = sampled_product_scoped(made, n_samples, draw_seed)
            thr = eps * N0 * len(lefts) * len(rights) * max(inf_norm(M.matrix) for M in lefts) \
                * max(inf_norm(M.matrix) for M in rights)
            is_scoped = True
        else:
            A, B = (as_matrix(M) for M in made)
            N0 = A.shape[1]
            C_hat = sampled_product(A, B, n_samples, draw_seed)
            thr = eps * A.shape[1] * inf_norm(A) * inf_norm(B.T)
            is_scoped = False
        if scoped is None:
            scoped = is_scoped
        err = inf_norm(C_hat - A @ B)
        worst_err = max(worst_err, err)
        worst_thr = max(worst_thr, thr)
        worst_ratio = max(worst_ratio, err / thr if thr > 0 else (math.inf if err > 0 else 0.0))
        violations += err > thr
        n_full = A.shape[1]
        n0 = max(n0, N0)
    return SketchReport(trials, int(n_samples), float(eps), float(delta), worst_err, worst_thr,
                        worst_ratio, int(violations), bool(scoped), int(n_full), int(n0))
