"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Meant for the small LPs of the projection catalog (a few hundred rows at
most), where determinism matters more than speed.
"""
from dataclasses import dataclass, field

import numpy as np

from fvi.errors import InvalidInputError

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
# smallest admissible pivot magnitude
PIVOT_TOL = 1e-11

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = {"<=": "<=", "le": "<=", "≤": "<=",
           "=": "=", "==": "=", "eq": "=",
           ">=": ">=", "ge": ">=", "≥": ">="}


@dataclass(frozen=True)
class LpProblem:
    """``min`` (or ``max``) ``c @ x`` subject to ``A x (senses) b`` and bounds.

    ``bounds`` holds one ``(lower, upper)`` pair per variable; ``None`` means
    unbounded on that side. The default bound is ``(0, None)``.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    b: np.ndarray
    bounds: tuple = None
    sense: str = "min"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != n:
            raise InvalidInputError(f"constraint matrix shape {A.shape} does not match {n} variables")
        if b.shape[0] != A.shape[0]:
            raise InvalidInputError(f"{b.shape[0]} right-hand sides for {A.shape[0]} rows")
        senses = tuple(_SENSES.get(s) for s in self.senses)
        if len(senses) != A.shape[0] or None in senses:
            raise InvalidInputError(f"bad constraint senses {self.senses!r}")
        bounds = self.bounds
        if bounds is None:
            bounds = ((0.0, None),) * n
        bounds = tuple(tuple(bd) for bd in bounds)
        if len(bounds) != n or any(len(bd) != 2 for bd in bounds):
            raise InvalidInputError("need one (lower, upper) pair per variable")
        if self.sense not in ("min", "max"):
            raise InvalidInputError(f"sense must be 'min' or 'max', not {self.sense!r}")
        for arr in (c, A, b):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray = field(default=None, repr=False)
    objective: float = float("nan")
    iterations: int = 0
    # optimum certified unique (all relevant reduced costs strictly positive)
    unique: bool = False

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Tableau:
    """Canonical tableau ``[A | b]`` with objective row appended last."""

    def __init__(self, T, basis):
        self.T = T
        self.basis = basis
        self.pivots = 0

    def pivot(self, i, j):
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        rows = np.flatnonzero(col)
        T[rows] -= np.outer(col[rows], T[i])
        T[:, j] = 0.0
        T[i, j] = 1.0
        self.basis[i] = j
        self.pivots += 1

    def run(self, allowed, max_pivots):
        """Bland's rule on the current objective row. Returns a status."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.pivots >= max_pivots:
                raise RuntimeError("simplex pivot limit exceeded")
            z = T[m, :-1]
            cand = np.flatnonzero((z < -OPT_TOL) & allowed)
            if cand.size == 0:
                return OPTIMAL
            j = int(cand[0])
            colj = T[:m, j]
            rows = np.flatnonzero(colj > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / colj[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            i = int(min(tied, key=lambda r: self.basis[r]))
            self.pivot(i, j)


def _to_standard(p):
    """Rewrite bounds and senses into ``A' y (=) b'`` with ``y >= 0``.

    Returns the expanded column blocks plus a recipe to map ``y`` back to ``x``.
    """
    n = p.c.shape[0]
    cols, costs, recipe = [], [], []
    shift_b = np.zeros_like(p.b)
    extra_rows = []  # (column index in y, upper bound) for boxed variables
    for j, (lo, hi) in enumerate(p.bounds):
        a, cj = p.A[:, j], p.c[j]
        if lo is not None and not np.isfinite(lo):
            lo = None
        if hi is not None and not np.isfinite(hi):
            hi = None
        if lo is not None:
            shift_b -= a * lo
            recipe.append(("lo", len(cols), float(lo)))
            if hi is not None:
                extra_rows.append((len(cols), float(hi) - float(lo)))
            cols.append(a)
            costs.append(cj)
        elif hi is not None:
            shift_b -= a * hi
            recipe.append(("hi", len(cols), float(hi)))
            cols.append(-a)
            costs.append(-cj)
        else:
            recipe.append(("free", len(cols), 0.0))
            cols.append(a)
            cols.append(-a)
            costs.extend([cj, -cj])
    ny = len(cols)
    m = p.A.shape[0]
    A = np.column_stack(cols) if cols else np.zeros((m, 0))
    b = p.b + shift_b
    senses = list(p.senses)
    if extra_rows:
        E = np.zeros((len(extra_rows), ny))
        for r, (col, ub) in enumerate(extra_rows):
            E[r, col] = 1.0
        A = np.vstack([A, E])
        b = np.concatenate([b, [ub for _, ub in extra_rows]])
        senses += ["<="] * len(extra_rows)
    assert n == len(recipe)
    return A, b, senses, np.asarray(costs, dtype=float), recipe


def _recover(y, recipe):
    x = np.empty(len(recipe))
    for j, (kind, col, off) in enumerate(recipe):
        if kind == "lo":
            x[j] = off + y[col]
        elif kind == "hi":
            x[j] = off - y[col]
        else:
            x[j] = y[col] - y[col + 1]
    return x


def simplex_solve(p, max_pivots=200_000):
    """Solve an :class:`LpProblem` with the two-phase simplex method.

    Infeasible and unbounded problems are reported through ``status``. The
    result is deterministic for a given input: Bland's rule picks the
    lowest-index entering column and breaks ratio ties by the lowest basic
    variable index.
    """
    if not isinstance(p, LpProblem):
        raise InvalidInputError("simplex_solve expects an LpProblem")
    A, b, senses, cost, recipe = _to_standard(p)
    sign = -1.0 if p.sense == "max" else 1.0
    cost = sign * cost
    m, ny = A.shape

    A = A.copy()
    b = b.copy()
    senses = list(senses)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    # crash basis: a column whose only non-zero is positive and sits in a row
    # that would otherwise need an artificial starts out basic
    needs_art = [s != "<=" for s in senses]
    crash = {}
    if any(needs_art) and ny:
        nz = A != 0.0
        single = np.flatnonzero(nz.sum(axis=0) == 1)
        for j in single:
            i = int(np.flatnonzero(nz[:, j])[0])
            if needs_art[i] and i not in crash and A[i, j] > 0:
                crash[i] = int(j)
        for i, j in crash.items():
            piv = A[i, j]
            A[i] /= piv
            b[i] /= piv
            needs_art[i] = False

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(needs_art)
    ncol = ny + n_slack + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ny] = A
    T[:m, -1] = b
    basis = [-1] * m
    s_col, a_col = ny, ny + n_slack
    for i, s in enumerate(senses):
        if s != "=":
            T[i, s_col] = 1.0 if s == "<=" else -1.0
            if s == "<=":
                basis[i] = s_col
            s_col += 1
        if i in crash:
            basis[i] = crash[i]
        elif needs_art[i]:
            T[i, a_col] = 1.0
            basis[i] = a_col
            a_col += 1
    tab = _Tableau(T, basis)
    is_art = np.zeros(ncol, dtype=bool)
    is_art[ny + n_slack:] = True

    if n_art:
        # phase 1: minimise the sum of artificials, written in canonical form
        T[m, :] = 0.0
        T[m, np.flatnonzero(is_art)] = 1.0
        for i in range(m):
            if is_art[basis[i]]:
                T[m] -= T[i]
        tab.run(np.ones(ncol, dtype=bool), max_pivots)
        infeas = -T[m, -1]
        if infeas > FEAS_TOL * max(1.0, float(np.max(np.abs(b), initial=0.0))):
            return LpSolution(INFEASIBLE, iterations=tab.pivots)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if is_art[tab.basis[i]]:
                row = T[i, :ncol]
                cand = np.flatnonzero((np.abs(row) > 1e-9) & ~is_art)
                if cand.size:
                    tab.pivot(i, int(cand[0]))
                    keep.append(i)
            else:
                keep.append(i)
        if len(keep) < m:
            T = np.vstack([T[keep], T[m:]])
            tab.T = T
            tab.basis = [tab.basis[i] for i in keep]
            m = len(keep)

    T = tab.T
    T[m, :] = 0.0
    T[m, :ny] = cost
    for i in range(m):
        j = tab.basis[i]
        if T[m, j] != 0.0:
            T[m] -= T[m, j] * T[i]
    status = tab.run(~is_art, max_pivots)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.pivots)

    y = np.zeros(ncol)
    for i in range(m):
        y[tab.basis[i]] = max(T[i, -1], 0.0)
    x = _recover(y[:ny], recipe)
    obj = float(p.c @ x)
    return LpSolution(OPTIMAL, x, obj, tab.pivots, _dual_nondegenerate(T, tab.basis, is_art, recipe))


def _dual_nondegenerate(T, basis, is_art, recipe):
    """True when every relevant non-basic reduced cost is strictly positive.

    That certifies a unique optimum. The mirror column of a split free
    variable whose partner is basic is skipped: moving along it leaves ``x``
    unchanged.
    """
    z = T[-1, :-1]
    check = ~is_art.copy()
    check[list(basis)] = False
    in_basis = set(basis)
    for kind, col, _ in recipe:
        if kind == "free":
            if col in in_basis:
                check[col + 1] = False
            elif col + 1 in in_basis:
                check[col] = False
    return bool(np.all(z[check] > OPT_TOL))
