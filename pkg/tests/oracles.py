"""Brute-force reference implementations used as independent test oracles.

Nothing here shares code with the package beyond numpy.
"""
import itertools

import numpy as np


def lp_by_vertices(c, A_ub, b_ub, lower=None, tol=1e-9):
    """Minimise ``c @ x`` over ``{A_ub x <= b_ub, x >= lower}`` by enumerating vertices.

    Returns the optimal objective, or ``None`` when no vertex is feasible.
    Only valid for bounded feasible regions (callers add a box).
    """
    c = np.asarray(c, float)
    n = c.size
    lower = np.zeros(n) if lower is None else np.asarray(lower, float)
    G = np.vstack([A_ub, -np.eye(n)])
    h = np.concatenate([b_ub, -lower])
    best = None
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + tol):
            val = float(c @ x)
            best = val if best is None else min(best, val)
    return best


def flat_from_factors(sizes, factors, rewards, n_actions):
    """Flat ``P`` (A, N, N) and ``r`` (A, N) by direct per-state loops.

    ``factors[i] = (parents, table)`` with ``table[a, parent_row, value]``;
    ``rewards`` is a list of ``(scope, table[a, assignment])``. Little-endian
    indexing throughout.
    """
    m = len(sizes)
    states = list(itertools.product(*[range(n) for n in reversed(sizes)]))
    states = [tuple(reversed(s)) for s in states]
    N = len(states)

    def row(vals, scope):
        idx, stride = 0, 1
        for i in scope:
            idx += vals[i] * stride
            stride *= sizes[i]
        return idx

    P = np.zeros((n_actions, N, N))
    r = np.zeros((n_actions, N))
    for a in range(n_actions):
        for xi, x in enumerate(states):
            for yi, y in enumerate(states):
                p = 1.0
                for i in range(m):
                    parents, table = factors[i]
                    p *= table[a, row(x, parents), y[i]]
                P[a, xi, yi] = p
            r[a, xi] = sum(table[a, row(x, scope)] for scope, table in rewards)
    return P, r, states


def l1_fit_value(H, v):
    """Optimal ``||Hw - v||_1`` for a single-column ``H`` via weighted median."""
    h = np.asarray(H, float).reshape(-1)
    v = np.asarray(v, float)
    mask = h != 0
    cand = v[mask] / h[mask]
    return min(float(np.sum(np.abs(h * t - v))) for t in np.append(cand, 0.0))


def enumerate_policies_value(P, r, gamma):
    """Optimal values by evaluating every deterministic policy."""
    A, N, _ = P.shape
    best = np.full(N, -np.inf)
    for pol in itertools.product(range(A), repeat=N):
        idx = np.arange(N)
        v = np.linalg.solve(np.eye(N) - gamma * P[list(pol), idx, :], r[list(pol), idx])
        best = np.maximum(best, v)
    return best
