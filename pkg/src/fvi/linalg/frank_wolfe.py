import numpy as np

from fvi.errors import InvalidInputError
from fvi.linalg.dense import as_matrix, as_vector, inf_norm
from fvi.linalg.simplex import LpProblem, simplex_solve

FW_GAP_TOL = 1e-8
FW_MAX_ITER = 10_000


def _box_lmo(H, cap):
    """Linear minimisation oracle over ``{w : ||Hw||_inf <= cap}``."""
    N, K = H.shape
    A = np.vstack([H, -H])
    b = np.full(2 * N, cap)
    senses = ("<=",) * (2 * N)
    bounds = ((None, None),) * K

    def lmo(g):
        sol = simplex_solve(LpProblem(g, A, senses, b, bounds))
        if not sol.optimal:
            raise RuntimeError(f"linear minimisation oracle failed: {sol.status}")
        return sol.x

    return lmo


def frank_wolfe_cls(H, v, cap, tol=FW_GAP_TOL, max_iter=FW_MAX_ITER):
    """Minimise ``||Hw - v||_2^2`` subject to ``||Hw||_inf <= cap``.

    Away-step Frank-Wolfe with exact line search; the simplex solver acts as
    the linear minimisation oracle. Stops once the Frank-Wolfe duality gap
    drops to ``tol`` or after ``max_iter`` iterations.

    Returns:
        the weight vector ``w`` (length ``K``), feasible to within 1e-9.
    """
    H = as_matrix(H, "H")
    N, K = H.shape
    v = as_vector(v, N, "v")
    cap = float(cap)
    if not np.isfinite(cap) or cap < 0:
        raise InvalidInputError(f"cap must be a finite non-negative number, got {cap}")
    if cap == 0.0 or not np.any(H):
        return np.zeros(K)

    lmo = _box_lmo(H, cap)

    def grad(w):
        return 2.0 * H.T @ (H @ w - v)

    # active set: vertex key -> (vertex, convex weight)
    s0 = lmo(grad(np.zeros(K)))
    active = {s0.tobytes(): [s0, 1.0]}
    w = s0.copy()
    for _ in range(max_iter):
        g = grad(w)
        s = lmo(g)
        d_fw = s - w
        gap = -float(g @ d_fw)
        if gap <= tol:
            break
        away_key = max(active, key=lambda k: float(g @ active[k][0]))
        a, alpha_a = active[away_key]
        d_aw = w - a
        if gap >= -float(g @ d_aw) or len(active) == 1:
            d, step_max, fw_step = d_fw, 1.0, True
        else:
            d, step_max, fw_step = d_aw, alpha_a / (1.0 - alpha_a), False
        Hd = H @ d
        curv = 2.0 * float(Hd @ Hd)
        slope = float(g @ d)
        step = step_max if curv <= 0.0 else min(step_max, max(0.0, -slope / curv))
        if step <= 0.0:
            break
        w = w + step * d
        if fw_step:
            for item in active.values():
                item[1] *= 1.0 - step
            key = s.tobytes()
            if step >= 1.0:
                active = {key: [s, 1.0]}
            elif key in active:
                active[key][1] += step
            else:
                active[key] = [s, step]
        else:
            for item in active.values():
                item[1] *= 1.0 + step
            active[away_key][1] -= step
            if step >= step_max or active[away_key][1] <= 1e-15:
                del active[away_key]
    excess = inf_norm(H @ w)
    if excess > cap:
        w = w * (cap / excess)
    return w
