"""Uniform-covering bases and the auxiliary observation MDP.

With a non-negative basis whose rows each sum to one, ``H[x, s]`` reads as
the probability of observing ``s`` in hidden state ``x``. Bayes' rule under
a uniform prior gives ``Pr(x | s) = H[x, s] / sum_x'' H[x'', s]``.
"""
from dataclasses import dataclass

import numpy as np

from fvi.errors import InvalidInputError
from fvi.linalg import as_matrix
from fvi.projection import Projector, column_normalized
from fvi.tabular import FlatMdp

UC_TOL = 1e-9


@dataclass(frozen=True)
class UcReport:
    is_uc: bool
    row_sum: float


def check_uc(H):
    """Uniform covering: all entries non-negative and all row sums equal."""
    H = as_matrix(H, "H")
    sums = H.sum(axis=1)
    if sums.size == 0:
        return UcReport(False, float("nan"))
    ok = bool(np.all(H >= 0) and np.max(np.abs(sums - sums[0])) <= UC_TOL)
    return UcReport(ok, float(sums[0]))


def aux_projector(H):
    """The linear projection ``N_c(H)^T`` whose AVI the auxiliary MDP mirrors."""
    H = as_matrix(H, "H")
    return Projector.explicit(column_normalized(H).T, H)


def build_aux_mdp(flat, H):
    """Auxiliary MDP over the K observation states of a stochastic basis ``H``.

    ``Pbar[a] = N_c(H)^T P[a] H`` and ``rbar[a] = N_c(H)^T r[a]``; the start
    observation is state 0.
    """
    H = as_matrix(H, "H")
    if H.shape[0] != flat.n_states:
        raise InvalidInputError(f"H has {H.shape[0]} rows for {flat.n_states} states")
    uc = check_uc(H)
    if not uc.is_uc:
        raise InvalidInputError("basis matrix does not have the uniform covering property")
    if abs(uc.row_sum - 1.0) > UC_TOL:
        raise InvalidInputError(f"basis rows sum to {uc.row_sum}; rescale H to be stochastic")
    post = column_normalized(H).T
    Pbar = post @ flat.P @ H
    rbar = flat.r @ post.T
    return FlatMdp(Pbar, rbar, flat.gamma, 0)
