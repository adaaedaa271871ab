"""Random model builders shared by the test modules."""
import numpy as np

from fvi.factored import (BasisSet, FactoredMdp, LocalScopeFunction,
                          TransitionFactor, VarSpace)


def random_scope(rng, m, max_size, include=None):
    size = int(rng.integers(0, max_size + 1))
    pool = [i for i in range(m) if i != include]
    chosen = set(rng.choice(pool, size=min(size, len(pool)), replace=False).tolist()) if pool else set()
    if include is not None:
        chosen.add(include)
    return tuple(sorted(chosen))


def random_fmdp(rng, sizes, n_actions=2, max_parents=2, n_rewards=2, n_basis=3, max_scope=2,
                gamma=0.9, nonneg_basis=False):
    """Random factored MDP plus basis; parents always include the variable itself."""
    sp = VarSpace(tuple(sizes))
    m = sp.m
    factors = []
    for i in range(m):
        parents = random_scope(rng, m, max_parents, include=i)
        psizes = sp.scope_sizes(parents)
        n_par = int(np.prod(psizes)) if parents else 1
        table = rng.dirichlet(np.ones(sizes[i]), size=(n_actions, n_par))
        factors.append(TransitionFactor(i, parents, psizes, table))
    rewards = []
    for _ in range(n_rewards):
        Z = random_scope(rng, m, max_scope)
        n = int(np.prod(sp.scope_sizes(Z))) if Z else 1
        rewards.append(LocalScopeFunction(Z, sp.scope_sizes(Z), rng.uniform(-1, 1, size=(n_actions, n))))
    basis = [LocalScopeFunction((), (), [1.0])]
    for _ in range(n_basis - 1):
        Z = random_scope(rng, m, max_scope)
        n = int(np.prod(sp.scope_sizes(Z))) if Z else 1
        lo = 0.0 if nonneg_basis else -1.0
        basis.append(LocalScopeFunction(Z, sp.scope_sizes(Z), rng.uniform(lo, 1, size=n)))
    fmdp = FactoredMdp(sp, tuple(f"a{j}" for j in range(n_actions)), tuple(factors), tuple(rewards), gamma)
    return fmdp, BasisSet(tuple(basis))


def random_uc_basis(rng, N, K):
    """Non-negative N x K matrix with unit row sums and no empty column."""
    while True:
        H = rng.uniform(0, 1, size=(N, K)) * (rng.uniform(size=(N, K)) < 0.6)
        H[np.arange(N), rng.integers(0, K, size=N)] += 0.1
        H /= H.sum(axis=1, keepdims=True)
        if np.all(H.sum(axis=0) > 0):
            return H
