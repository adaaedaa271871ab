"""SysAdmin benchmark: a network of machines that fail and get rebooted.

Machine ``i`` is a binary variable (1 = working, 0 = faulty). Action ``i``
reboots machine ``i``; the last action is ``noop``. A working machine fails
with noisy-OR probability ``1 - (1 - p_fail) * (1 - p_spread) ** f`` where
``f`` counts its faulty neighbours; a faulty machine stays faulty until
rebooted, and a rebooted machine is working in the next step. Reward is the
number of working machines. The default basis is a constant plus one
"machine i works" indicator per machine.
"""
import numpy as np

from fvi.errors import InvalidInputError
from fvi.factored.model import (BasisSet, FactoredMdp, LocalScopeFunction,
                                TransitionFactor, VarSpace, assignments)

TOPOLOGIES = ("ring", "star")


def neighbours(m, topology):
    if topology == "ring":
        return [sorted({(i - 1) % m, (i + 1) % m} - {i}) for i in range(m)]
    if topology == "star":
        return [list(range(1, m))] + [[0] for _ in range(1, m)]
    raise InvalidInputError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def build_sysadmin(m, topology="ring", seed=0, p_fail=0.05, p_spread=0.1, gamma=0.95, jitter=0.0):
    """SysAdmin instance as ``(FactoredMdp, BasisSet)``.

    ``jitter > 0`` perturbs each machine's failure and spreading
    probabilities multiplicatively by a seeded factor in ``[1-jitter, 1+jitter]``;
    with the default ``jitter = 0`` the seed has no effect.
    """
    m = int(m)
    if m < 2:
        raise InvalidInputError("SysAdmin needs at least two machines")
    if not 0.0 <= jitter < 1.0:
        raise InvalidInputError("jitter must lie in [0, 1)")
    nbrs = neighbours(m, topology)
    rng = np.random.default_rng(seed)
    scale = 1.0 + jitter * rng.uniform(-1.0, 1.0, size=(m, 2)) if jitter else np.ones((m, 2))
    names = tuple(f"m{i}" for i in range(m))
    space = VarSpace((2,) * m, names)
    actions = tuple(f"reboot_{nm}" for nm in names) + ("noop",)
    n_act = m + 1

    factors = []
    for i in range(m):
        parents = tuple(sorted({i, *nbrs[i]}))
        pf = min(p_fail * scale[i, 0], 1.0)
        ps = min(p_spread * scale[i, 1], 1.0)
        table = np.zeros((n_act, 2 ** len(parents), 2))
        for row, asg in enumerate(assignments((2,) * len(parents))):
            values = dict(zip(parents, asg))
            faulty_nbrs = sum(1 for j in nbrs[i] if values[j] == 0)
            if values[i] == 1:
                fail = 1.0 - (1.0 - pf) * (1.0 - ps) ** faulty_nbrs
                dist = (fail, 1.0 - fail)
            else:
                dist = (1.0, 0.0)
            table[:, row] = dist
        table[i, :] = (0.0, 1.0)
        factors.append(TransitionFactor(i, parents, (2,) * len(parents), table))

    rewards = tuple(LocalScopeFunction((i,), (2,), np.tile([0.0, 1.0], (n_act, 1))) for i in range(m))
    fmdp = FactoredMdp(space, actions, tuple(factors), rewards, gamma, (1,) * m)
    basis = BasisSet((LocalScopeFunction((), (), [1.0]),)
                     + tuple(LocalScopeFunction((i,), (2,), [0.0, 1.0]) for i in range(m)))
    return fmdp, basis


def gen_sysadmin(m, topology="ring", seed=0, **params):
    """SysAdmin instance as a model document (see :mod:`fvi.modelfile`)."""
    from fvi.modelfile import to_document
    return to_document(*build_sysadmin(m, topology, seed, **params))
