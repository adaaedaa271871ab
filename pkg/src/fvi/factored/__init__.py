"""Factored MDP model, flattening oracle, uniform-covering tools and benchmarks."""
from fvi.factored.aux import UcReport, aux_projector, build_aux_mdp, check_uc
from fvi.factored.model import (FLATTEN_CAP, BasisSet, FactoredMdp,
                                LocalScopeFunction, TransitionFactor, VarSpace,
                                assignments, decode, eval_reward,
                                eval_transition, flatten, flatten_basis,
                                local_index, reward_vectors, validate_fmdp)
from fvi.factored.sysadmin import build_sysadmin, gen_sysadmin

__all__ = [
    "UcReport", "aux_projector", "build_aux_mdp", "check_uc",
    "FLATTEN_CAP", "BasisSet", "FactoredMdp", "LocalScopeFunction", "TransitionFactor",
    "VarSpace", "assignments", "decode", "eval_reward", "eval_transition", "flatten",
    "flatten_basis", "local_index", "reward_vectors", "validate_fmdp",
    "build_sysadmin", "gen_sysadmin",
]
