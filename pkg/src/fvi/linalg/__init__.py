"""Dense kernel: pseudoinverse, simplex LP solver, Frank-Wolfe constrained least squares."""
from fvi.linalg.dense import as_matrix, as_vector, inf_norm, mat_pinv
from fvi.linalg.frank_wolfe import frank_wolfe_cls
from fvi.linalg.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem,
                                LpSolution, simplex_solve)

__all__ = [
    "as_matrix", "as_vector", "inf_norm", "mat_pinv", "frank_wolfe_cls",
    "LpProblem", "LpSolution", "simplex_solve", "OPTIMAL", "INFEASIBLE", "UNBOUNDED",
]
