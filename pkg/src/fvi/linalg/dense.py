import numpy as np

from fvi.errors import InvalidInputError

# relative singular-value cutoff for the pseudoinverse
PINV_RCOND = 1e-12


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float64 array (copy-free when possible)."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def as_vector(v, n=None, name="vector"):
    x = np.asarray(v, dtype=float).reshape(-1)
    if n is not None and x.shape[0] != n:
        raise InvalidInputError(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return x


def inf_norm(M):
    """Induced max-norm: largest absolute row sum (max |x| for vectors)."""
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        return 0.0
    if A.ndim == 1:
        return float(np.max(np.abs(A)))
    return float(np.max(np.sum(np.abs(A), axis=1)))


def mat_pinv(M):
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``PINV_RCOND * s_max`` are treated as zero, so
    rank-deficient inputs give a bounded result instead of blowing up.
    """
    A = as_matrix(M)
    rows, cols = A.shape
    if A.size == 0:
        return np.zeros((cols, rows))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((cols, rows))
    keep = s > PINV_RCOND * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T
