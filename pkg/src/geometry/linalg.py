"""
Small dense linear algebra over floats or dual numbers.

Float inputs go straight to numpy; object arrays (dual-number entries) use
Gaussian elimination with partial pivoting on the primal values, so that
derivatives propagate through solves exactly.
"""
import numpy as np

from ..config import settings
from ..errors import RegularityError
from ..expr.dual import primal, reciprocal, scale


def is_generic(a: np.ndarray) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def primal_array(a: np.ndarray) -> np.ndarray:
    if not is_generic(a):
        return np.asarray(a, dtype=float)
    return np.vectorize(lambda v: float(primal(v)), otypes=[float])(a)


def check_rank(matrix: np.ndarray, what: str = "frame", rank_tol: float = None) -> None:
    """Raise RegularityError when the smallest singular value is below the relative cutoff."""
    rank_tol = settings.rank_tol if rank_tol is None else rank_tol
    s = np.linalg.svd(primal_array(matrix), compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] < rank_tol * s[0]:
        ratio = 0.0 if s.size == 0 or s[0] == 0.0 else s[-1] / s[0]
        raise RegularityError(f"{what} is numerically rank deficient (singular value ratio {ratio:.3e})")


def solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for square A; B may be a vector or a matrix."""
    if not is_generic(A) and not is_generic(B):
        try:
            return np.linalg.solve(np.asarray(A, dtype=float), np.asarray(B, dtype=float))
        except np.linalg.LinAlgError as e:
            raise RegularityError(f"Singular matrix: {e}") from e
    A = np.array(A, dtype=object)
    B = np.array(B, dtype=object)
    vector = B.ndim == 1
    if vector:
        B = B.reshape(-1, 1)
    size = A.shape[0]
    M = np.concatenate([A, B], axis=1)
    magnitude = max(np.abs(primal_array(A)).max(), 1e-300)
    for col in range(size):
        pivot = col + int(np.argmax(np.abs(primal_array(M[col:, col]))))
        if abs(float(primal(M[pivot, col]))) <= 1e-14 * magnitude:
            raise RegularityError("Singular matrix in generic solve")
        if pivot != col:
            M[[col, pivot]] = M[[pivot, col]]
        for row in range(col + 1, size):
            factor = M[row, col] / M[col, col]
            M[row, col:] = M[row, col:] - scale(M[col, col:], factor)
    X = np.empty((size, B.shape[1]), dtype=object)
    for row in range(size - 1, -1, -1):
        acc = M[row, size:]
        for j in range(row + 1, size):
            acc = acc - scale(X[j], M[row, j])
        X[row] = scale(acc, reciprocal(M[row, row]))
    return X[:, 0] if vector else X



def check_rank_batch(matrices: np.ndarray, what: str = "frame", rank_tol: float = None) -> None:
    """check_rank over a stack of float matrices, one batched SVD."""
    rank_tol = settings.rank_tol if rank_tol is None else rank_tol
    matrices = np.asarray(matrices, dtype=float)
    if not np.all(np.isfinite(matrices)):
        raise RegularityError(f"{what} has non-finite entries")
    s = np.linalg.svd(matrices, compute_uv=False)
    bad = (s[:, 0] == 0.0) | (s[:, -1] < rank_tol * s[:, 0])
    if np.any(bad):
        first = int(np.argmax(bad))
        ratio = 0.0 if s[first, 0] == 0.0 else s[first, -1] / s[first, 0]
        raise RegularityError(f"{what} is numerically rank deficient at batch entry {first} (singular value ratio {ratio:.3e})")
