"""
Frame evaluation, Lie brackets, bracket-generating diagnostics and projections.
"""
from typing import TYPE_CHECKING, Any, Callable, List, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from ..config import settings
from ..errors import NotGenerating
from ..expr.dual import DualNumber, jacobian, split
from ..logger import logger
from .linalg import check_rank, solve
from .models import ProjectionSplit

if TYPE_CHECKING:
    from ..systems.models import System

VectorField = Callable[[Sequence[Any]], List[Any]]


def frame_matrix(system: "System", x: Sequence[float]) -> np.ndarray:
    """
    Evaluate the frame at x as an n×k matrix.

    Raises:
        RegularityError: if the columns are numerically dependent
    """
    X = system.frame.matrix(np.asarray(x, dtype=float))
    check_rank(X)
    return X


def bracket(V: VectorField, W: VectorField) -> VectorField:
    """[V, W] = (V·∇)W − (W·∇)V as a new generic vector field."""

    def field(x: Sequence[Any]) -> List[Any]:
        v_values, dV = jacobian(V, x)
        w_values, dW = jacobian(W, x)
        n = len(x)
        out = []
        for j in range(n):
            acc = 0.0
            for m in range(n):
                acc = acc + dW[j][m] * v_values[m] - dV[j][m] * w_values[m]
            out.append(acc)
        return out

    return field


def lie_bracket(system: "System", i: int, j: int, x: Sequence[float]) -> np.ndarray:
    """[X_i, X_j](x) by exact differentiation of the frame components."""
    frame = system.frame
    if not (0 <= i < frame.k and 0 <= j < frame.k):
        raise IndexError(f"Frame indices ({i}, {j}) out of range for rank {frame.k}")
    values = bracket(frame.field(i), frame.field(j))([float(v) for v in x])
    return np.array([float(v) for v in values])


def numerical_rank(vectors: np.ndarray, rank_tol: float = None) -> int:
    rank_tol = settings.rank_tol if rank_tol is None else rank_tol
    if vectors.size == 0:
        return 0
    s = np.linalg.svd(vectors, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def bracket_levels(system: "System", max_depth: int) -> List[List[Tuple[Tuple[int, ...], VectorField]]]:
    """Right-normed brackets [X_a, [X_b, ... X_c]] grouped by length, tagged by index word."""
    frame = system.frame
    levels = [[((i,), frame.field(i)) for i in range(frame.k)]]
    for _ in range(1, max_depth):
        nxt = []
        for word, field in levels[-1]:
            for i in range(frame.k):
                if len(word) == 1 and word[0] == i:
                    continue
                nxt.append(((i,) + word, bracket(frame.field(i), field)))
        levels.append(nxt)
    return levels


def bracket_generating_step(system: "System", x: Sequence[float], max_depth: int) -> int:
    """
    Smallest bracket length s whose brackets span the tangent space at x.

    Raises:
        NotGenerating: with the rank reached at max_depth
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    n = system.n
    point = [float(v) for v in x]
    vectors: List[np.ndarray] = []
    rank = 0
    for depth, level in enumerate(bracket_levels(system, max_depth), start=1):
        for _, field in level:
            vectors.append(np.array([float(v) for v in field(point)]))
        rank = numerical_rank(np.array(vectors))
        logger.debug(f"Bracket depth {depth}: rank {rank} of {n}")
        if rank == n:
            return depth
    raise NotGenerating(rank, n, max_depth)


def orthogonal_complement_frame(system: "System", x: Sequence[float]) -> List[np.ndarray]:
    """g-orthonormal basis of D^⊥ at x; empty when the distribution is the whole tangent space."""
    X = frame_matrix(system, x)
    n, k = X.shape
    if k == n:
        return []
    g = system.taming.matrix(np.asarray(x, dtype=float))
    N = null_space(X.T @ g)
    L = np.linalg.cholesky(N.T @ g @ N)
    W = N @ np.linalg.inv(L).T
    return [W[:, j] for j in range(W.shape[1])]


def projection_data(system: "System", x: Sequence[Any]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(X, g, S, A) at a possibly dual-valued point, with S = XᵀgX and A = S⁻¹Xᵀg.

    XA is the g-orthogonal projection onto D and A v are the frame
    coefficients of the horizontal part of v.
    """
    generic = any(isinstance(v, DualNumber) for v in x)
    if generic:
        X = system.frame.generic(x)
        g = system.taming.generic(x)
    else:
        x = np.asarray(x, dtype=float)
        X = system.frame.matrix(x)
        g = system.taming.matrix(x)
    check_rank(X)
    Xg = X.T @ g
    S = Xg @ X
    A = solve(S, Xg)
    return X, g, S, A


def projection_split(system: "System", x: Sequence[float]) -> ProjectionSplit:
    X, _, _, A = projection_data(system, x)
    P = X @ A
    Pperp = np.eye(P.shape[0]) - P
    return ProjectionSplit(P=P, Pperp=Pperp, Pstar=Pperp.T, Pstar_c=P.T)


def projection_derivative(system: "System", x: Sequence[float], w: Sequence[float]) -> np.ndarray:
    """Directional derivative of P at x along the tangent vector w."""
    point = [DualNumber(float(xi), np.array([float(wi)])) for xi, wi in zip(x, w)]
    X, _, _, A = projection_data(system, point)
    P = X @ A
    n = len(point)
    dP = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            dP[a, b] = float(split(P[a, b], 1, 1)[1][0])
    return dP


def lift_covector(system: "System", x: Sequence[float], p_hat: Sequence[float]) -> np.ndarray:
    """The covector p ∈ (D^⊥)⁰ with ⟨p, X_i⟩ = p̂_i, i.e. p = g X S⁻¹ p̂."""
    X, g, S, _ = projection_data(system, x)
    return g @ X @ np.linalg.solve(S, np.asarray(p_hat, dtype=float))


def annihilator_basis(system: "System", x: Sequence[float]) -> np.ndarray:
    """Orthonormal (Euclidean) basis of D⁰ at x as the columns of an n×(n−k) matrix."""
    X = frame_matrix(system, x)
    return null_space(X.T)


def horizontal_residual(system: "System", x: Sequence[float], v: Sequence[float]) -> float:
    """g-length of the component of v orthogonal to D_x."""
    proj = projection_split(system, x)
    g = system.taming.matrix(np.asarray(x, dtype=float))
    w = proj.Pperp @ np.asarray(v, dtype=float)
    return float(np.sqrt(max(w @ g @ w, 0.0)))
