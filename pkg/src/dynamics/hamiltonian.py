"""
Sub-Hamiltonian η = ½ F*(i*p)², the anchor map E and the sub-Hamiltonian vector field.
"""
from collections import OrderedDict
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np

from ..geometry.linalg import check_rank, check_rank_batch
from ..metric.legendre import legendre_inverse

if TYPE_CHECKING:
    from ..systems.models import System

CACHE_SIZE = 64


class SubHamiltonian:
    """η and its derivatives for one system, caching frame evaluations per base point."""

    def __init__(self, system: "System"):
        self.system = system
        self.metric = system.metric
        self._frames: "OrderedDict[bytes, Tuple[np.ndarray, np.ndarray]]" = OrderedDict()
        self._inverse_Q = None
        if self.metric.is_quadratic and getattr(self.metric, "constant", False):
            self._inverse_Q = np.linalg.inv(np.asarray(self.metric.quadratic_part([]), dtype=float))

    def frame(self, x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """(X, dX) at x; see Frame.jacobian."""
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        cached = self._frames.get(key)
        if cached is not None:
            self._frames.move_to_end(key)
            return cached
        X, dX = self.system.frame.jacobian(x)
        check_rank(X)
        self._frames[key] = (X, dX)
        if len(self._frames) > CACHE_SIZE:
            self._frames.popitem(last=False)
        return X, dX

    def restrict(self, x: Sequence[float], p: Sequence[float]) -> np.ndarray:
        """p̂_i = ⟨p, X_i(x)⟩."""
        X, _ = self.frame(x)
        return X.T @ np.asarray(p, dtype=float)

    def controls(self, x: Sequence[float], p: Sequence[float]) -> np.ndarray:
        """u = 𝓛⁻¹(p̂); zero for p ∈ D⁰ with a quadratic metric."""
        p_hat = self.restrict(x, p)
        if self._inverse_Q is not None:
            return self._inverse_Q @ p_hat
        return legendre_inverse(self.metric, x, p_hat)

    def eta(self, x: Sequence[float], p: Sequence[float]) -> float:
        p_hat = self.restrict(x, p)
        if self.metric.is_quadratic:
            u = self.controls(x, p)
            return 0.5 * float(p_hat @ u)
        if not np.any(p_hat):
            return 0.0
        # ⟨p̂, u⟩ = F(u)² for u = 𝓛⁻¹(p̂), so η = L(x, u)
        return float(self.metric.lagrangian(list(x), list(self.controls(x, p))))

    def anchor(self, x: Sequence[float], p: Sequence[float]) -> np.ndarray:
        X, _ = self.frame(x)
        return X @ self.controls(x, p)

    def vector_field(self, x: Sequence[float], p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ẋ, ṗ, u) with ẋ = ∂η/∂p and ṗ = −∂η/∂x.

        With η(x, p) = H(x, Xᵀp) and ∂H/∂p̂ = u, ∂H/∂x = −∂L/∂x(x, u):
        ∂η/∂x_m = Σ p_j ∂_m X_i^j u_i − ∂L/∂x_m(x, u).
        """
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        X, dX = self.frame(x)
        u = self.controls(x, p)
        x_dot = X @ u
        if np.any(u):
            dL_dx = self.metric.grad_x(x, u)
        else:
            dL_dx = np.zeros(len(x))
        d_eta = np.einsum("j,jim,i->m", p, dX, u) - dL_dx
        return x_dot, -d_eta, u

    def vector_field_batch(self, xs: np.ndarray, ps: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(ẋ, ṗ) for N stacked states; a single frame pass when Q is constant, a point loop otherwise."""
        xs = np.asarray(xs, dtype=float)
        ps = np.asarray(ps, dtype=float)
        if self._inverse_Q is None:
            rows = [self.vector_field(x, p) for x, p in zip(xs, ps)]
            return np.array([r[0] for r in rows]), np.array([r[1] for r in rows])
        X, dX = self.system.frame.jacobian_batch(xs)
        check_rank_batch(X)
        u = np.einsum("bjk,bj->bk", X, ps) @ self._inverse_Q
        x_dot = np.einsum("bjk,bk->bj", X, u)
        # constant Q: ∂L/∂x vanishes
        d_eta = np.einsum("bj,bjim,bi->bm", ps, dX, u)
        return x_dot, -d_eta


def eta(system: "System", x: Sequence[float], p: Sequence[float]) -> float:
    """½ F*(p̂)² with p̂ the restriction of p to D_x."""
    return SubHamiltonian(system).eta(x, p)


def anchor_E(system: "System", x: Sequence[float], p: Sequence[float]) -> np.ndarray:
    """
    E(p) = Σ u_i X_i(x) with u the Legendre preimage of p̂.

    Raises:
        DomainError: for p ∈ D⁰ with a non-quadratic metric
    """
    return SubHamiltonian(system).anchor(x, p)


def hamiltonian_vector_field(system: "System", x: Sequence[float], p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    x_dot, p_dot, _ = SubHamiltonian(system).vector_field(x, p)
    return x_dot, p_dot
