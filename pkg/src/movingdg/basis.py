"""Polynomial bases on the reference cell [0, 1] and Gauss-Legendre quadrature.

Field variables (state and auxiliary flux) use a modal basis that is
orthonormal in L2(0, 1), i.e. scaled Legendre polynomials, so cellwise mass
matrices are identities.  Mesh coordinates use a nodal Lagrange basis at
Gauss-Lobatto points: inter-cell continuity then reduces to sharing the
endpoint values, and the endpoint dofs are the physical vertex positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError

MAX_QUADRATURE_POINTS = 64


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points in (0, 1) with positive weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)

    def integrate(self, values: np.ndarray) -> float:
        """Integrate samples taken at the quadrature points over [0, 1]."""
        return float(np.dot(self.weights, values))


def gauss_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with n points mapped to [0, 1], exact to degree 2n-1."""
    if not 1 <= n <= MAX_QUADRATURE_POINTS:
        raise ConfigError(f"quadrature point count must be in [1, {MAX_QUADRATURE_POINTS}], got {n}")
    t, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(points=0.5 * (t + 1.0), weights=0.5 * w)


def _legendre_tables(degree: int, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and xi-derivatives of Legendre polynomials P_0..P_degree at xi in [0, 1].

    Uses the recurrence P'_i = P'_{i-2} + (2i-1) P_{i-1} on t = 2 xi - 1,
    with d/dxi = 2 d/dt.
    """
    t = 2.0 * np.asarray(xi, dtype=float) - 1.0
    vals = np.polynomial.legendre.legvander(t, degree)
    derivs = np.zeros_like(vals)
    if degree >= 1:
        derivs[..., 1] = 1.0
    for i in range(2, degree + 1):
        derivs[..., i] = derivs[..., i - 2] + (2 * i - 1) * vals[..., i - 1]
    return vals, 2.0 * derivs


class ModalBasis:
    """Orthonormal Legendre basis on [0, 1]: phi_i(xi) = sqrt(2i+1) P_i(2 xi - 1)."""

    def __init__(self, degree: int):
        if degree < 0:
            raise ConfigError(f"basis degree must be nonnegative, got {degree}")
        self.degree = degree
        self.dim = degree + 1
        self._scale = np.sqrt(2.0 * np.arange(self.dim) + 1.0)

    def eval(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """Return (values, xi-derivatives), shape (..., dim), at points xi in [0, 1]."""
        vals, derivs = _legendre_tables(self.degree, np.asarray(xi, dtype=float))
        return vals * self._scale, derivs * self._scale

    def __repr__(self) -> str:
        return f"ModalBasis(degree={self.degree})"


@lru_cache(maxsize=None)
def gauss_lobatto_points(degree: int) -> np.ndarray:
    """The degree+1 Gauss-Lobatto nodes on [0, 1] (endpoints included)."""
    if degree < 1:
        raise ConfigError(f"Gauss-Lobatto nodes need degree >= 1, got {degree}")
    if degree == 1:
        interior = np.array([])
    else:
        coeffs = np.zeros(degree + 1)
        coeffs[degree] = 1.0
        interior = np.polynomial.legendre.legroots(np.polynomial.legendre.legder(coeffs))
    t = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    return 0.5 * (t + 1.0)


class NodalBasis:
    """Lagrange basis at Gauss-Lobatto nodes on [0, 1].

    Basis functions are represented exactly in the orthonormal Legendre
    basis (coefficients from inverting the nodal Vandermonde), which keeps
    evaluation of values and derivatives stable for the moderate degrees
    used here.
    """

    def __init__(self, degree: int):
        self.degree = degree
        self.dim = degree + 1
        self.nodes = gauss_lobatto_points(degree)
        modal = ModalBasis(degree)
        vander, _ = modal.eval(self.nodes)
        self._modal = modal
        self._coeffs = np.linalg.inv(vander)  # column i: modal coefficients of L_i

    def eval(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """Return (values, xi-derivatives), shape (..., dim), at points xi in [0, 1]."""
        vals, derivs = self._modal.eval(xi)
        return vals @ self._coeffs, derivs @ self._coeffs

    def __repr__(self) -> str:
        return f"NodalBasis(degree={self.degree})"


def basis_eval(basis, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of all basis functions at a single point."""
    vals, derivs = basis.eval(np.asarray([xi], dtype=float))
    return vals[0], derivs[0]


def default_rule(p_field: int, p_geometry: int) -> QuadratureRule:
    """Default over-integrated rule: p_max + p_u + 2 points per cell."""
    return gauss_rule(max(p_field, 1) + max(p_geometry, 1) + 2)
