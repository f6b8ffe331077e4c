"""Legendre polynomials, the orthonormal modal basis and Gauss-Legendre rules.

All functions here live on the reference interval [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

MAX_DERIV = 3


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return self.points.size

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples at ``points`` over [-1, 1] (last axis is contracted)."""
        return np.asarray(values) @ self.weights


def _check_deriv(deriv_order: int) -> None:
    if not 0 <= deriv_order <= MAX_DERIV:
        raise ValueError(f"derivative order must be in 0..{MAX_DERIV}, got {deriv_order}")


def legendre_eval(degree: int, deriv_order: int, xi):
    """Evaluate the ``deriv_order``-th derivative of P_degree at ``xi``."""
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    _check_deriv(deriv_order)
    c = np.zeros(degree + 1)
    c[degree] = 1.0
    if deriv_order:
        c = legendre.legder(c, deriv_order)
    return legendre.legval(xi, c)


def orthonormal_basis_eval(i: int, deriv_order: int, xi):
    """b_i(xi) = sqrt((2i + 1)/2) P_i(xi), orthonormal in L2(-1, 1)."""
    return np.sqrt(0.5 * (2 * i + 1)) * legendre_eval(i, deriv_order, xi)


def basis_matrix(k: int, deriv_order: int, xi) -> np.ndarray:
    """Matrix ``V[q, i] = b_i^{(d)}(xi_q)`` for i = 0..k."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.stack([orthonormal_basis_eval(i, deriv_order, xi) for i in range(k + 1)], axis=-1)


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> QuadratureRule:
    if n < 1:
        raise ValueError(f"a Gauss rule needs at least one point, got {n}")
    x, w = legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


@dataclass(frozen=True)
class ReferenceElement:
    """Precomputed reference quantities for the degree-k orthonormal basis.

    ``trace[d, e, i]`` holds the d-th derivative of b_i at the left (e = 0,
    xi = -1) or right (e = 1, xi = +1) endpoint, for d = 0, 1, 2.
    ``vol3[l, i]`` is the exact integral of b_l * b_i''' over [-1, 1].
    """

    k: int
    trace: np.ndarray
    vol3: np.ndarray


@lru_cache(maxsize=None)
def reference_element(k: int) -> ReferenceElement:
    ends = np.array([-1.0, 1.0])
    trace = np.stack([basis_matrix(k, d, ends) for d in range(3)])

    rule = gauss_rule(k + 1)
    b = basis_matrix(k, 0, rule.points)
    b3 = basis_matrix(k, 3, rule.points)
    vol3 = np.einsum("q,ql,qi->li", rule.weights, b, b3)

    for a in (trace, vol3):
        a.setflags(write=False)
    return ReferenceElement(k, trace, vol3)
