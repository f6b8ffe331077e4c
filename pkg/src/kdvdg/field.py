"""Piecewise polynomial DG fields: evaluation, traces, projections and norms.

A field stores, for each cell, the coefficients of its restriction in the
orthonormal Legendre basis b_i of the reference interval. With that basis the
cell mass matrix is (h_j / 2) * I, which makes norms and the inverse mass
matrix trivial.

Functions passed to the Gauss-Radau projections are "smooth functions": callables
``g(x, deriv=0)`` returning the ``deriv``-th derivative at the points ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from kdvdg.basis import basis_matrix, gauss_rule, reference_element
from kdvdg.mesh import Mesh

SNAPSHOT_POINTS = 6


@dataclass(frozen=True, eq=False)
class DGField:
    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[0] != self.mesh.ncells:
            raise ValueError(
                f"coefficient array of shape {coeffs.shape} does not match "
                f"a mesh with {self.mesh.ncells} cells"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("field coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @classmethod
    def zeros(cls, mesh: Mesh, k: int) -> DGField:
        return cls(mesh, np.zeros((mesh.ncells, k + 1)))

    def __add__(self, other: DGField) -> DGField:
        return DGField(self.mesh, self.coeffs + other.coeffs)

    def __sub__(self, other: DGField) -> DGField:
        return DGField(self.mesh, self.coeffs - other.coeffs)

    def __mul__(self, alpha: float) -> DGField:
        return DGField(self.mesh, alpha * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> DGField:
        return DGField(self.mesh, -self.coeffs)


@dataclass(frozen=True, eq=False)
class StatePair:
    """The doubled unknown (u_h, phi_h); phi_h approximates the zero function."""

    u: DGField
    phi: DGField

    def __post_init__(self):
        if self.u.mesh is not self.phi.mesh or self.u.degree != self.phi.degree:
            raise ValueError("u and phi must share the same mesh and degree")

    @property
    def mesh(self) -> Mesh:
        return self.u.mesh

    @property
    def degree(self) -> int:
        return self.u.degree

    def as_array(self) -> np.ndarray:
        return np.stack([self.u.coeffs, self.phi.coeffs])

    @classmethod
    def from_array(cls, mesh: Mesh, data: np.ndarray) -> StatePair:
        return cls(DGField(mesh, data[0]), DGField(mesh, data[1]))

    def __add__(self, other: StatePair) -> StatePair:
        return StatePair(self.u + other.u, self.phi + other.phi)

    def __mul__(self, alpha: float) -> StatePair:
        return StatePair(alpha * self.u, alpha * self.phi)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TraceData:
    """One-sided limits at the N interfaces.

    ``minus[d, j]`` and ``plus[d, j]`` are the left and right limits of the d-th
    derivative (d = 0, 1, 2) at interface j, located at ``mesh.nodes[j]``.
    Interface 0 pairs the last cell (left) with the first cell (right).
    """

    minus: np.ndarray
    plus: np.ndarray

    @property
    def jump(self) -> np.ndarray:
        return self.plus - self.minus

    @property
    def mean(self) -> np.ndarray:
        return 0.5 * (self.plus + self.minus)


def derivative_scales(mesh: Mesh, nderiv: int = 3) -> np.ndarray:
    """``(2 / h_j)^d`` for d = 0..nderiv-1, shape (nderiv, N)."""
    return (2.0 / mesh.cell_sizes)[None, :] ** np.arange(nderiv)[:, None]


def cell_traces(coeffs: np.ndarray, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Physical derivatives 0..2 at the left and right end of every cell.

    ``coeffs`` may carry leading batch axes: (..., N, k+1) -> two arrays (..., 3, N).
    """
    k = coeffs.shape[-1] - 1
    ref = reference_element(k)
    scale = derivative_scales(mesh)
    left = np.einsum("...ni,di->...dn", coeffs, ref.trace[:, 0, :]) * scale
    right = np.einsum("...ni,di->...dn", coeffs, ref.trace[:, 1, :]) * scale
    return left, right


def interface_traces(coeffs: np.ndarray, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """(minus, plus) limits at each interface, each of shape (..., 3, N)."""
    left, right = cell_traces(coeffs, mesh)
    return np.roll(right, 1, axis=-1), left


def traces(field: DGField) -> TraceData:
    minus, plus = interface_traces(field.coeffs, field.mesh)
    return TraceData(minus, plus)


def _locate(mesh: Mesh, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # side="left" puts an interface point into the cell on its left
    idx = np.searchsorted(mesh.nodes, x, side="left") - 1
    x = np.where(idx < 0, x + 1.0, x)
    cell = idx % mesh.ncells
    xi = 2.0 * (x - mesh.centers[cell]) / mesh.cell_sizes[cell]
    return cell, np.clip(xi, -1.0, 1.0)


def evaluate(field: DGField, x, deriv: int = 0):
    """Evaluate a field (or its derivative) at points of [0, 1].

    At an interface the left limit is returned; x = 0 is the left limit at
    x = 1 through periodicity.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("evaluation points must lie in [0, 1]")
    flat = x.ravel()
    cell, xi = _locate(field.mesh, flat)
    b = basis_matrix(field.degree, deriv, xi)
    out = np.einsum("qi,qi->q", field.coeffs[cell], b)
    out *= (2.0 / field.mesh.cell_sizes[cell]) ** deriv
    return out.reshape(x.shape)


def sample(field: DGField, points_per_cell: int = SNAPSHOT_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced samples (endpoints included) in every cell, flattened in cell order."""
    xi = np.linspace(-1.0, 1.0, points_per_cell)
    x = field.mesh.to_physical(xi)
    vals = field.coeffs @ basis_matrix(field.degree, 0, xi).T
    return x.ravel(), vals.ravel()


def _quadrature_values(g: Callable, mesh: Mesh, npoints: int):
    rule = gauss_rule(npoints)
    x = mesh.to_physical(rule.points)
    return rule, np.asarray(g(x), dtype=float) * np.ones_like(x)


def l2_project(g: Callable, mesh: Mesh, k: int, npoints: int | None = None) -> DGField:
    """Cellwise L2 projection of ``g(x)`` onto piecewise P^k."""
    rule, gq = _quadrature_values(g, mesh, npoints or k + 4)
    b = basis_matrix(k, 0, rule.points)
    # (h/2) c_i = int g b_i dx = (h/2) sum_q w_q g_q b_i(xi_q)
    return DGField(mesh, np.einsum("nq,q,qi->ni", gq, rule.weights, b))


def gauss_radau_project(sign: str, g: Callable, mesh: Mesh, k: int) -> DGField:
    """Generalized Gauss-Radau projection P^+ (sign "+") or P^- (sign "-").

    P^- matches value, first and second derivative of ``g`` at the right end
    of each cell, P^+ at the left end; both keep the L2 moments against
    P^{k-3} (no moments when k = 2).
    """
    if k < 2:
        raise ValueError(f"Gauss-Radau projections need k >= 2, got {k}")
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")

    ref = reference_element(k)
    end = 0 if sign == "+" else 1
    xend = mesh.nodes[:-1] if sign == "+" else mesh.nodes[1:]
    scale = derivative_scales(mesh)

    n = mesh.ncells
    nmom = k - 2
    lhs = np.zeros((n, k + 1, k + 1))
    rhs = np.zeros((n, k + 1))
    if nmom:
        lhs[:, :nmom, :nmom] = np.eye(nmom)
        rhs[:, :nmom] = l2_project(g, mesh, k).coeffs[:, :nmom]
    for d in range(3):
        lhs[:, nmom + d, :] = scale[d][:, None] * ref.trace[d, end][None, :]
        rhs[:, nmom + d] = g(xend, d)

    try:
        coeffs = np.linalg.solve(lhs, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular Gauss-Radau system") from exc
    return DGField(mesh, coeffs)


def coupled_project(u: Callable, phi: Callable, mesh: Mesh, k: int) -> tuple[DGField, DGField]:
    """Coupled projection of (u, phi), computed locally from P^+(u + phi) and P^-(u - phi)."""
    plus = gauss_radau_project("+", lambda x, d=0: u(x, d) + phi(x, d), mesh, k)
    minus = gauss_radau_project("-", lambda x, d=0: u(x, d) - phi(x, d), mesh, k)
    return 0.5 * (plus + minus), 0.5 * (plus - minus)


def l2_norm(field: DGField) -> float:
    return float(np.sqrt(np.sum(0.5 * field.mesh.cell_sizes * np.sum(field.coeffs**2, axis=1))))


def l2_error(field: DGField, g: Callable, npoints: int | None = None) -> float:
    """L2 distance between ``field`` and ``g(x)``, using a (k+3)-point rule per cell."""
    k = field.degree
    rule, gq = _quadrature_values(g, field.mesh, npoints or k + 3)
    uq = field.coeffs @ basis_matrix(k, 0, rule.points).T
    err2 = 0.5 * field.mesh.cell_sizes * ((uq - gq) ** 2 @ rule.weights)
    return float(np.sqrt(err2.sum()))


def energy(state: StatePair) -> float:
    """Total discrete energy ||u_h||^2 + ||phi_h||^2."""
    return l2_norm(state.u) ** 2 + l2_norm(state.phi) ** 2
