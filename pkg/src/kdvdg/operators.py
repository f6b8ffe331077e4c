"""Spatial DG operators for u_t + f(u)_x + eps u_xxx = 0 with a doubled unknown.

The ultra-weak dispersion form on cell I_j, for a test function v, is

    D_j(w, v) = -eps int_{I_j} w v_xxx
                + eps (w^ v_xx - w^_x v_x + w^_xx v)|^-_{j+1/2}
                - eps (w^ v_xx - w^_x v_x + w^_xx v)|^+_{j-1/2}

with single-valued interface fluxes (w^, w^_x, w^_xx). The convection form is

    F_j(u, v) = -int_{I_j} f(u) v_x + f^ v^-|_{j+1/2} - f^ v^+|_{j-1/2}

with the square-entropy-conserving two-point flux f^ = f_S(u^-, u^+). The
semi-discrete system is

    M du/dt   = -(F_j(u, v) + D_j(u, v)),
    M dphi/dt = +D_j(phi, psi)                (variant A only).

Array layout: coefficient arrays are (..., N, k+1); trace and flux arrays are
(..., 3, N) with the derivative order on the middle axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sps

from kdvdg.basis import basis_matrix, gauss_rule, reference_element
from kdvdg.field import DGField, StatePair, derivative_scales, interface_traces
from kdvdg.mesh import Mesh
from kdvdg.timestep import StepControl, integrate

ENTROPY_FLUX_TAU = 1.0e-8

# sign of the (w^, w^_x, w^_xx) boundary terms
_BOUNDARY_SIGNS = np.array([1.0, -1.0, 1.0])


class MethodVariant(str, enum.Enum):
    """Choice of dispersion fluxes.

    A: coupled mean-plus-half-cross-jump fluxes on (u, phi); energy conserving.
    U: u^ = u^-, u^_x = u_x^+, u^_xx = u_xx^+; dissipative.
    C: u^ = u^-, u^_x = {u_x}, u^_xx = u_xx^+; conserving but suboptimal.
    """

    A = "A"
    U = "U"
    C = "C"

    @property
    def evolves_phi(self) -> bool:
        return self is MethodVariant.A


@dataclass(frozen=True)
class FluxFunction:
    """Convective flux f with its square-entropy potential and entropy flux.

    ``potential`` is psi with psi' = f; the entropy-conserving flux is its
    divided difference. ``entropy_flux`` is q = u f(u) - psi(u), q' = u f'(u).
    Polynomial fluxes also carry ``coefficients`` (c_0, c_1, ...) of f, which
    allows the two-point flux to be evaluated without any division.
    """

    f: Callable
    fprime: Callable
    potential: Callable
    name: str = ""
    coefficients: tuple[float, ...] | None = None

    @property
    def is_zero(self) -> bool:
        return self.coefficients is not None and not any(self.coefficients)

    @property
    def is_linear(self) -> bool:
        return self.coefficients is not None and not any(self.coefficients[2:])

    def entropy_flux(self, u):
        return u * self.f(u) - self.potential(u)


def polynomial_flux(coefficients, name: str = "") -> FluxFunction:
    """f(u) = sum_p c_p u^p."""
    c = tuple(float(v) for v in coefficients)
    fc = np.array(c) if c else np.zeros(1)

    def f(u):
        return np.polynomial.polynomial.polyval(np.asarray(u, dtype=float), fc)

    def fprime(u):
        return np.polynomial.polynomial.polyval(np.asarray(u, dtype=float),
                                                np.polynomial.polynomial.polyder(fc))

    def potential(u):
        return np.polynomial.polynomial.polyval(np.asarray(u, dtype=float),
                                                np.polynomial.polynomial.polyint(fc))

    return FluxFunction(f, fprime, potential, name=name, coefficients=c)


ZERO_FLUX = polynomial_flux((), name="0")


def linear_flux(a: float) -> FluxFunction:
    """f(u) = a u."""
    return polynomial_flux((0.0, a), name=f"{a:g}u")


BURGERS_FLUX = polynomial_flux((0.0, 0.0, 0.5), name="u^2/2")


@dataclass(frozen=True)
class ProblemSpec:
    epsilon: float
    flux: FluxFunction
    initial: Callable
    exact: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.epsilon == 0.0:
            raise ValueError("the dispersion coefficient must be nonzero")


@dataclass(frozen=True)
class InterfaceFluxes:
    """Numerical fluxes (w^, w^_x, w^_xx) at every interface, shape (3, N)."""

    u_hat: np.ndarray
    phi_hat: np.ndarray | None


def _require_degree(k: int) -> None:
    if k < 2:
        raise ValueError(f"the ultra-weak dispersion form needs k >= 2, got {k}")


def dispersion_fluxes(u_minus, u_plus, phi_minus, phi_plus, variant: MethodVariant):
    """Interface fluxes from one-sided traces, arrays of shape (..., 3, N)."""
    variant = MethodVariant(variant)
    if variant is MethodVariant.A:
        u_hat = 0.5 * (u_plus + u_minus) + 0.5 * (phi_plus - phi_minus)
        phi_hat = 0.5 * (phi_plus + phi_minus) + 0.5 * (u_plus - u_minus)
        return u_hat, phi_hat

    u_hat = np.empty_like(u_minus)
    u_hat[..., 0, :] = u_minus[..., 0, :]
    if variant is MethodVariant.U:
        u_hat[..., 1, :] = u_plus[..., 1, :]
    else:
        u_hat[..., 1, :] = 0.5 * (u_plus[..., 1, :] + u_minus[..., 1, :])
    u_hat[..., 2, :] = u_plus[..., 2, :]
    return u_hat, None


def flux_values(state: StatePair, variant: MethodVariant) -> InterfaceFluxes:
    um, up = interface_traces(state.u.coeffs, state.mesh)
    pm, pp = interface_traces(state.phi.coeffs, state.mesh)
    return InterfaceFluxes(*dispersion_fluxes(um, up, pm, pp, variant))


def dispersion_form(coeffs: np.ndarray, hat: np.ndarray, mesh: Mesh, epsilon: float) -> np.ndarray:
    """D_j(w, b_i) for all cells and basis functions, shape (..., N, k+1).

    ``hat`` holds the interface fluxes for w; interface j is the left end of
    cell j and (j + 1) mod N its right end.
    """
    k = coeffs.shape[-1] - 1
    ref = reference_element(k)
    scale = derivative_scales(mesh)

    # int_{I_j} w v_xxx dx = (2/h_j)^2 int w b_i''' dxi
    res = -epsilon * scale[2][:, None] * (coeffs @ ref.vol3)

    # the flux of derivative order d pairs with the (2 - d)-th derivative of v
    pair_scale = _BOUNDARY_SIGNS[:, None] * scale[::-1]
    right = np.roll(hat, -1, axis=-1) * pair_scale
    left = hat * pair_scale
    res += epsilon * np.einsum("...dn,di->...ni", right, ref.trace[::-1, 1, :])
    res -= epsilon * np.einsum("...dn,di->...ni", left, ref.trace[::-1, 0, :])
    return res


def dispersion_residual(state: StatePair, variant: MethodVariant, epsilon: float):
    """Return (D_u(b_i), D_phi(b_i)) per cell; D_phi is None for variants U and C."""
    _require_degree(state.degree)
    fluxes = flux_values(state, variant)
    res_u = dispersion_form(state.u.coeffs, fluxes.u_hat, state.mesh, epsilon)
    if fluxes.phi_hat is None:
        return res_u, None
    return res_u, dispersion_form(state.phi.coeffs, fluxes.phi_hat, state.mesh, epsilon)


def _polynomial_two_point(ul, ur, coefficients):
    # (uR^{p+1} - uL^{p+1}) / (uR - uL) = sum_{r=0}^{p} uL^r uR^{p-r}
    out = np.zeros(np.broadcast(ul, ur).shape)
    pl = [np.ones_like(out)]
    pr = [np.ones_like(out)]
    for _ in range(len(coefficients) - 1):
        pl.append(pl[-1] * ul)
        pr.append(pr[-1] * ur)
    for p, c in enumerate(coefficients):
        if c:
            out += c / (p + 1) * sum(pl[r] * pr[p - r] for r in range(p + 1))
    return out


def entropy_flux(u_left, u_right, flux: FluxFunction, tau: float = ENTROPY_FLUX_TAU):
    """Square-entropy-conserving two-point flux (psi(uR) - psi(uL)) / (uR - uL).

    Polynomial fluxes use the exact expanded divided difference. Otherwise the
    quotient is formed directly, falling back to f at the midpoint when the
    jump is below ``tau * max(1, |uL|, |uR|)``.
    """
    ul = np.asarray(u_left, dtype=float)
    ur = np.asarray(u_right, dtype=float)
    if flux.coefficients is not None:
        out = _polynomial_two_point(ul, ur, flux.coefficients)
        return out if out.ndim else float(out)
    du = ur - ul
    small = np.abs(du) <= tau * np.maximum(1.0, np.maximum(np.abs(ul), np.abs(ur)))
    safe = np.where(small, 1.0, du)
    divided = (flux.potential(ur) - flux.potential(ul)) / safe
    out = np.where(small, flux.f(0.5 * (ul + ur)), divided)
    return out if out.ndim else float(out)


def convection_points(k: int) -> int:
    """Gauss points for int f(u_h) v_x: k + 2, raised so that quadratic f stays exact."""
    return max(k + 2, math.ceil(1.5 * k))


@lru_cache(maxsize=None)
def _convection_tables(k: int, npoints: int):
    rule = gauss_rule(npoints)
    interp = basis_matrix(k, 0, rule.points).T
    # int_{I_j} f v_x dx = int f b_i' dxi
    weighted_grad = rule.weights[:, None] * basis_matrix(k, 1, rule.points)
    ref = reference_element(k)
    return interp, weighted_grad, ref.trace[0, 0, :], ref.trace[0, 1, :]


def convection_residual(coeffs_u: np.ndarray, mesh: Mesh, flux: FluxFunction,
                        npoints: int | None = None) -> np.ndarray:
    """F_j(u_h, b_i) for all cells, shape (..., N, k+1)."""
    k = coeffs_u.shape[-1] - 1
    if flux.is_zero:
        return np.zeros_like(coeffs_u)
    interp, weighted_grad, left_vals, right_vals = _convection_tables(
        k, npoints or convection_points(k))

    res = -flux.f(coeffs_u @ interp) @ weighted_grad

    # only values are needed at the interfaces
    u_minus = np.roll(coeffs_u @ right_vals, 1, axis=-1)
    u_plus = coeffs_u @ left_vals
    fhat = entropy_flux(u_minus, u_plus, flux)
    res += np.roll(fhat, -1, axis=-1)[..., None] * right_vals
    res -= fhat[..., None] * left_vals
    return res


class SemiDiscretization:
    """Method-of-lines right-hand side for one (mesh, degree, problem, variant).

    Everything linear in the state (dispersion, and convection when f is
    linear) is assembled once into a matrix by applying the matrix-free forms
    to unit vectors; only a nonlinear flux is evaluated on the fly. Arrays
    passed to :meth:`rhs_array` have shape (2, N, k+1) holding (u_h, phi_h).
    """

    # above this many unknowns the assembled operator is stored sparse
    DENSE_LIMIT = 400

    def __init__(self, mesh: Mesh, k: int, problem: ProblemSpec, variant: MethodVariant,
                 conv_points: int | None = None):
        _require_degree(k)
        self.mesh = mesh
        self.k = k
        self.problem = problem
        self.variant = MethodVariant(variant)
        self.conv_points = conv_points or convection_points(k)
        self.inv_mass = (2.0 / mesh.cell_sizes)[:, None]
        self.shape = (2, mesh.ncells, k + 1)
        flux = problem.flux
        self._nonlinear = not (flux.is_zero or flux.is_linear)
        self._linear = self._assemble_linear()

    def linear_array(self, data: np.ndarray) -> np.ndarray:
        """Linear contributions to d/dt of (..., 2, N, k+1) arrays, matrix-free."""
        u, phi = data[..., 0, :, :], data[..., 1, :, :]
        eps = self.problem.epsilon
        um, up = interface_traces(u, self.mesh)
        pm, pp = interface_traces(phi, self.mesh)
        u_hat, phi_hat = dispersion_fluxes(um, up, pm, pp, self.variant)

        res_u = dispersion_form(u, u_hat, self.mesh, eps)
        if not self._nonlinear and not self.problem.flux.is_zero:
            res_u = res_u + convection_residual(u, self.mesh, self.problem.flux, self.conv_points)

        out = np.zeros_like(data)
        out[..., 0, :, :] = -self.inv_mass * res_u
        if phi_hat is not None:
            out[..., 1, :, :] = self.inv_mass * dispersion_form(phi, phi_hat, self.mesh, eps)
        return out

    def _assemble_linear(self):
        size = int(np.prod(self.shape))
        probes = np.eye(size).reshape((size,) + self.shape)
        matrix = self.linear_array(probes).reshape(size, size).T
        if size <= self.DENSE_LIMIT:
            return np.ascontiguousarray(matrix)
        return sps.csr_matrix(np.where(np.abs(matrix) < 1e-300, 0.0, matrix))

    def operator_matrix(self) -> np.ndarray:
        """Dense matrix of the linear part acting on flattened (2, N, k+1) arrays."""
        if sps.issparse(self._linear):
            return self._linear.toarray()
        return self._linear.copy()

    def rhs_array(self, data: np.ndarray) -> np.ndarray:
        out = (self._linear @ data.ravel()).reshape(self.shape)
        if self._nonlinear:
            conv = convection_residual(data[0], self.mesh, self.problem.flux, self.conv_points)
            out[0] -= self.inv_mass * conv
        return out

    def __call__(self, state: StatePair) -> StatePair:
        return StatePair.from_array(self.mesh, self.rhs_array(state.as_array()))

    @property
    def compiled(self) -> bool:
        """Whether :meth:`integrate` can use the compiled loop (polynomial fluxes)."""
        return self.problem.flux.coefficients is not None

    def integrate(self, data: np.ndarray, control: StepControl, energy_every: int | None = None,
                  use_compiled: bool = True):
        """SSP-RK3 from t = 0 to ``control.t_final``.

        Returns the final (2, N, k+1) array and an (n, 3) array of
        (t, ||u_h||^2, ||phi_h||^2) recorded every ``energy_every`` steps, at
        t = 0 and at the final time. Raises FloatingPointError on blow-up.
        """
        every = max(1, int(energy_every or control.nsteps or 1))
        half_h = 0.5 * self.mesh.cell_sizes
        if not (use_compiled and self.compiled):
            records = []

            def record(n, t, x):
                if n % every == 0 or n == control.nsteps:
                    records.append((t, np.sum(half_h[:, None] * x[0] ** 2),
                                    np.sum(half_h[:, None] * x[1] ** 2)))

            final = integrate(data, self.rhs_array, control, callback=record)
            return final, np.array(records)

        from kdvdg import _kernels

        csr = sps.csr_matrix(self._linear)
        interp, wgrad, left_vals, right_vals = _convection_tables(self.k, self.conv_points)
        x = np.array(data, dtype=float).ravel()
        records, nrec, failed = _kernels.rk3_run(
            x, control.dt, control.t_final, control.nsteps, every, half_h,
            csr.indptr.astype(np.int64), csr.indices.astype(np.int64), csr.data,
            self._nonlinear, self.mesh.ncells, self.k + 1,
            np.ascontiguousarray(interp), np.ascontiguousarray(wgrad),
            np.ascontiguousarray(left_vals), np.ascontiguousarray(right_vals),
            np.array(self.problem.flux.coefficients or (0.0,), dtype=float),
            np.ascontiguousarray(self.inv_mass[:, 0]),
        )
        if failed >= 0:
            raise FloatingPointError(f"non-finite state after step {failed}")
        return x.reshape(self.shape), records[:nrec].copy()


def rhs(state: StatePair, problem: ProblemSpec, variant: MethodVariant) -> StatePair:
    """Time derivative of the doubled state; zero phi-derivative for variants U and C."""
    return SemiDiscretization(state.mesh, state.degree, problem, variant)(state)
