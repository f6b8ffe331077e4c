"""Convergence studies, long-time evolutions and the invariant battery."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.special

from kdvdg import field as dgf
from kdvdg.field import DGField, StatePair
from kdvdg.mesh import Mesh, perturbed_mesh, uniform_mesh
from kdvdg.operators import (
    BURGERS_FLUX,
    MethodVariant,
    ProblemSpec,
    SemiDiscretization,
    convection_residual,
    dispersion_residual,
    linear_flux,
)
from kdvdg.problems import DEFAULT_FINAL_TIME, ExampleId, make_problem, residual_check
from kdvdg.special import elliptic_K, jacobi_cn
from kdvdg.timestep import StepControl, default_cfl, dt_from_cfl, ssp_rk3_step

logger = logging.getLogger(__name__)

CONVERGENCE_HEADER = "method,example,degree,cells,seed,error_u,order_u,error_phi,order_phi"
ENERGY_HEADER = "t,energy_u,energy_phi,energy_total"
SNAPSHOT_HEADER = "x,u,phi"
T_FACTOR = 10


def _fmt(value: float) -> str:
    return f"{value:.5e}"


def _metadata_line(meta: dict) -> str:
    return "# " + " ".join(f"{key}={value}" for key, value in meta.items())


def build_mesh(kind: str, n: int, perturb: float = 0.1, seed: int = 0) -> Mesh:
    if kind == "uniform":
        return uniform_mesh(n)
    if kind == "random":
        return perturbed_mesh(n, perturb, seed)
    raise ValueError(f"unknown mesh kind {kind!r}")


def _resolve(example) -> tuple[str, ProblemSpec]:
    if isinstance(example, ProblemSpec):
        return example.name or "custom", example
    example = ExampleId(example)
    return example.value, make_problem(example)


INIT_KINDS = ("auto", "l2", "coupled")


def _zero(x, deriv=0):
    return np.zeros_like(np.asarray(x, dtype=float))


def resolve_init(init: str, variant) -> str:
    """``auto`` means the coupled projection for method A and L2 otherwise."""
    variant = MethodVariant(variant)
    if init not in INIT_KINDS:
        raise ValueError(f"unknown initialization {init!r}")
    if init == "auto":
        return "coupled" if variant.evolves_phi else "l2"
    if init == "coupled" and not variant.evolves_phi:
        raise ValueError("the coupled projection needs the (u, phi) pair of method A")
    return init


def initial_state(problem: ProblemSpec, mesh: Mesh, k: int, init: str = "l2") -> StatePair:
    """Project (u_0, 0) onto the DG space.

    ``l2`` is the cellwise L2 projection of u_0 with phi_h = 0. ``coupled``
    applies the Gauss-Radau pair projection to (u_0, 0); its phi component is
    O(h^(k+1)) rather than zero, and it removes the start-up transient that
    otherwise costs method A most of an order on coarse meshes.
    """
    if init == "coupled":
        u, phi = dgf.coupled_project(problem.initial, _zero, mesh, k)
        return StatePair(u, phi)
    if init != "l2":
        raise ValueError(f"unknown initialization {init!r}")
    u = dgf.l2_project(problem.initial, mesh, k)
    return StatePair(u, DGField.zeros(mesh, k))


def observed_orders(cells: Sequence[int], errors: Sequence[float]) -> list[float]:
    """log(e_prev / e) / log(N / N_prev), with 0 for the first level."""
    orders = [0.0]
    for i in range(1, len(cells)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0.0 and e1 > 0.0 and np.isfinite(e0) and np.isfinite(e1):
            orders.append(math.log(e0 / e1) / math.log(cells[i] / cells[i - 1]))
        else:
            orders.append(0.0 if e0 == e1 == 0.0 else float("nan"))
    return orders


def fitted_slope(cells: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of -log(error) against log(N)."""
    return float(-np.polyfit(np.log(cells), np.log(errors), 1)[0])


@dataclass
class ConvergenceRow:
    cells: int
    seed: int
    error_u: float
    order_u: float
    error_phi: float
    order_phi: float


@dataclass
class ConvergenceReport:
    example: str
    method: str
    degree: int
    rows: list[ConvergenceRow]
    metadata: dict = field(default_factory=dict)

    @property
    def cells(self) -> list[int]:
        return [r.cells for r in self.rows]

    @property
    def errors_u(self) -> list[float]:
        return [r.error_u for r in self.rows]

    @property
    def errors_phi(self) -> list[float]:
        return [r.error_phi for r in self.rows]

    def slope(self, which: str = "u", last: int = 3) -> float:
        errors = self.errors_u if which == "u" else self.errors_phi
        return fitted_slope(self.cells[-last:], errors[-last:])

    def to_csv(self, header: bool = True) -> str:
        out = io.StringIO()
        if header:
            out.write(_metadata_line(self.metadata) + "\n")
            out.write(CONVERGENCE_HEADER + "\n")
        for r in self.rows:
            out.write(",".join([
                self.method, self.example, str(self.degree), str(r.cells), str(r.seed),
                _fmt(r.error_u), f"{r.order_u:.2f}", _fmt(r.error_phi), f"{r.order_phi:.2f}",
            ]) + "\n")
        return out.getvalue()


def run_convergence(example, method, degree: int, cells: Sequence[int], cfl: float | None = None,
                    mesh_kind: str = "random", perturb: float = 0.1, seed: int = 0,
                    shared_mesh: bool = False, init: str = "auto") -> ConvergenceReport:
    """Errors at T = 10 dt_0 for each N, where dt_0 is the step on the coarsest mesh.

    Level N uses the mesh seed ``seed + N`` unless ``shared_mesh`` is set, in
    which case every level uses ``seed``. ``init`` is one of INIT_KINDS.
    """
    name, problem = _resolve(example)
    variant = MethodVariant(method)
    init = resolve_init(init, variant)
    cells = list(cells)
    if any(b <= a for a, b in zip(cells, cells[1:])):
        raise ValueError(f"cell counts must be increasing, got {cells}")
    cfl = cfl if cfl is not None else default_cfl(degree)

    def level_seed(n):
        return seed if shared_mesh else seed + n

    meshes = [build_mesh(mesh_kind, n, perturb, level_seed(n)) for n in cells]
    t_final = T_FACTOR * dt_from_cfl(cfl, meshes[0])

    err_u, err_phi = [], []
    for n, mesh in zip(cells, meshes):
        disc = SemiDiscretization(mesh, degree, problem, variant)
        state = initial_state(problem, mesh, degree, init).as_array()
        control = StepControl.from_mesh(cfl, t_final, mesh)
        try:
            state, _ = disc.integrate(state, control)
        except FloatingPointError as exc:
            logger.error("N=%d diverged: %s", n, exc)
            err_u.append(float("nan"))
            err_phi.append(float("nan"))
            continue
        final = StatePair.from_array(mesh, state)
        if problem.exact is not None:
            err_u.append(dgf.l2_error(final.u, lambda x: problem.exact(x, t_final)))
        else:
            err_u.append(float("nan"))
        err_phi.append(dgf.l2_norm(final.phi))
        logger.info("N=%d steps=%d error_u=%.3e error_phi=%.3e",
                    n, control.nsteps, err_u[-1], err_phi[-1])

    ord_u = observed_orders(cells, err_u)
    ord_phi = observed_orders(cells, err_phi)
    rows = [
        ConvergenceRow(n, level_seed(n), eu, ou, ep, op)
        for n, eu, ou, ep, op in zip(cells, err_u, ord_u, err_phi, ord_phi)
    ]
    meta = {
        "cfl": f"{cfl:g}",
        "T": f"{t_final:.6e}",
        "dt0": f"{t_final / T_FACTOR:.6e}",
        "mesh": mesh_kind,
        "perturb": f"{perturb:g}" if mesh_kind == "random" else "0",
        "seed_mode": "shared" if shared_mesh else "seed+N",
        "init": init,
    }
    return ConvergenceReport(name, variant.value, degree, rows, meta)


@dataclass
class EnergyHistory:
    t: np.ndarray
    energy_u: np.ndarray
    energy_phi: np.ndarray

    @property
    def energy_total(self) -> np.ndarray:
        return self.energy_u + self.energy_phi

    @property
    def relative_drift(self) -> float:
        total = self.energy_total
        return float(abs(total[-1] - total[0]) / total[0])

    def to_csv(self, metadata: dict | None = None) -> str:
        out = io.StringIO()
        if metadata:
            out.write(_metadata_line(metadata) + "\n")
        out.write(ENERGY_HEADER + "\n")
        for row in zip(self.t, self.energy_u, self.energy_phi, self.energy_total):
            out.write(",".join(f"{v:.15e}" for v in row) + "\n")
        return out.getvalue()


@dataclass
class EvolutionResult:
    example: str
    method: str
    problem: ProblemSpec
    state: StatePair
    history: EnergyHistory
    t_final: float
    cfl: float
    nsteps: int
    init: str = "l2"

    @property
    def error_u(self) -> float:
        if self.problem.exact is None:
            return float("nan")
        return dgf.l2_error(self.state.u, lambda x: self.problem.exact(x, self.t_final))

    def snapshot(self, points_per_cell: int = dgf.SNAPSHOT_POINTS):
        x, u = dgf.sample(self.state.u, points_per_cell)
        _, phi = dgf.sample(self.state.phi, points_per_cell)
        return x, u, phi

    def snapshot_csv(self, points_per_cell: int = dgf.SNAPSHOT_POINTS) -> str:
        out = io.StringIO()
        out.write(SNAPSHOT_HEADER + "\n")
        for row in zip(*self.snapshot(points_per_cell)):
            out.write(",".join(f"{v:.10e}" for v in row) + "\n")
        return out.getvalue()

    @property
    def metadata(self) -> dict:
        return {
            "example": self.example,
            "method": self.method,
            "degree": self.state.degree,
            "cells": self.state.mesh.ncells,
            "T": f"{self.t_final:g}",
            "cfl": f"{self.cfl:g}",
            "steps": self.nsteps,
            "init": self.init,
        }


def run_evolution(example, method, degree: int, cells: int, t_final: float | None = None,
                  cfl: float | None = None, mesh_kind: str = "uniform", perturb: float = 0.1,
                  seed: int = 0, energy_every: int = 100, init: str = "auto") -> EvolutionResult:
    """Integrate to ``t_final`` recording the energy every ``energy_every`` steps."""
    name, problem = _resolve(example)
    if t_final is None:
        t_final = DEFAULT_FINAL_TIME[ExampleId(name)]
    if t_final < 0.0:
        raise ValueError(f"final time must be nonnegative, got {t_final}")
    variant = MethodVariant(method)
    init = resolve_init(init, variant)
    cfl = cfl if cfl is not None else default_cfl(degree)
    energy_every = max(1, int(energy_every))

    mesh = build_mesh(mesh_kind, cells, perturb, seed)
    disc = SemiDiscretization(mesh, degree, problem, variant)
    control = StepControl.from_mesh(cfl, t_final, mesh)
    state = initial_state(problem, mesh, degree, init).as_array()
    if control.nsteps == 0:
        half_h = 0.5 * mesh.cell_sizes[:, None]
        records = np.array([[0.0, np.sum(half_h * state[0] ** 2), np.sum(half_h * state[1] ** 2)]])
    else:
        state, records = disc.integrate(state, control, energy_every)
    history = EnergyHistory(records[:, 0], records[:, 1], records[:, 2])
    return EvolutionResult(name, variant.value, problem, StatePair.from_array(mesh, state),
                           history, t_final, cfl, control.nsteps, init)


# {{{ invariant battery


@dataclass
class CheckResult:
    name: str
    passed: bool
    magnitude: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<40s} {self.magnitude:.3e}  {self.detail}"


def random_state(mesh: Mesh, k: int, rng: np.random.Generator) -> StatePair:
    shape = (mesh.ncells, k + 1)
    return StatePair(DGField(mesh, rng.normal(size=shape)), DGField(mesh, rng.normal(size=shape)))


def dispersion_energy_balance(state: StatePair, variant, epsilon: float) -> tuple[float, float]:
    """Return (value, scale) of sum_j D_u(u, u) - sum_j D_phi(phi, phi).

    For variants U and C only the u part is formed. ``scale`` is the sum of the
    absolute values of the summed terms, used to make tolerances relative.
    """
    res_u, res_phi = dispersion_residual(state, variant, epsilon)
    terms = res_u * state.u.coeffs
    value, scale = terms.sum(), np.abs(terms).sum()
    if res_phi is not None:
        terms = res_phi * state.phi.coeffs
        value -= terms.sum()
        scale += np.abs(terms).sum()
    return float(value), float(scale)


def convection_entropy_balance(coeffs: np.ndarray, mesh: Mesh, flux) -> tuple[float, float]:
    terms = convection_residual(coeffs, mesh, flux) * coeffs
    return float(terms.sum()), float(np.abs(terms).sum())


def _meshes_for(seed: int, n: int = 12) -> list[Mesh]:
    return [uniform_mesh(n), perturbed_mesh(n, 0.1, seed)]


def check_conservation(seed: int = 0, nstates: int = 100, epsilon: float = 0.3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = {"A": 0.0, "C": 0.0, "U": 0.0}
    for k in (2, 3, 4):
        for mesh in _meshes_for(seed):
            for _ in range(nstates):
                state = random_state(mesh, k, rng)
                for variant in ("A", "C"):
                    value, scale = dispersion_energy_balance(state, variant, epsilon)
                    worst[variant] = max(worst[variant], abs(value) / scale)
                value, scale = dispersion_energy_balance(state, "U", epsilon)
                worst["U"] = max(worst["U"], -value / scale)
    return [
        CheckResult("conservation identity (A)", worst["A"] <= 1e-12, worst["A"], f"seed={seed}"),
        CheckResult("conservation identity (C)", worst["C"] <= 1e-12, worst["C"], f"seed={seed}"),
        CheckResult("dissipation sign (U)", worst["U"] <= 1e-12, worst["U"], f"seed={seed}"),
    ]


def check_entropy(seed: int = 0, nstates: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    fluxes = {"u": linear_flux(1.0), "-u": linear_flux(-1.0), "u^2/2": BURGERS_FLUX}
    out = []
    for label, flux in fluxes.items():
        worst = 0.0
        for k in (2, 3, 4):
            for mesh in _meshes_for(seed):
                for _ in range(nstates):
                    coeffs = rng.normal(size=(mesh.ncells, k + 1))
                    value, scale = convection_entropy_balance(coeffs, mesh, flux)
                    worst = max(worst, abs(value) / scale)
        out.append(CheckResult(f"entropy identity f={label}", worst <= 1e-11, worst, f"seed={seed}"))
    return out


def coupled_projection_residuals(u: Callable, phi: Callable, mesh: Mesh, k: int) -> float:
    """Largest violation of the six interface conditions of the coupled projection."""
    pu, pphi = dgf.coupled_project(u, phi, mesh, k)
    tu, tphi = dgf.traces(pu), dgf.traces(pphi)
    xs = mesh.nodes[:-1]
    worst = 0.0
    for d in range(3):
        cond_u = tu.mean[d] + 0.5 * tphi.jump[d] - u(xs, d)
        cond_phi = tphi.mean[d] + 0.5 * tu.jump[d] - phi(xs, d)
        worst = max(worst, np.abs(cond_u).max(), np.abs(cond_phi).max())
    return float(worst)


def _sine(x, d=0):
    return (2 * np.pi) ** d * np.sin(2 * np.pi * x + 0.5 * d * np.pi)


def _cosine(x, d=0):
    return (2 * np.pi) ** d * np.cos(2 * np.pi * x + 0.5 * d * np.pi)


def check_projection(seed: int = 0) -> list[CheckResult]:
    worst = 0.0
    for k in (2, 3, 4):
        for mesh in _meshes_for(seed, 20):
            # the conditions carry derivatives, so compare relative to their size
            worst = max(worst, coupled_projection_residuals(_sine, _cosine, mesh, k) / (2 * np.pi) ** 2)
    return [CheckResult("coupled projection interface conditions", worst <= 1e-12, worst,
                        f"seed={seed}")]


def check_special() -> list[CheckResult]:
    err_k = max(abs(elliptic_K(m) - scipy.special.ellipk(m)) for m in (0.0, 0.5, 0.9))
    zero = max(abs(float(jacobi_cn(elliptic_K(m), m))) for m in (0.0, 0.5, 0.9))
    cnoidal = residual_check(make_problem("4.3"), samples=200, relative=True)
    return [
        CheckResult("elliptic K vs scipy", err_k <= 1e-10, err_k),
        CheckResult("cn quarter-period zero", zero <= 1e-12, zero),
        CheckResult("cnoidal PDE residual (relative)", cnoidal <= 1e-5, cnoidal),
    ]


def rk3_error_ratio(dt: float = 0.1) -> float:
    """Error ratio at t = 1 for u' = u when dt is halved; ~8 for a third-order method."""
    def error(step):
        u = 1.0
        for _ in range(round(1.0 / step)):
            u = ssp_rk3_step(u, step, lambda v: v)
        return abs(u - math.e)

    return error(dt) / error(0.5 * dt)


def check_time_order() -> list[CheckResult]:
    ratio = rk3_error_ratio()
    return [CheckResult("SSP-RK3 error ratio", abs(ratio - 8.0) <= 0.5, ratio)]


def run_property_suite(seed: int = 0, nstates: int = 100) -> list[CheckResult]:
    results = []
    results += check_conservation(seed, nstates)
    results += check_entropy(seed, nstates)
    results += check_projection(seed)
    results += check_special()
    results += check_time_order()
    return results


# }}}
