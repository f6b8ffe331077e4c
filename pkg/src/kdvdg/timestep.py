"""Explicit SSP-RK3 integration with the dt = CFL * h_min^3 step law."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from kdvdg.mesh import Mesh

logger = logging.getLogger(__name__)

# keeps dt * max|lambda| below ~1 (the SSP-RK3 imaginary-axis bound is sqrt(3))
# for eps = 1/(4 pi^2) on 10%-perturbed meshes
DEFAULT_CFL = {2: 0.05, 3: 0.02, 4: 0.005}


def default_cfl(k: int) -> float:
    return DEFAULT_CFL.get(k, 0.001)


def dt_from_cfl(cfl: float, mesh: Mesh) -> float:
    if cfl <= 0.0:
        raise ValueError(f"CFL number must be positive, got {cfl}")
    return cfl * mesh.h_min**3


@dataclass(frozen=True)
class StepControl:
    cfl: float
    t_final: float
    dt: float

    @classmethod
    def from_mesh(cls, cfl: float, t_final: float, mesh: Mesh) -> StepControl:
        return cls(cfl, t_final, dt_from_cfl(cfl, mesh))

    @property
    def nsteps(self) -> int:
        if self.t_final <= 0.0:
            return 0
        # guard against ceil(10.000000000000002) = 11
        return max(1, math.ceil(self.t_final / self.dt - 1e-9))

    @property
    def last_dt(self) -> float:
        """Length of the final, possibly shortened, step."""
        return self.t_final - (self.nsteps - 1) * self.dt


def ssp_rk3_step(state, dt: float, rhs: Callable):
    """One step of the three-stage, third-order SSP Runge-Kutta method.

    ``state`` may be anything closed under addition and scalar multiplication
    (numpy arrays, :class:`~kdvdg.field.StatePair`, floats).
    """
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    u1 = state + dt * rhs(state)
    u2 = 0.75 * state + 0.25 * u1 + 0.25 * dt * rhs(u1)
    return (1.0 / 3.0) * state + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * rhs(u2)


def integrate(state: np.ndarray, rhs: Callable, control: StepControl,
              callback: Callable | None = None) -> np.ndarray:
    """Advance an array state to ``control.t_final``.

    The last step is shortened to land on t_final exactly. ``callback(n, t,
    state)`` is invoked after every step (and once with n = 0 before the first).
    Raises FloatingPointError as soon as the state stops being finite.
    """
    nsteps = control.nsteps
    t = 0.0
    if callback is not None:
        callback(0, t, state)
    for n in range(1, nsteps + 1):
        dt = control.dt if n < nsteps else control.last_dt
        state = ssp_rk3_step(state, dt, rhs)
        t = n * control.dt if n < nsteps else control.t_final
        if not np.all(np.isfinite(state)):
            raise FloatingPointError(f"non-finite state after step {n} (t = {t:.6e})")
        if callback is not None:
            callback(n, t, state)
    logger.debug("integrated %d steps to t = %g", nsteps, t)
    return state
