"""The four benchmark problems: linear dispersion, linear convection, cnoidal waves.

Exact solutions are callables ``exact(x, t, deriv=0)`` returning the
``deriv``-th spatial derivative (deriv <= 3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from kdvdg.operators import BURGERS_FLUX, ZERO_FLUX, ProblemSpec, linear_flux
from kdvdg.special import elliptic_K, jacobi_sn_cn_dn

CNOIDAL_M = 0.9
CNOIDAL_EPSILON = 1.0 / 24**2
CNOIDAL_X0 = 0.5

# 9-point central stencils; steps balance truncation against roundoff
FD_HALF_WIDTH = 4
FD_STEP_X = 1.0e-3
FD_STEP_T = 1.0e-3


class ExampleId(str, enum.Enum):
    EX41 = "4.1"
    EX42 = "4.2"
    EX43 = "4.3"
    EX44 = "4.4"


DEFAULT_FINAL_TIME = {
    ExampleId.EX41: 1.0,
    ExampleId.EX42: 1.0,
    ExampleId.EX43: 1.0,
    ExampleId.EX44: 5.0,
}


def _sine_wave(speed: float):
    def exact(x, t, deriv=0):
        w = 2.0 * np.pi
        return w**deriv * np.sin(w * (np.asarray(x) + speed * t) + 0.5 * deriv * np.pi)

    return exact


@dataclass(frozen=True)
class CnoidalWave:
    """u(x, t) = a cn^2(4K (x - v t - x0) | m) for u_t + (u^2/2)_x + eps u_xxx = 0."""

    m: float = CNOIDAL_M
    epsilon: float = CNOIDAL_EPSILON
    x0: float = CNOIDAL_X0

    @property
    def K(self) -> float:
        return elliptic_K(self.m)

    @property
    def amplitude(self) -> float:
        return 192.0 * self.m * self.epsilon * self.K**2

    @property
    def speed(self) -> float:
        return 64.0 * self.epsilon * (2.0 * self.m - 1.0) * self.K**2

    def __call__(self, x, t, deriv=0):
        scale = 4.0 * self.K
        z = scale * (np.asarray(x, dtype=float) - self.speed * t - self.x0)
        sn, cn, dn = jacobi_sn_cn_dn(z, self.m)
        m = self.m
        # z-derivatives of cn^2, using cn' = -sn dn, sn' = cn dn, dn' = -m sn cn
        if deriv == 0:
            y = cn * cn
        elif deriv == 1:
            y = -2.0 * sn * cn * dn
        elif deriv == 2:
            y = 2.0 * (sn * sn * dn * dn - cn * cn * dn * dn + m * sn * sn * cn * cn)
        elif deriv == 3:
            y = 8.0 * sn * cn * dn * (dn * dn - m * sn * sn + m * cn * cn)
        else:
            raise ValueError(f"derivative order must be in 0..3, got {deriv}")
        return self.amplitude * scale**deriv * y


def _initial_from(exact):
    def initial(x, deriv=0):
        return exact(x, 0.0, deriv)

    return initial


@lru_cache(maxsize=None)
def make_problem(example) -> ProblemSpec:
    example = ExampleId(example)
    if example is ExampleId.EX41:
        exact = _sine_wave(1.0)
        return ProblemSpec(1.0 / (4.0 * np.pi**2), ZERO_FLUX, _initial_from(exact), exact,
                           name="4.1")
    if example is ExampleId.EX42:
        # u_t - u_x + eps u_xxx = 0, i.e. f(u) = -u
        exact = _sine_wave(2.0)
        return ProblemSpec(1.0 / (4.0 * np.pi**2), linear_flux(-1.0), _initial_from(exact),
                           exact, name="4.2")
    wave = CnoidalWave()
    return ProblemSpec(wave.epsilon, BURGERS_FLUX, _initial_from(wave), wave,
                       name=example.value)


@lru_cache(maxsize=None)
def central_weights(order: int, half_width: int = FD_HALF_WIDTH) -> np.ndarray:
    """Weights w_s, s = -half_width..half_width, with sum w_s g(s) ~ g^{(order)}(0)."""
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    n = offsets.size
    vander = offsets[None, :] ** np.arange(n)[:, None]
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


def _fd(g, x, order: int, step: float):
    w = central_weights(order)
    offsets = np.arange(-FD_HALF_WIDTH, FD_HALF_WIDTH + 1)
    return sum(ws * g(x + s * step) for ws, s in zip(w, offsets)) / step**order


def pde_residual(spec: ProblemSpec, x, t):
    """u_t + f(u)_x + eps u_xxx of the exact solution, by finite differences."""
    if spec.exact is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    u = spec.exact
    u_t = _fd(lambda s: u(x, s), t, 1, FD_STEP_T)
    f_x = _fd(lambda y: spec.flux.f(u(y, t)), x, 1, FD_STEP_X)
    u_xxx = _fd(lambda y: u(y, t), x, 3, FD_STEP_X)
    return u_t + f_x + spec.epsilon * u_xxx, u_t


def residual_check(spec: ProblemSpec, samples: int = 200, seed: int = 0,
                   relative: bool = False) -> float:
    """Maximum PDE residual of the exact solution at random (x, t) in [0, 1]^2.

    With ``relative=True`` the residual is divided by max |u_t| over the samples.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, samples)
    t = rng.uniform(0.0, 1.0, samples)
    res, u_t = pde_residual(spec, x, t)
    worst = float(np.max(np.abs(res)))
    if relative:
        return worst / float(np.max(np.abs(u_t)))
    return worst
