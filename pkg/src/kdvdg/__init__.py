"""Energy-conserving ultra-weak DG methods for the generalized KdV equation."""

from kdvdg.field import DGField, StatePair
from kdvdg.harness import run_convergence, run_evolution, run_property_suite
from kdvdg.mesh import Mesh, perturbed_mesh, uniform_mesh
from kdvdg.operators import MethodVariant, ProblemSpec, SemiDiscretization
from kdvdg.problems import make_problem

__all__ = [
    "DGField",
    "Mesh",
    "MethodVariant",
    "ProblemSpec",
    "SemiDiscretization",
    "StatePair",
    "make_problem",
    "perturbed_mesh",
    "run_convergence",
    "run_evolution",
    "run_property_suite",
    "uniform_mesh",
]

__version__ = "0.1.0"
