"""Periodic one-dimensional meshes on the unit interval."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Periodic tessellation of [0, 1] given by its N + 1 nodes.

    The endpoints 0 and 1 are identified, so interface ``j`` (0-based) sits at
    ``nodes[j]`` and separates cell ``j - 1`` (mod N) from cell ``j``.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh nodes must start at 0 and end at 1")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def ncells(self) -> int:
        return self.nodes.size - 1

    @property
    def cell_sizes(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def h_max(self) -> float:
        return float(self.cell_sizes.max())

    @property
    def h_min(self) -> float:
        return float(self.cell_sizes.min())

    def to_physical(self, xi: np.ndarray) -> np.ndarray:
        """Map reference points ``xi`` in [-1, 1] into every cell, shape (N, len(xi))."""
        xi = np.asarray(xi, dtype=float)
        return self.centers[:, None] + 0.5 * self.cell_sizes[:, None] * xi[None, :]


def uniform_mesh(n: int) -> Mesh:
    if n < 1:
        raise ValueError(f"number of cells must be positive, got {n}")
    nodes = np.arange(n + 1, dtype=float) / n
    nodes[-1] = 1.0
    return Mesh(nodes)


def perturbed_mesh(n: int, fraction: float, seed: int) -> Mesh:
    """Uniform mesh whose interior nodes are shifted by U(-fraction/n, fraction/n).

    The shifts come from a PCG64 generator seeded with ``seed``, so the mesh is a
    pure function of ``(n, fraction, seed)``.
    """
    if n < 2:
        raise ValueError(f"perturbed meshes need at least 2 cells, got {n}")
    if not 0.0 <= fraction < 0.5:
        raise ValueError(f"perturbation fraction must lie in [0, 0.5), got {fraction}")

    nodes = np.arange(n + 1, dtype=float) / n
    nodes[-1] = 1.0
    if fraction > 0.0:
        rng = np.random.Generator(np.random.PCG64(seed))
        nodes[1:-1] += rng.uniform(-fraction / n, fraction / n, size=n - 1)
    return Mesh(nodes)
