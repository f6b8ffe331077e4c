"""Matplotlib figures for convergence reports and evolution snapshots.

Figures are written straight to files; the Agg backend is selected so the
harness works without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.8),
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "legend.frameon": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> None:
    fig.savefig(path)
    plt.close(fig)


def plot_convergence(reports, path) -> None:
    """Log-log plot of ||u - u_h|| (and ||phi_h|| for method A) against N."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for rep in reports:
            cells = np.array(rep.cells, dtype=float)
            label = f"({rep.method}) P{rep.degree}"
            ax.loglog(cells, rep.errors_u, "o-", label=rf"{label} $\|u-u_h\|$, slope {rep.slope('u'):.2f}")
            if rep.method == "A":
                ax.loglog(cells, rep.errors_phi, "s--",
                          label=rf"{label} $\|\phi_h\|$, slope {rep.slope('phi'):.2f}")
        ax.set_xlabel("$N$")
        ax.set_ylabel("$L^2$ error")
        ax.set_title(f"Example {reports[0].example}")
        ax.legend(fontsize=8)
        _save(fig, path)


def plot_evolution(result, path, points_per_cell: int = 6) -> None:
    """Final-time solution (solid) against the exact solution (dashed), plus energy drift."""
    x, u, _ = result.snapshot(points_per_cell)
    ncells = result.state.mesh.ncells
    with plt.rc_context(STYLE):
        fig, (ax, ax_e) = plt.subplots(2, 1, figsize=(6.4, 7.0),
                                       gridspec_kw={"height_ratios": [2, 1]})
        # one segment per cell so discontinuities stay visible
        for j in range(ncells):
            sl = slice(j * points_per_cell, (j + 1) * points_per_cell)
            ax.plot(x[sl], u[sl], "b-", label="numerical" if j == 0 else None)
        if result.problem.exact is not None:
            xf = np.linspace(0.0, 1.0, 801)
            ax.plot(xf, result.problem.exact(xf, result.t_final), "k--", label="exact")
        ax.set_xlabel("$x$")
        ax.set_ylabel("$u$")
        ax.set_title(f"({result.method}) P{result.state.degree}, N={ncells}, T={result.t_final:g}")
        ax.legend()

        hist = result.history
        total = hist.energy_total
        ax_e.plot(hist.t, (total - total[0]) / total[0], "r-")
        ax_e.set_xlabel("$t$")
        ax_e.set_ylabel(r"$(E(t)-E(0))/E(0)$")
        _save(fig, path)
