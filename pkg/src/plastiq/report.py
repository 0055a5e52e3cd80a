"""Figure rendering for run reports (written to files next to the CSV output)."""
from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _tri(mesh):
    from matplotlib.tri import Triangulation
    return Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)


def save_region_figure(path, mesh, regionmap, dpi=130):
    """Stress norm with the elastic/plastic interface and characteristic boundary."""
    fig, ax = plt.subplots(figsize=(6, 5))
    norms = np.linalg.norm(regionmap.sigma, axis=1)
    tpc = ax.tripcolor(_tri(mesh), facecolors=norms, cmap="viridis", vmin=0.0, vmax=1.0)
    fig.colorbar(tpc, ax=ax, label="|sigma|")
    for line in regionmap.sigma_interface:
        ax.plot(line[:, 0], line[:, 1], "r-", lw=1.5)
    if regionmap.char_boundary:
        for seg in regionmap.char_boundary:
            ax.plot(seg[:, 0], seg[:, 1], "w--", lw=1.8)
    ax.set_aspect("equal")
    ax.set_title(f"regions (plastic: {len(regionmap.plastic_cells)} cells)")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_displacement_figure(path, mesh, u, dpi=130):
    fig, ax = plt.subplots(figsize=(6, 5))
    tpc = ax.tripcolor(_tri(mesh), u, shading="gouraud", cmap="magma")
    fig.colorbar(tpc, ax=ax, label="u")
    ax.set_aspect("equal")
    ax.set_title("displacement")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_characteristics_figure(path, mesh, characteristics, regionmap=None,
                                fans=None, dpi=130):
    fig, ax = plt.subplots(figsize=(6, 5))
    if regionmap is not None:
        plastic = regionmap.labels == 1
        ax.tripcolor(_tri(mesh), facecolors=plastic.astype(float), cmap="Greys",
                     vmin=0, vmax=2.5)
    be = mesh.boundary_edges
    for a, b in be:
        ax.plot(mesh.vertices[[a, b], 0], mesh.vertices[[a, b], 1], "k-", lw=0.5)
    for ch in characteristics:
        ax.plot(ch.points[:, 0], ch.points[:, 1], lw=0.8)
    if fans:
        for fan in fans:
            ax.plot(*fan["apex"], "r*", ms=12)
    ax.set_aspect("equal")
    ax.set_title(f"{len(characteristics)} characteristics")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_energy_figure(path, report, dpi=130):
    fig, ax = plt.subplots(figsize=(6, 4))
    e = np.asarray(report.energy_history)
    ax.plot(report.energy_iterations, e - e.min() + 1e-16)
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy above best")
    ax.set_title("primal energy decay")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
