"""Static SVG figures for the CLI. The CSV files are the data contract; these are previews."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp, so identical data gives identical files
plt.rcParams["svg.hashsalt"] = "llquench"
_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def spectrum_figure(inv_gamma, energies, bound, path: Path) -> Path:
    """Gas branches against ``1/gamma`` with the bound branch on the attractive side."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for k in range(energies.shape[1]):
        ax.plot(inv_gamma, energies[:, k], color="C0", lw=1.2)
    ax.plot(inv_gamma, bound, color="C3", lw=1.2, label="bound pair")
    ax.axvline(0.0, color="0.6", lw=0.6)
    top = np.nanmax(energies) if np.isfinite(energies).any() else 1.0
    ax.set_ylim(-0.25 * top, 1.05 * top)
    ax.set_xlabel(r"$1/\gamma$")
    ax.set_ylabel(r"$E$")
    ax.legend(loc="lower right", frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def local_figure(times, g2, g3, path: Path) -> Path:
    """Local g2 against time with g3 in an inset."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(times, g2, color="C0", lw=1.2)
    ax.set_xlabel(r"$t\ [4/\rho^2]$")
    ax.set_ylabel(r"$g^{(2)}(0,0)$")
    if np.isfinite(g3).any():
        inset = ax.inset_axes([0.58, 0.58, 0.38, 0.36])
        inset.plot(times, g2, color="C0", lw=0.8)
        inset.plot(times, g3, color="C3", lw=0.8, ls="--")
        inset.tick_params(labelsize=6)
    fig.tight_layout()
    return _save(fig, path)


def rows_figure(rows, path: Path, rho: float, reference=None) -> Path:
    """Non-local g2 against separation for several times."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    cmap = plt.get_cmap("viridis")
    for k, row in enumerate(rows):
        ax.plot(row.separations * rho, row.masked(), color=cmap(k / max(len(rows) - 1, 1)), lw=1.0, label=f"t={row.time:.4g}")
    if reference is not None:
        ax.plot(reference.separations * rho, reference.masked(), color="k", ls=":", lw=1.2, label="hard-sphere reference")
    ax.set_xlim(-2.0, 2.0)
    ax.set_xlabel(r"$x\rho$")
    ax.set_ylabel(r"$g^{(2)}(0,x)$")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def two_particle_figure(times, exact, single, beating, path: Path, companion=None) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(times, exact, color="k", lw=1.2, label="exact")
    ax.plot(times, single, color="C1", lw=0.9, ls="--", label="bound-state interference")
    ax.plot(times, beating, color="C0", lw=0.9, ls="-.", label="beating approximation")
    if companion is not None:
        ax.plot(companion[0], companion[1], color="C3", lw=1.0, marker=".", ms=2, label="TEBD")
    ax.set_xlabel(r"$t\ [4/\rho^2]$")
    ax.set_ylabel(r"$g^{(2)}(0,0)$")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return _save(fig, path)
