"""Report figures: power-iteration convergence and the phi(c) curve."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometric import build_y_walk, phi  # noqa: E402


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_convergence(trace, path, title=None):
    """Norm sequence of the symmetric power iteration and its distance to the
    final value (log scale)."""
    it = np.array([p[0] for p in trace])
    norm = np.array([p[1] for p in trace])
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax0.plot(it, norm, lw=1.2)
    ax0.set_xlabel("iteration")
    ax0.set_ylabel(r"$\|H q_n\|$")
    gap = norm[-1] - norm[:-1]
    keep = gap > 0
    if keep.any():
        ax1.semilogy(it[:-1][keep], gap[keep], lw=1.2)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("distance to final value")
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def plot_phi(ts, gd, report, path, spread=2.0, points=81, title=None):
    """``phi(c)`` around ``c = -v/2`` with the estimator's bound marked."""
    walk = build_y_walk(ts, gd)
    centre = -0.5 * math.log(gd.growth)
    grid = np.linspace(centre - spread, centre + spread, points)
    values = [phi(walk, c) for c in grid]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(grid, values, lw=1.2, label=r"$\varphi(c)$")
    ax.axhline(report.bound, color="0.5", ls="--", lw=0.8, label="bound")
    ax.axvline(centre, color="0.5", ls=":", lw=0.8)
    ax.plot([centre], [report.bound], "o", ms=4)
    ax.set_xlabel("c")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    return _finish(fig, path)
