"""Static SVG figures for the experiment commands (no display needed)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so reruns produce identical files
matplotlib.rcParams["svg.hashsalt"] = "poolgame"
_META = {"Date": None, "Creator": "poolgame"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def plot_evolution(series, path, title=""):
    """``series`` maps a label to ``(times, states, payoffs_or_None)``."""
    with_payoffs = any(p is not None for _, _, p in series.values())
    fig, axes = plt.subplots(1, 2 if with_payoffs else 1, figsize=(10 if with_payoffs else 5.5, 4), squeeze=False)
    styles = ["-", "--", ":"]
    for k, (label, (t, x, y)) in enumerate(series.items()):
        for i in range(x.shape[1]):
            axes[0, 0].plot(t, x[:, i], styles[k % 3], color=f"C{i}", label=f"pool {i + 1} ({label})")
            if with_payoffs and y is not None:
                axes[0, 1].plot(t, y[:, i], styles[k % 3], color=f"C{i}", label=f"pool {i + 1} ({label})")
    axes[0, 0].set_xlabel("time")
    axes[0, 0].set_ylabel("population share")
    axes[0, 0].set_ylim(-0.02, 1.02)
    axes[0, 0].legend(fontsize="small")
    if with_payoffs:
        axes[0, 1].set_xlabel("time")
        axes[0, 1].set_ylabel("miner payoff")
        axes[0, 1].axhline(0.0, color="0.6", lw=0.8)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def plot_phase(grid, field, trajectory_x1, trajectory_rate, rest_points, path, title=""):
    """Velocity of pool 1's share against the share, with a trajectory overlay.

    ``rest_points`` is a list of ``(x1, verdict)`` pairs.
    """
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(grid, field, color="C0", label="dx1/dt")
    ax.axhline(0.0, color="0.6", lw=0.8)
    if trajectory_x1 is not None:
        ax.plot(trajectory_x1, trajectory_rate, "o", ms=2.5, color="C1", label="trajectory")
    for x1, verdict in rest_points:
        filled = verdict == "ESS"
        ax.plot([x1], [0.0], "o", ms=8, mfc="k" if filled else "w", mec="k")
    ax.set_xlabel("share of pool 1")
    ax.set_ylabel("dx1/dt")
    ax.legend(fontsize="small")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(param, values, x_star, payoffs, path, title=""):
    values = np.asarray(values)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for i in range(x_star.shape[1]):
        ax1.plot(values, x_star[:, i], "o-", color=f"C{i}", label=f"pool {i + 1}")
        ax2.plot(values, payoffs[:, i], "o-", color=f"C{i}", label=f"pool {i + 1}")
    ax1.set_xlabel(param)
    ax1.set_ylabel("share at equilibrium")
    ax1.legend(fontsize="small")
    ax2.set_xlabel(param)
    ax2.set_ylabel("miner payoff at equilibrium")
    ax2.axhline(0.0, color="0.6", lw=0.8)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)
