"""Figures for the CLI report path. Everything renders off-screen (Agg)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bayesnet import Distribution  # noqa: E402
from .loop import SensemakingDecision  # noqa: E402
from .memory import SettleResult  # noqa: E402
from .oracle import EnergyLandscape  # noqa: E402


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    # Fixed metadata keeps reruns byte-identical.
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def posterior_bars(dists: Mapping[str, Distribution], path: Path, title: str = "") -> Path:
    names = list(dists)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(names) + 2), 3.2))
    first = [dists[n].probs[0] for n in names]
    ax.bar(range(len(names)), first, color="tab:blue")
    ax.set_xticks(range(len(names)), [f"{n}={dists[n].states[0]}" for n in names], rotation=45, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("probability")
    ax.axhline(0.5, color="grey", lw=0.8, ls=":")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def settle_trace(res: SettleResult, path: Path, theta_on: float | None = None) -> Path:
    net = res.network
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8.5, 6), sharex=True)
    sweeps = range(0, len(res.trajectory) + 1)
    start = net.initial_activations()
    for i, name in enumerate(net.names):
        ys = [start[i]] + [row[i] for row in res.trajectory]
        top.plot(sweeps, ys, lw=1.2, ls="-" if net.kind(name) == "memory" else "--", label=name)
    if theta_on is not None:
        top.axhline(theta_on, color="grey", lw=0.8, ls=":")
    top.set_ylabel("activation")
    top.legend(fontsize=6, loc="upper left", bbox_to_anchor=(1.01, 1.0), frameon=False)
    bottom.plot(range(len(res.energies)), res.energies, color="black")
    bottom.set_xlabel("sweep")
    bottom.set_ylabel("energy")
    fig.tight_layout()
    return _save(fig, path)


def round_posteriors(dec: SensemakingDecision, path: Path) -> Path:
    rule = dec.rule
    ys = [dec.initial[rule.trigger]] + [r.posterior[rule.trigger] for r in dec.rounds]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(range(len(ys)), ys, marker="o")
    ax.axhline(rule.threshold, color="tab:red", lw=0.8, ls="--", label="threshold")
    ax.set_xticks(range(len(ys)), ["initial"] + [str(r.index) for r in dec.rounds])
    ax.set_ylim(0, 1)
    ax.set_xlabel("round")
    ax.set_ylabel(f"P({rule.query}={rule.trigger})")
    ax.set_title(dec.action)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def energy_landscape(land: EnergyLandscape, path: Path, marked: float | None = None) -> Path:
    """Every discretized pattern's energy, lowest first."""
    es = sorted(land.energies.values())
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(len(es)), es, lw=1)
    ax.axhline(land.minimum, color="tab:green", lw=0.8, ls="--", label="minimum")
    if marked is not None:
        ax.axhline(marked, color="tab:red", lw=0.8, ls=":", label="settled pattern")
    ax.set_xlabel(f"pattern rank (of {len(es)})")
    ax.set_ylabel("energy")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)
