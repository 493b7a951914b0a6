"""Regret-curve figure rendering for the simulate report path."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .session import RegretRecord


def render_regret_figure(records: list[RegretRecord], path: str, title: str) -> None:
    """Cumulative and per-iteration regret curves, written to ``path``."""
    iters = [r.iteration for r in records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(iters, [r.cum_max for r in records], label="cumulative max")
    ax1.plot(iters, [r.cum_avg for r in records], label="cumulative avg")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("cumulative regret")
    ax1.legend()
    ax2.plot(iters, [r.regret_max for r in records], label="max")
    ax2.plot(iters, [r.regret_avg for r in records], label="avg")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("regret")
    ax2.set_ylim(-0.02, 1.02)
    ax2.legend()
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
