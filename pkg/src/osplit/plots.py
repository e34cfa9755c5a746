"""Figure rendering for the report paths (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_sweep_figure", "render_example_figure"]


def render_sweep_figure(rows: list[dict], path: str) -> None:
    """Delay curves and code entropy versus the number of users."""
    ns = [r["n_users"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(ns, [r["osa_delay_sim"] for r in rows], "o-", label="splitter (simulated)")
    ax1.plot(ns, [r["mpa_delay_sim"] for r in rows], "s--", label="greedy code (simulated)")
    ax1.plot(ns, [r["mpa_delay_exact"] for r in rows], "k.:", label="greedy code (exact)")
    ax1.set_xlabel("users N")
    ax1.set_ylabel("mean minislots to resolve")
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=8)
    ax2.plot(ns, [r["mpa_entropy_bits"] for r in rows], "d-", color="tab:red")
    ax2.set_xlabel("users N")
    ax2.set_ylabel("threshold entropy (bits)")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_example_figure(name: str, payload, path: str) -> None:
    """Bar chart for one of the named example reports."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    if name == "constant3":
        labels = list(payload)
        delays = [payload[k]["mean_delay_charged"] for k in labels]
        entropies = [payload[k]["empirical_entropy_bits"] for k in labels]
        xs = range(len(labels))
        ax.bar([x - 0.18 for x in xs], delays, width=0.36, label="mean delay (minislots)")
        ax.bar([x + 0.18 for x in xs], entropies, width=0.36, label="codeword entropy (bits)")
        ax.set_xticks(list(xs), labels)
        ax.set_title("constant channel, 3 users")
    else:
        # payload: {strategy: [(state, depth), ...]} ordered top state down
        strategies = list(payload)
        states = [str(s) for s, _ in payload[strategies[0]]]
        xs = range(len(states))
        for i, strat in enumerate(strategies):
            depths = [d for _, d in payload[strat]]
            off = (i - (len(strategies) - 1) / 2) * 0.36
            ax.bar([x + off for x in xs], depths, width=0.36, label=strat)
        ax.set_xticks(list(xs), states, rotation=30, fontsize=7)
        ax.set_ylabel("minislots to resolve")
        ax.set_title("correlated 7-state channel")
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
