"""Figure rendering for sweep results (saved to file, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STYLE = {
    "zf": dict(color="tab:red", marker="s", label="ZF baseline"),
    "decentralized": dict(color="tab:blue", marker="o", label="Decentralized (DE budgets)"),
    "centralized": dict(color="tab:green", marker="^", label="Centralized (lower bound)"),
}


def plot_power_vs_antennas(rows, out_path):
    """Mean total power versus antenna count, one curve per scheme."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for scheme in ("zf", "decentralized", "centralized"):
        pts = sorted((r.n_tx, r.mean_power_w, r.std_power_w)
                     for r in rows if r.scheme == scheme)
        if not pts:
            continue
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        es = [p[2] for p in pts]
        ax.errorbar(xs, ys, yerr=es, capsize=3, lw=1.5, ms=6, **_STYLE[scheme])
    ax.set_xlabel("Transmit antennas per BS")
    ax.set_ylabel("Mean total transmit power [W]")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
