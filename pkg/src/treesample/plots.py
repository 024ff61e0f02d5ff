"""Figure rendering for CLI reports (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_optimal_sets(path, leaf_labels, selections):
    """Selected-leaf map: one row per sample size, one column per leaf.

    ``selections`` is a list of (n, leaf label list).
    """
    index = {label: i for i, label in enumerate(leaf_labels)}
    fig, ax = plt.subplots(figsize=(max(4.0, 0.25 * len(leaf_labels) + 2), 3.2))
    for n, labels in selections:
        xs = [index[l] for l in labels]
        ax.scatter(xs, [n] * len(xs), marker="s", s=36, color="tab:blue")
    ax.set_xticks(range(len(leaf_labels)))
    ax.set_xticklabels(leaf_labels, rotation=90, fontsize=7)
    ax.set_xlabel("leaf")
    ax.set_ylabel("sample size n")
    ax.set_title("optimal leaf sets")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_survey(path, result, values=None):
    """Normalized-LMMSE comparison of uniform, clustered and random patterns."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    if values is not None and len(values):
        ax.hist(values, bins=40, color="0.7", label=f"{len(values)} random patterns")
    ax.axvline(result.lmmse_uniform, color="tab:green", lw=2, label="uniform")
    ax.axvline(result.lmmse_clustered, color="tab:red", lw=2, label="clustered")
    if values is None and result.random_min is not None:
        ax.axvline(result.random_min, color="0.4", ls="--", label="random min/max")
        ax.axvline(result.random_max, color="0.4", ls="--")
    ax.set_xlabel("normalized LMMSE")
    ax.set_ylabel("count")
    ax.set_title(f"sampling patterns, n={result.n}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_paths(path, cumulative, max_paths=32):
    """Cumulative synthesized paths over the unit interval."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    shown = cumulative[:max_paths]
    steps = shown.shape[1]
    t = [(k + 1) / steps for k in range(steps)]
    for row in shown:
        ax.plot(t, row, lw=0.8, alpha=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("path value")
    ax.set_title(f"{len(shown)} synthesized path(s)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
