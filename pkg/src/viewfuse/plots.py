"""Figure rendering for report outputs.

Every report-producing command writes a PNG next to its delimited
output. Rendering is deterministic (fixed metadata, sizes, and dpi) so
reruns stay byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = dict(dpi=120, metadata={"Software": "viewfuse"})


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_dendrogram(dendrogram, path, title="Hierarchical clustering"):
    """Dendrogram from the merge records (leaves 0..n-1, merge k makes
    node n+k)."""
    from scipy.cluster.hierarchy import dendrogram as scipy_dendrogram

    merges = np.asarray(dendrogram.merges, dtype=float)
    n = len(dendrogram.units)
    fig, ax = plt.subplots(figsize=(max(6, n * 0.18), 4.5))
    if len(merges):
        scipy_dendrogram(
            merges,
            labels=list(dendrogram.units),
            leaf_rotation=90,
            leaf_font_size=7,
            ax=ax,
            link_color_func=lambda _: "tab:blue",
        )
    ax.set_title(title)
    ax.set_ylabel("merge distance")
    _finish(fig, path)


def plot_drift(drift, path, tol=None, title="Co-training embedding drift"):
    """Per-view drift against the iteration number, log scale."""
    drift = np.asarray(drift, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    if drift.size:
        iters = np.arange(1, drift.shape[0] + 1)
        for v in range(drift.shape[1]):
            ax.semilogy(iters, np.maximum(drift[:, v], 1e-18), label=f"view {v + 1}")
        ax.legend()
    if tol is not None:
        ax.axhline(tol, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("principal-angle drift")
    ax.set_title(title)
    _finish(fig, path)


def plot_pr_curves(pooled, path, title="Precision-recall per outer fold"):
    """One PR curve per fold from (scores, labels) pairs."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for idx, (scores, labels) in enumerate(pooled):
        scores = np.asarray(scores, dtype=float)
        labels = np.asarray(labels, dtype=int)
        order = np.argsort(-scores, kind="stable")
        ranked = labels[order]
        hits = np.cumsum(ranked)
        precision = hits / np.arange(1, len(ranked) + 1)
        recall = hits / max(int(labels.sum()), 1)
        ax.plot(recall, precision, linewidth=1.0, label=f"fold {idx}")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    if len(pooled) <= 10:
        ax.legend(fontsize=6, ncol=2)
    ax.set_title(title)
    _finish(fig, path)


def plot_subspace(coords, names, path, query=None, highlight=(),
                  title="Shared subspace"):
    """Scatter of the first two shared-subspace dimensions; the query,
    when given, is the red star."""
    coords = np.asarray(coords, dtype=float)
    xy = coords[:, :2] if coords.shape[1] >= 2 else np.column_stack(
        [coords[:, 0], np.zeros(len(coords))]
    )
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(xy[:, 0], xy[:, 1], s=18, color="tab:blue", alpha=0.7)
    chosen = set(highlight)
    for (x, y), name in zip(xy, names):
        if name in chosen:
            ax.annotate(name, (x, y), fontsize=6, alpha=0.9)
    if query is not None:
        q = np.asarray(query, dtype=float)
        ax.scatter([q[0]], [q[1] if len(q) > 1 else 0.0], marker="*", s=160,
                   color="tab:red", label="query", zorder=5)
        ax.legend()
    ax.set_xlabel("dimension 1")
    ax.set_ylabel("dimension 2")
    ax.set_title(title)
    _finish(fig, path)


def plot_topic_keywords(model, path, top=10, title="NMF topics"):
    """One horizontal bar panel per topic with its strongest terms."""
    t = model.H.shape[0]
    fig, axes = plt.subplots(1, t, figsize=(2.2 * t, 3.2), sharex=False)
    axes = np.atleast_1d(axes)
    for j, ax in enumerate(axes):
        row = model.H[j]
        idx = np.argsort(-row, kind="stable")[:top]
        words = [model.terms[i] if model.terms else str(i) for i in idx]
        ax.barh(np.arange(len(idx)), row[idx], color="tab:blue")
        ax.set_yticks(np.arange(len(idx)))
        ax.set_yticklabels(words, fontsize=6)
        ax.invert_yaxis()
        ax.set_title(f"topic {j + 1}", fontsize=8)
        ax.tick_params(axis="x", labelsize=6)
    fig.suptitle(title)
    _finish(fig, path)


def plot_recommendation_scores(recs, path, threshold=None, top=25,
                               title="Link recommendations"):
    """Descending score bars for the strongest suggested links."""
    fig, ax = plt.subplots(figsize=(6.5, max(2.5, 0.25 * min(len(recs), top))))
    shown = recs[:top]
    if shown:
        labels = [f"{u} -> {i}" for u, i, _ in shown]
        values = [s for _, _, s in shown]
        ypos = np.arange(len(shown))
        ax.barh(ypos, values, color="tab:blue")
        ax.set_yticks(ypos)
        ax.set_yticklabels(labels, fontsize=6)
        ax.invert_yaxis()
    else:
        ax.text(0.5, 0.5, "no recommendations", ha="center", va="center")
    if threshold is not None:
        ax.axvline(threshold, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("predicted link score")
    ax.set_title(title)
    _finish(fig, path)


def plot_grid_scores(rows, path, title="Single-view model selection"):
    """Horizontal bars of PD per kernel configuration (lower is better)."""
    labels = [r[0] for r in rows]
    values = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(6, max(2.5, 0.28 * len(rows))))
    ypos = np.arange(len(rows))
    ax.barh(ypos, values, color="tab:blue")
    ax.set_yticks(ypos)
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("path difference (lower is better)")
    ax.set_title(title)
    _finish(fig, path)
