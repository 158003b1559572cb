"""Agglomerative hierarchical clustering over squared distances and the
path-difference score against an authoritative tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import DistanceMatrix
from .trees import TreeNode, leaf_path_lengths

LINKAGES = ("average", "complete", "single")


@dataclass
class Dendrogram:
    """Binary merge tree with nondecreasing heights root-ward."""

    root: TreeNode
    units: tuple[str, ...]
    merges: np.ndarray  # (n-1) x 4 linkage records: id_i, id_j, height, size


def agglomerate(distances: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Merge on d = sqrt(D2). Ties always break on the lexicographically
    smallest (i, j) cluster-id pair, so the tree is deterministic.

    Cluster ids follow the usual convention: leaves are 0..n-1, the k-th
    merge creates id n+k.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    D2 = np.asarray(distances.D2, dtype=float)
    if np.isnan(D2).any():
        raise ValueError("distance matrix contains NaN")
    units = tuple(distances.units)
    n = len(units)
    if n == 0:
        raise ValueError("no units to cluster")
    if n == 1:
        return Dendrogram(TreeNode(units[0]), units, np.zeros((0, 4)))

    total = 2 * n - 1
    # Working distances over all (eventual) cluster ids; inactive slots inf.
    work = np.full((total, total), np.inf)
    work[:n, :n] = np.sqrt(np.maximum(D2, 0.0))
    np.fill_diagonal(work, np.inf)

    nodes = {i: TreeNode(units[i]) for i in range(n)}
    sizes = np.zeros(total)
    sizes[:n] = 1
    active = np.zeros(total, dtype=bool)
    active[:n] = True
    merges = np.zeros((n - 1, 4))

    for step in range(n - 1):
        masked = np.where(active[:, None] & active[None, :], work, np.inf)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, total)
        if i > j:
            i, j = j, i
        height = work[i, j]
        new = n + step

        others = active.copy()
        others[i] = others[j] = False
        idx = np.where(others)[0]
        if linkage == "average":
            d_new = (sizes[i] * work[i, idx] + sizes[j] * work[j, idx]) / (
                sizes[i] + sizes[j]
            )
        elif linkage == "complete":
            d_new = np.maximum(work[i, idx], work[j, idx])
        else:
            d_new = np.minimum(work[i, idx], work[j, idx])
        work[new, idx] = d_new
        work[idx, new] = d_new

        active[i] = active[j] = False
        active[new] = True
        sizes[new] = sizes[i] + sizes[j]
        nodes[new] = TreeNode("", [nodes[i], nodes[j]], height=float(height))
        merges[step] = (i, j, height, sizes[new])

    return Dendrogram(nodes[2 * n - 2], units, merges)


def pd_metric(t1: TreeNode, t2: TreeNode):
    """Sum over unordered leaf pairs of |path_T1(i,j) - path_T2(i,j)|,
    where a path length is an edge count. Heights are ignored."""
    leaves1 = sorted(t1.leaves())
    leaves2 = sorted(t2.leaves())
    if leaves1 != leaves2:
        only1 = set(leaves1) - set(leaves2)
        only2 = set(leaves2) - set(leaves1)
        raise ValueError(
            f"trees have different leaf sets (e.g. {sorted(only1)[:3]} vs {sorted(only2)[:3]})"
        )
    p1 = leaf_path_lengths(t1, leaves1)
    p2 = leaf_path_lengths(t2, leaves1)
    diff = np.abs(p1 - p2)
    return int(np.triu(diff, 1).sum())
