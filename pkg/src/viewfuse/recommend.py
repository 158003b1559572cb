"""k-NN collaborative-filtering link prediction over binary unit-item
matrices, PRAUC / max-F1 evaluation under nested cross-validation, NMF
topic modeling for the lexical view, and threshold recommendations.

The prediction score for unit m0 and item i0 is

    pred(m0, i0) = sum_j sim(m0, m_j) w_{m_j, i0} / sum_j sim(m0, m_j)

over the k nearest units m_j; a vanishing (or non-positive) similarity
mass predicts absence (score 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError
from .kernels import KernelMatrix

ITEM_KINDS = ("callee-unit", "transaction", "topic")


@dataclass
class ItemMatrix:
    """Binary unit-by-item membership. For callee-unit items the matrix
    is square and its diagonal is excluded from training and evaluation."""

    W: np.ndarray
    kind: str
    units: tuple[str, ...]
    item_names: tuple[str, ...]

    def __post_init__(self):
        self.W = np.asarray(self.W)
        if self.kind not in ITEM_KINDS:
            raise ValueError(f"unknown item kind {self.kind!r}")
        if not np.isin(self.W, (0, 1)).all():
            raise ValueError("item matrix must be binary")
        if self.kind == "callee-unit":
            if self.W.shape[0] != self.W.shape[1]:
                raise ValueError("callee-unit matrix must be square")
            if np.any(np.diag(self.W)):
                raise ValueError("callee-unit diagonal must be zero")

    @property
    def shape(self):
        return self.W.shape

    def cells(self, value):
        """Sorted (row, col) pairs holding `value`, excluding the
        diagonal for callee-unit matrices."""
        mask = self.W == value
        if self.kind == "callee-unit":
            np.fill_diagonal(mask, False)
        rows, cols = np.nonzero(mask)
        return list(zip(rows.tolist(), cols.tolist()))


def _resolve(label, names, what):
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < len(names):
            raise KeyError(f"{what} index {label} out of range")
        return int(label)
    try:
        return names.index(label)
    except ValueError:
        raise KeyError(f"unknown {what} {label!r}") from None


def _neighbors(K: np.ndarray, m0: int, k: int):
    """Indices of the k most similar units (excluding m0), ties broken
    by the lower index."""
    sims = K[m0].copy()
    sims[m0] = -np.inf
    order = np.argsort(-sims, kind="stable")
    return order[:k]


def knn_predict(kernel: KernelMatrix, items: ItemMatrix, m0, i0, k: int) -> float:
    """Neighborhood-weighted score for one (unit, item) cell."""
    n = kernel.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}]")
    m0 = _resolve(m0, list(kernel.units), "unit")
    i0 = _resolve(i0, list(items.item_names), "item")
    nbrs = _neighbors(kernel.K, m0, k)
    sims = kernel.K[m0, nbrs]
    total = sims.sum()
    if total == 0 or np.all(sims <= 0):
        return 0.0
    return float(sims @ items.W[nbrs, i0] / total)


def predict_all(kernel: KernelMatrix, items: ItemMatrix, k: int, cells) -> dict:
    """Scores for the given cells with those same cells hidden from
    the item matrix first (their w trained as 0). Returns {cell: score}."""
    n = kernel.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}]")
    cells = list(cells)
    if not cells:
        return {}
    W = np.array(items.W, dtype=float)
    for r, c in cells:
        W[r, c] = 0.0

    out = {}
    by_row: dict[int, list[int]] = {}
    for r, c in cells:
        by_row.setdefault(r, []).append(c)
    for r, cols in by_row.items():
        nbrs = _neighbors(kernel.K, r, k)
        sims = kernel.K[r, nbrs]
        total = sims.sum()
        if total == 0 or np.all(sims <= 0):
            for c in cols:
                out[(r, c)] = 0.0
            continue
        scores = sims @ W[nbrs][:, cols] / total
        for c, s in zip(cols, np.atleast_1d(scores)):
            out[(r, c)] = float(s)
    return out


# ---------------------------------------------------------------------------
# Ranking metrics


def _check_labels(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and matched")
    if labels.sum() == 0:
        raise ValueError("metrics need at least one positive label")
    if labels.sum() == len(labels):
        raise ValueError("metrics need at least one negative label")
    return scores, labels


def pr_auc(scores, labels) -> float:
    """Average precision without interpolation: the mean, over positives
    ranked by descending score (ties by index), of precision at each
    positive's rank."""
    scores, labels = _check_labels(scores, labels)
    order = np.argsort(-scores, kind="stable")
    ranked = labels[order]
    hits = np.cumsum(ranked)
    precision = hits / np.arange(1, len(ranked) + 1)
    return float(precision[ranked == 1].mean())


def max_f1(scores, labels) -> float:
    """Best F1 over all cut-points 'score >= t' for t in the observed
    scores."""
    scores, labels = _check_labels(scores, labels)
    pos_total = labels.sum()
    best = 0.0
    for t in np.unique(scores):
        pred = scores >= t
        tp = int((labels[pred] == 1).sum())
        if tp == 0:
            continue
        precision = tp / int(pred.sum())
        recall = tp / pos_total
        f1 = 2 * precision * recall / (precision + recall)
        best = max(best, f1)
    return best


# ---------------------------------------------------------------------------
# Nested cross-validation


@dataclass
class FoldResult:
    fold: int
    prauc: float
    max_f1: float
    kernel: str
    k: int


@dataclass
class EvalReport:
    """Per-outer-fold scores with the inner-selected configuration."""

    folds: list[FoldResult]
    mean_prauc: float
    mean_max_f1: float
    target: str
    outer: int
    inner: int
    seed: int
    pooled: tuple = field(default=(), repr=False)  # (scores, labels) per fold

    def to_csv(self, path):
        lines = [
            f"# nested_cv target={self.target} outer={self.outer} "
            f"inner={self.inner} seed={self.seed}",
            "fold,metric,value,chosen_kernel,chosen_k",
        ]
        for f in self.folds:
            lines.append(f"{f.fold},prauc,{f.prauc:.17g},{f.kernel},{f.k}")
            lines.append(f"{f.fold},max_f1,{f.max_f1:.17g},{f.kernel},{f.k}")
        lines.append(f"mean,prauc,{self.mean_prauc:.17g},,")
        lines.append(f"mean,max_f1,{self.mean_max_f1:.17g},,")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def summary(self):
        return (
            f"nested CV ({self.outer} outer / {self.inner} inner, seed {self.seed}): "
            f"mean PRAUC {self.mean_prauc:.4f}, mean max-F1 {self.mean_max_f1:.4f}"
        )


def _min_positives(outer, inner):
    p = outer
    while True:
        largest_fold = -(-p // outer)  # ceil
        if p - largest_fold >= inner:
            return p
        p += 1


def nested_cv(
    candidates,
    items: ItemMatrix,
    k_grid,
    outer: int = 10,
    inner: int = 9,
    seed: int = 0,
    target: str = "",
) -> EvalReport:
    """Positive cells split into `outer` folds by a seeded shuffle; an
    inner `inner`-fold CV over the remaining positives picks the
    (kernel, k) pair with the best mean PRAUC; the winner then scores the
    outer fold's positives against every zero cell.

    `candidates` is a list of (label, KernelMatrix). Fully deterministic
    given the seed; held-out positives are zeroed in every training copy
    of the item matrix.
    """
    candidates = list(candidates)
    k_grid = list(k_grid)
    if not candidates or not k_grid:
        raise ValueError("need at least one kernel candidate and one k")
    positives = items.cells(1)
    zeros = items.cells(0)
    needed = _min_positives(outer, inner)
    if len(positives) < needed:
        raise InsufficientDataError(
            f"nested CV with {outer} outer / {inner} inner folds needs at "
            f"least {needed} positive cells, found {len(positives)}"
        )
    if not zeros:
        raise InsufficientDataError("no zero cells to rank against")

    rng = np.random.default_rng(seed)
    perm = [positives[i] for i in rng.permutation(len(positives))]
    outer_folds = [list(f) for f in np.array_split(np.arange(len(perm)), outer)]

    folds_out = []
    pooled = []
    for f_idx, fold_pos_idx in enumerate(outer_folds):
        in_fold = set(fold_pos_idx)
        fold_cells = [perm[i] for i in fold_pos_idx]
        rest = [perm[i] for i in range(len(perm)) if i not in in_fold]
        inner_folds = [list(g) for g in np.array_split(np.arange(len(rest)), inner)]

        best = None  # (mean_prauc, label, kernel, k)
        for label, kernel in candidates:
            for k in k_grid:
                scores_inner = []
                for g in inner_folds:
                    g_cells = [rest[i] for i in g]
                    hidden = fold_cells + g_cells
                    preds = predict_all(kernel, items, k, hidden + zeros)
                    eval_cells = g_cells + zeros
                    s = np.array([preds[c] for c in eval_cells])
                    y = np.array([1] * len(g_cells) + [0] * len(zeros))
                    scores_inner.append(pr_auc(s, y))
                mean_inner = float(np.mean(scores_inner))
                if best is None or mean_inner > best[0]:
                    best = (mean_inner, label, kernel, k)

        _, label, kernel, k = best
        preds = predict_all(kernel, items, k, fold_cells + zeros)
        eval_cells = fold_cells + zeros
        s = np.array([preds[c] for c in eval_cells])
        y = np.array([1] * len(fold_cells) + [0] * len(zeros))
        folds_out.append(FoldResult(f_idx, pr_auc(s, y), max_f1(s, y), label, k))
        pooled.append((s, y))

    return EvalReport(
        folds_out,
        float(np.mean([f.prauc for f in folds_out])),
        float(np.mean([f.max_f1 for f in folds_out])),
        target,
        outer,
        inner,
        seed,
        tuple(pooled),
    )


# ---------------------------------------------------------------------------
# NMF topic modeling


@dataclass
class TopicModel:
    """D ~ W H with nonnegative factors; documents by topics, topics by
    terms."""

    W_doc: np.ndarray
    H: np.ndarray
    t: int
    error_history: list[float]
    terms: tuple[str, ...] = ()

    def top_keywords(self, top: int = 10):
        out = []
        for row in self.H:
            idx = np.argsort(-row, kind="stable")[:top]
            out.append([self.terms[i] if self.terms else str(i) for i in idx])
        return out


def nmf_topics(tfidf, t: int, iters: int = 200, seed: int = 0, tol: float = 1e-6) -> TopicModel:
    """Multiplicative-update NMF on the (nonnegative) document-term
    matrix, seeded uniform initialization, stopping at `iters` or when
    the relative Frobenius error change drops below `tol`."""
    D = np.asarray(tfidf, dtype=float)
    n, m = D.shape
    if not 1 <= t <= min(n, m):
        raise ValueError(f"topic count t must be in [1, {min(n, m)}]")
    if (D < 0).any():
        raise ValueError("NMF input must be nonnegative")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(D.mean() / t) if D.mean() > 0 else 1.0
    W = rng.uniform(1e-4, 1.0, size=(n, t)) * scale
    H = rng.uniform(1e-4, 1.0, size=(t, m)) * scale

    eps = 1e-12
    norm_D = np.linalg.norm(D)
    errors = [float(np.linalg.norm(D - W @ H) / max(norm_D, eps))]
    for _ in range(iters):
        H *= (W.T @ D) / (W.T @ W @ H + eps)
        W *= (D @ H.T) / (W @ (H @ H.T) + eps)
        err = float(np.linalg.norm(D - W @ H) / max(norm_D, eps))
        errors.append(err)
        if abs(errors[-2] - err) < tol * max(errors[0], eps):
            break
    return TopicModel(W, H, t, errors)


def binarize_topics(model: TopicModel, theta: float = 0.5, units=None) -> ItemMatrix:
    """Cell (i, j) = 1 iff W_doc[i, j] >= theta * max_j W_doc[i, :];
    all-zero rows stay zero. Row-relative thresholding is invariant to
    NMF's per-row scale ambiguity."""
    if not 0 < theta <= 1:
        raise ValueError("theta must be in (0, 1]")
    Wd = model.W_doc
    row_max = Wd.max(axis=1, keepdims=True)
    binary = np.where(row_max > 0, (Wd >= theta * row_max).astype(np.int8), 0)
    n, t = Wd.shape
    if units is None:
        units = tuple(f"u{i}" for i in range(n))
    return ItemMatrix(
        binary,
        "topic",
        tuple(units),
        tuple(f"topic_{j + 1}" for j in range(t)),
    )


# ---------------------------------------------------------------------------
# Threshold recommendations


def recommend_links(kernel: KernelMatrix, items: ItemMatrix, k: int, threshold: float = 0.5):
    """All absent cells whose predicted score reaches the threshold, sorted by
    descending score (ties by cell index). Nothing is masked: the full
    item matrix is the training evidence."""
    zeros = items.cells(0)
    out = []
    by_row: dict[int, list[int]] = {}
    for r, c in zeros:
        by_row.setdefault(r, []).append(c)
    for r, cols in by_row.items():
        nbrs = _neighbors(kernel.K, r, k)
        sims = kernel.K[r, nbrs]
        total = sims.sum()
        if total == 0 or np.all(sims <= 0):
            continue
        scores = sims @ items.W[nbrs][:, cols].astype(float) / total
        for c, s in zip(cols, np.atleast_1d(scores)):
            if s >= threshold:
                out.append((items.units[r], items.item_names[c], float(s)))
    index = {u: i for i, u in enumerate(items.units)}
    item_index = {m: i for i, m in enumerate(items.item_names)}
    out.sort(key=lambda rec: (-rec[2], index[rec[0]], item_index[rec[1]]))
    return out


def format_recommendations(recs, kind: str, topic_keywords=None):
    """Human-readable lines per view kind."""
    lines = []
    for unit, item, score in recs:
        if kind == "callee-unit":
            lines.append(f"{unit} should make a call to {item} (score {score:.3f})")
        elif kind == "transaction":
            lines.append(f"{unit} should be committed with {item} (score {score:.3f})")
        else:
            words = ""
            if topic_keywords is not None:
                t_idx = int(item.rsplit("_", 1)[1]) - 1
                words = " (i.e. " + ", ".join(topic_keywords[t_idx]) + ")"
            lines.append(f"{unit} should cover more of {item}{words} (score {score:.3f})")
    return lines
