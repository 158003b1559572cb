"""Fusing per-view kernels: multiple-kernel addition, co-trained
spectral embeddings, and (kernel) canonical correlation analysis.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .ingest import fix_signs
from .kernels import (
    KernelMatrix,
    center_kernel,
    normalize_kernel,
    read_matrix_csv,
    write_matrix_csv,
)


def _check_same_units(kernels):
    if len(kernels) < 2:
        raise ValueError("fusion needs at least 2 views")
    units = kernels[0].units
    for k in kernels[1:]:
        if k.units != units:
            raise ValueError("kernels are indexed by different unit orders")
    return units


# ---------------------------------------------------------------------------
# Multiple kernel learning: addition


def mkl_add(kernels, normalize: str = "trace") -> KernelMatrix:
    """Entrywise sum of per-view kernels after scale normalization.
    Addition in kernel space concatenates the views' feature spaces."""
    units = _check_same_units(kernels)
    total = np.zeros_like(kernels[0].K)
    tags = []
    for k in kernels:
        kn = normalize_kernel(k, normalize) if normalize else k
        total = total + kn.K
        tags.append(k.provenance)
    return KernelMatrix(total, units, "mkl[" + " + ".join(tags) + "]")


# ---------------------------------------------------------------------------
# Co-trained spectral embedding


@dataclass
class SpectralEmbedding:
    """Per-view spectral coordinates plus their column concatenation."""

    per_view: list[np.ndarray]  # n x c each, rows normalized
    fused: np.ndarray  # n x (V * c)
    c: int
    drift: list[list[float]]  # per iteration, per view
    converged: bool
    iterations_run: int
    units: tuple[str, ...]
    info_view: int | None = None

    @property
    def coordinates(self):
        """Fused coordinates, or a single view's when info_view is set."""
        if self.info_view is None:
            return self.fused
        return self.per_view[self.info_view]


def _spectral_basis(S, c):
    """Top-c eigenvectors of D^-1/2 S D^-1/2 (the symmetric-normalized
    similarity; identical eigenvectors to the smallest of its Laplacian),
    orthonormal columns, deterministic signs."""
    d = S.sum(axis=1)
    d = np.where(np.abs(d) < 1e-12, 1e-12, d)
    inv = 1.0 / np.sqrt(np.abs(d))
    M = inv[:, None] * S * inv[None, :]
    M = (M + M.T) / 2
    vals, vecs = np.linalg.eigh(M)
    return fix_signs(vecs[:, ::-1][:, :c])


def _subspace_drift(U_old, U_new):
    """Chordal principal-angle distance between column spans."""
    c = U_old.shape[1]
    overlap = np.linalg.norm(U_old.T @ U_new) ** 2
    return float(np.sqrt(max(c - overlap, 0.0)))


def _row_normalize(U):
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(norms < 1e-300, 1.0, norms)


def cotrain(
    kernels,
    c: int,
    iters: int = 50,
    tol: float = 1e-6,
    info_view: int | None = None,
) -> SpectralEmbedding:
    """Alternate per-view spectral embeddings, each iteration projecting
    every view's ORIGINAL kernel through the other views' spectral
    projectors, until the embeddings stop drifting or iters runs out.

    Non-convergence is tolerated: the drift curve is returned either way.
    """
    units = _check_same_units(kernels)
    n = len(units)
    if c < 2:
        raise ValueError("embedding width c must be >= 2")
    if c >= n:
        raise ValueError(f"embedding width c={c} must be below n={n}")
    originals = [k.K.copy() for k in kernels]
    V = len(originals)

    U = [_spectral_basis(S, c) for S in originals]
    drift_curve: list[list[float]] = []
    converged = False
    it = 0
    for it in range(1, iters + 1):
        projected = []
        for v in range(V):
            P = np.zeros((n, n))
            for w in range(V):
                if w != v:
                    P += U[w] @ (U[w].T @ originals[v])
            P /= V - 1
            projected.append((P + P.T) / 2)
        U_new = [_spectral_basis(S, c) for S in projected]
        drifts = [_subspace_drift(U[v], U_new[v]) for v in range(V)]
        drift_curve.append(drifts)
        U = U_new
        if max(drifts) < tol:
            converged = True
            break

    per_view = [_row_normalize(u) for u in U]
    fused = np.hstack(per_view)
    return SpectralEmbedding(
        per_view, fused, c, drift_curve, converged, it, units, info_view
    )


# ---------------------------------------------------------------------------
# Canonical correlation analysis


@dataclass
class CcaModel:
    """Per-view decompositions and canonical projections; the shared
    subspace overlays (averages) the per-view canonical coordinates."""

    W: list[np.ndarray]  # per view, (p_v or rank_v) x d
    correlations: np.ndarray  # d, descending, in [0, 1]
    coords: list[np.ndarray]  # per-view canonical coordinates, n x d
    shared: np.ndarray  # n x d
    d: int
    kappa: float
    units: tuple[str, ...]
    # kernel-CCA extras (None for feature-space CCA)
    kernels_centered: list[np.ndarray] | None = None
    U: list[np.ndarray] | None = None
    S: list[np.ndarray] | None = None
    feature_means: list[np.ndarray] | None = field(default=None, repr=False)
    provenance: str = ""

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "d": self.d,
            "kappa": self.kappa,
            "views": len(self.W),
            "kind": "kcca" if self.U is not None else "cca",
            "provenance": self.provenance,
            "correlations": [format(v, ".17g") for v in self.correlations],
            "units": list(self.units),
        }
        (directory / "model.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        for v in range(len(self.W)):
            cols = [f"c{k}" for k in range(self.W[v].shape[1])]
            write_matrix_csv(directory / f"W_{v}.csv", cols, self.W[v])
            write_matrix_csv(
                directory / f"coords_{v}.csv",
                [f"c{k}" for k in range(self.coords[v].shape[1])],
                self.coords[v],
            )
            if self.U is not None:
                write_matrix_csv(
                    directory / f"U_{v}.csv",
                    [f"c{k}" for k in range(self.U[v].shape[1])],
                    self.U[v],
                )
                write_matrix_csv(directory / f"S_{v}.csv", ["s"], self.S[v][:, None])
                write_matrix_csv(
                    directory / f"K_{v}.csv", self.units, self.kernels_centered[v]
                )
        write_matrix_csv(
            directory / "shared.csv",
            [f"c{k}" for k in range(self.shared.shape[1])],
            self.shared,
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = json.loads((directory / "model.json").read_text(encoding="utf-8"))
        V = meta["views"]
        W, coords, U, S, Kc = [], [], [], [], []
        for v in range(V):
            W.append(read_matrix_csv(directory / f"W_{v}.csv")[1])
            coords.append(read_matrix_csv(directory / f"coords_{v}.csv")[1])
            if meta["kind"] == "kcca":
                U.append(read_matrix_csv(directory / f"U_{v}.csv")[1])
                S.append(read_matrix_csv(directory / f"S_{v}.csv")[1].ravel())
                Kc.append(read_matrix_csv(directory / f"K_{v}.csv")[1])
        shared = read_matrix_csv(directory / "shared.csv")[1]
        return cls(
            W=W,
            correlations=np.array([float(v) for v in meta["correlations"]]),
            coords=coords,
            shared=shared,
            d=meta["d"],
            kappa=meta["kappa"],
            units=tuple(meta["units"]),
            kernels_centered=Kc or None,
            U=U or None,
            S=S or None,
            provenance=meta.get("provenance", ""),
        )


def _solve_multiset_cca(blocks, d, ridge_factor):
    """Generalized eigenproblem over V centered coordinate blocks:
    off-diagonal cross-covariances against ridged diagonal covariances.
    Returns per-view projections, normalized correlations, per-view
    coordinates."""
    V = len(blocks)
    n = blocks[0].shape[0]
    dims = [B.shape[1] for B in blocks]
    total = sum(dims)
    offsets = np.cumsum([0] + dims)

    A = np.zeros((total, total))
    B = np.zeros((total, total))
    for v in range(V):
        sl_v = slice(offsets[v], offsets[v + 1])
        cov_vv = blocks[v].T @ blocks[v] / (n - 1)
        ridge = ridge_factor * float(np.mean(np.diag(cov_vv)))
        if ridge <= 0:
            ridge = ridge_factor
        B[sl_v, sl_v] = cov_vv + ridge * np.eye(dims[v])
        for w in range(V):
            if w != v:
                sl_w = slice(offsets[w], offsets[w + 1])
                A[sl_v, sl_w] = blocks[v].T @ blocks[w] / (n - 1)

    vals, vecs = scipy.linalg.eigh((A + A.T) / 2, (B + B.T) / 2)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]

    d_max = min(dims)
    if d > d_max:
        warnings.warn(f"requested d={d} exceeds attainable {d_max}; reducing", stacklevel=3)
        d = d_max
    vals, vecs = vals[:d], vecs[:, :d]

    # Deterministic sign: flip whole stacked eigenvectors so per-view
    # signs stay coherent for the overlay.
    vecs = fix_signs(vecs)

    W, coords = [], []
    for v in range(V):
        Wv = vecs[offsets[v]:offsets[v + 1], :]
        Zv = blocks[v] @ Wv
        # unit canonical variance per view, so views overlay on equal footing
        scale = Zv.std(axis=0, ddof=1)
        scale = np.where(scale < 1e-12, 1.0, scale)
        W.append(np.ascontiguousarray(Wv / scale))
        coords.append(np.ascontiguousarray(Zv / scale))

    lam = vals / (V - 1)
    return W, np.clip(lam, 0.0, None), coords, d


def cca(X1, X2, d) -> CcaModel:
    """Linear CCA between two feature matrices (columns centered
    internally), solved as the generalized eigenproblem over the
    covariance blocks with a tiny ridge for rank safety."""
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    n = X1.shape[0]
    if X2.shape[0] != n:
        raise ValueError("views disagree on the number of rows")
    if n < 3:
        raise ValueError("CCA needs at least 3 samples")
    means = [X1.mean(axis=0), X2.mean(axis=0)]
    blocks = [X1 - means[0], X2 - means[1]]
    W, lam, coords, d = _solve_multiset_cca(blocks, d, ridge_factor=1e-8)
    shared = sum(coords) / len(coords)
    return CcaModel(
        W=W,
        correlations=lam,
        coords=coords,
        shared=shared,
        d=d,
        kappa=0.0,
        units=tuple(f"u{i}" for i in range(n)),
        feature_means=means,
        provenance="cca",
    )


def kcca(kernels, d, kappa: float = 0.1) -> CcaModel:
    """Kernel CCA: center each kernel, map units onto kernel principal
    coordinates U*S, then run regularized (multiset) CCA over those
    coordinate blocks. Shared subspace = average of per-view canonical
    coordinates."""
    units = _check_same_units(kernels)
    if d < 1:
        raise ValueError("subspace dimension d must be >= 1")
    centered, Us, Ss, blocks = [], [], [], []
    for k in kernels:
        Kc = center_kernel(k).K
        vals, vecs = np.linalg.eigh(Kc)
        vals, vecs = vals[::-1], vecs[:, ::-1]
        keep = vals > 1e-9 * max(vals[0], 0) if vals[0] > 0 else vals > 0
        if not np.any(keep):
            raise ValueError(f"kernel {k.provenance!r} centers to zero")
        vecs = fix_signs(vecs[:, keep])
        s = np.sqrt(vals[keep])
        centered.append(Kc)
        Us.append(vecs)
        Ss.append(s)
        blocks.append(vecs * s)  # PC = U S, columns already mean-zero
    W, lam, coords, d = _solve_multiset_cca(blocks, d, ridge_factor=kappa)
    shared = sum(coords) / len(coords)
    return CcaModel(
        W=W,
        correlations=lam,
        coords=coords,
        shared=shared,
        d=d,
        kappa=kappa,
        units=units,
        kernels_centered=centered,
        U=Us,
        S=Ss,
        provenance="kcca[" + " + ".join(k.provenance for k in kernels) + "]",
    )


# ---------------------------------------------------------------------------
# Similarity induced by fused representations (for clustering / CF)


def embedding_similarity(emb: SpectralEmbedding) -> KernelMatrix:
    """Inner products of the row-normalized fused embedding."""
    E = _row_normalize(emb.coordinates)
    G = E @ E.T
    return KernelMatrix((G + G.T) / 2, emb.units, "cotrain-similarity")


def subspace_similarity(model: CcaModel) -> KernelMatrix:
    """Cosine similarity of shared-subspace coordinates."""
    Z = model.shared
    norms = np.linalg.norm(Z, axis=1)
    safe = np.where(norms < 1e-300, 1.0, norms)
    C = (Z / safe[:, None]) @ (Z / safe[:, None]).T
    np.fill_diagonal(C, 1.0)
    return KernelMatrix((C + C.T) / 2, model.units, "kcca-similarity")
