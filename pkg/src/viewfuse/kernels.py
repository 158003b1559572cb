"""Similarity kernels over the unit set: vector-space kernels, graph
diffusion kernels, and the shared normalization / centering / distance
machinery.

Every operation returns a KernelMatrix carrying the unit order and a
provenance tag; matrices persist as CSV with the tag in a # header.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PSD_TOL = 1e-8
SYM_TOL = 1e-10


@dataclass
class KernelMatrix:
    """n x n symmetric PSD similarity over units, the system's common
    currency."""

    K: np.ndarray
    units: tuple[str, ...]
    provenance: str = ""

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.units = tuple(self.units)
        if self.K.shape != (len(self.units), len(self.units)):
            raise ValueError("kernel shape does not match the unit order")

    @property
    def n(self):
        return len(self.units)

    def validate(self):
        """Symmetry, finiteness, and PSD up to round-off."""
        if not np.all(np.isfinite(self.K)):
            raise ValueError(f"kernel {self.provenance!r} has non-finite entries")
        scale = max(1.0, float(np.abs(self.K).max()))
        if np.abs(self.K - self.K.T).max() > SYM_TOL * scale:
            raise ValueError(f"kernel {self.provenance!r} is not symmetric")
        eig = np.linalg.eigvalsh((self.K + self.K.T) / 2)
        lo, hi = float(eig[0]), float(eig[-1])
        if lo < -PSD_TOL * max(1.0, hi):
            raise ValueError(
                f"kernel {self.provenance!r} is not PSD: min eigenvalue {lo:g}"
            )
        return self

    def save_csv(self, path):
        write_matrix_csv(path, self.units, self.K, comment=self.provenance)

    @classmethod
    def load_csv(cls, path):
        names, M, comment = read_matrix_csv(path)
        return cls(M, tuple(names), comment)


def write_matrix_csv(path, colnames, M, comment=""):
    """First row: names; then rows of values at 17 significant digits."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = []
    if comment:
        lines.append("# " + comment)
    lines.append(",".join(colnames))
    for row in M:
        lines.append(",".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_csv(path):
    comment = ""
    names = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            comment = line[1:].strip()
            continue
        if names is None:
            names = line.split(",")
            continue
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    return names, np.array(rows), comment


def _symmetrize(K):
    return (K + K.T) / 2


# ---------------------------------------------------------------------------
# Vector-space kernels


def poly_kernel(X, d, r_offset=0.0, units=None) -> KernelMatrix:
    """(<x_i, x_j> + r)^d. d=1, r=0 is the plain linear kernel."""
    X = np.asarray(X, dtype=float)
    if d < 1 or int(d) != d:
        raise ValueError("polynomial degree must be a positive integer")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix has non-finite entries")
    K = _symmetrize((X @ X.T + r_offset) ** int(d))
    return KernelMatrix(K, _unit_names(units, X.shape[0]), f"poly(d={int(d)}, r={r_offset:g})")


def rbf_kernel(X, gamma, units=None) -> KernelMatrix:
    """exp(-gamma * ||x_i - x_j||^2); gamma plays the role of 1/sigma^2."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    X = np.asarray(X, dtype=float)
    sq = (X * X).sum(axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2 * (X @ X.T), 0.0)
    K = np.exp(-gamma * D2)
    np.fill_diagonal(K, 1.0)
    return KernelMatrix(_symmetrize(K), _unit_names(units, X.shape[0]), f"rbf(gamma={gamma:g})")


def bow_kernel(X, units=None) -> KernelMatrix:
    """Cosine of the angle between feature rows. All-zero rows get
    self-similarity 1 and cross-similarity 0, with a warning."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    zero = norms == 0
    if zero.any():
        warnings.warn(
            f"{int(zero.sum())} all-zero rows in bag-of-words features", stacklevel=2
        )
    safe = np.where(zero, 1.0, norms)
    K = (X / safe[:, None]) @ (X / safe[:, None]).T
    np.fill_diagonal(K, 1.0)
    return KernelMatrix(_symmetrize(K), _unit_names(units, X.shape[0]), "bow")


def _unit_names(units, n):
    if units is None:
        return tuple(f"u{i}" for i in range(n))
    ids = getattr(units, "ids", units)
    return tuple(ids)


# ---------------------------------------------------------------------------
# Graph diffusion kernels


def _sym_adjacency(graph_or_matrix):
    A = getattr(graph_or_matrix, "A", graph_or_matrix)
    A = np.asarray(A, dtype=float)
    return (A + A.T) / 2


def _expm_sym(S):
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    vals, vecs = np.linalg.eigh(S)
    return _symmetrize((vecs * np.exp(vals)) @ vecs.T)


def exp_diffusion(graph, alpha, units=None) -> KernelMatrix:
    """exp(alpha * sym(A)): the power-series diffusion over the call
    graph, with the directed adjacency symmetrized first."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    S = _sym_adjacency(graph)
    K = _expm_sym(alpha * S)
    u = getattr(graph, "units", units)
    return KernelMatrix(K, _unit_names(u, S.shape[0]), f"ed(alpha={alpha:g})")


def laplacian_diffusion(graph, alpha, units=None) -> KernelMatrix:
    """exp(-alpha * L) with L = Deg(sym(A)) - sym(A). Rows sum to 1."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    S = _sym_adjacency(graph)
    L = np.diag(S.sum(axis=1)) - S
    K = _expm_sym(-alpha * L)
    u = getattr(graph, "units", units)
    return KernelMatrix(K, _unit_names(u, S.shape[0]), f"led(alpha={alpha:g})")


# ---------------------------------------------------------------------------
# Distances, normalization, centering


@dataclass
class DistanceMatrix:
    """Squared pairwise distances induced by a kernel."""

    D2: np.ndarray
    units: tuple[str, ...]


def kernel_to_distance(kernel: KernelMatrix) -> DistanceMatrix:
    """D2[i,j] = K[i,i] + K[j,j] - 2 K[i,j]; floating-point negatives are
    clamped and the diagonal forced to zero."""
    K = kernel.K
    scale = max(1.0, float(np.abs(K).max()))
    if np.abs(K - K.T).max() > 1e-8 * scale:
        raise ValueError("kernel is not symmetric within tolerance")
    diag = np.diag(K)
    D2 = np.maximum(diag[:, None] + diag[None, :] - 2 * K, 0.0)
    np.fill_diagonal(D2, 0.0)
    return DistanceMatrix(D2, kernel.units)


def normalize_kernel(kernel: KernelMatrix, mode: str = "trace") -> KernelMatrix:
    """cosine: K / sqrt(diag outer); trace: scale so trace(K) = n."""
    K = kernel.K
    if mode == "cosine":
        diag = np.diag(K)
        if np.any(diag <= 0):
            raise ValueError("cosine normalization needs a positive diagonal")
        d = np.sqrt(diag)
        out = K / np.outer(d, d)
        np.fill_diagonal(out, 1.0)
    elif mode == "trace":
        tr = float(np.trace(K))
        if tr <= 0:
            raise ValueError("trace normalization needs a positive trace")
        out = K * (kernel.n / tr)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return KernelMatrix(
        _symmetrize(out), kernel.units, f"{mode}-norm[{kernel.provenance}]"
    )


def center_kernel(kernel: KernelMatrix) -> KernelMatrix:
    """Double centering: (I - 1_n) K (I - 1_n); rows and columns then
    sum to zero."""
    K = kernel.K
    n = K.shape[0]
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    out = K - row - col + K.mean()
    return KernelMatrix(
        _symmetrize(out), kernel.units, f"centered[{kernel.provenance}]"
    )


# ---------------------------------------------------------------------------
# The tested parameter grids (one entry per kernel/parameter combination)

DECADES = tuple(10.0 ** e for e in range(-5, 3))
POLY_DEGREES = (1, 2, 3, 4, 5)
STRING_GRID = (1, 2, 5, 10, 15, 20)

VIEW_KERNELS = {
    "struct": ("ed", "led"),
    "evol": ("poly", "rbf"),
    "lex": ("bow", "poly", "rbf", "cons", "spec", "exp"),
}


def view_grid(view: str):
    """Every (kernel, params) combination tested for a view."""
    if view not in VIEW_KERNELS:
        raise ValueError(f"unknown view {view!r}")
    grid = []
    for kind in VIEW_KERNELS[view]:
        if kind == "bow" or kind == "cons":
            grid.append((kind, {}))
        elif kind == "poly":
            grid.extend((kind, {"d": d}) for d in POLY_DEGREES)
        elif kind == "rbf":
            grid.extend((kind, {"gamma": g}) for g in DECADES)
        elif kind in ("ed", "led"):
            grid.extend((kind, {"alpha": a}) for a in DECADES)
        elif kind == "spec":
            grid.extend((kind, {"p": p}) for p in STRING_GRID)
        elif kind == "exp":
            grid.extend((kind, {"lam": lam}) for lam in STRING_GRID)
    return grid
