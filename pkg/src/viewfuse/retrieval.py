"""Cross-modal code search: project a free-text query into the KCCA
shared subspace and rank software units by euclidean distance.

The projection chain for a query q in view v:

    k_q   = k_v(q, x_i) over all training units
    k~_q  = (k_q - rowmean(K_v)) (I - 1_n)      [centering, optional]
    q_pc  = k~_q U_v S_v^-1                     [kernel principal axes]
    q_cca = q_pc W_v                            [canonical projection]
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyQueryError
from .fusion import CcaModel, kcca
from .ingest import Corpus, tokenize, default_stopwords, java_reserved_words
from .kernels import read_matrix_csv, write_matrix_csv


@dataclass
class RetrievalModel:
    """A fitted KCCA model plus everything needed to embed out-of-sample
    queries: the uncentered training kernels and, for the text view, the
    training tf-idf features."""

    cca: CcaModel
    kernels_raw: list[np.ndarray]
    view_names: tuple[str, ...]
    text_view: int
    text_features: np.ndarray  # n x m tf-idf rows
    center_query: bool = True

    @property
    def units(self):
        return self.cca.units

    @property
    def shared(self):
        return self.cca.shared

    def save(self, directory):
        directory = Path(directory)
        self.cca.save(directory)
        for v, K in enumerate(self.kernels_raw):
            write_matrix_csv(directory / f"K_raw_{v}.csv", self.units, K)
        write_matrix_csv(
            directory / "text_features.csv",
            [f"t{j}" for j in range(self.text_features.shape[1])],
            self.text_features,
        )
        meta = {
            "view_names": list(self.view_names),
            "text_view": self.text_view,
            "center_query": self.center_query,
        }
        (directory / "retrieval.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = json.loads((directory / "retrieval.json").read_text(encoding="utf-8"))
        cca = CcaModel.load(directory)
        kernels_raw = [
            read_matrix_csv(directory / f"K_raw_{v}.csv")[1]
            for v in range(len(meta["view_names"]))
        ]
        text = read_matrix_csv(directory / "text_features.csv")[1]
        return cls(
            cca,
            kernels_raw,
            tuple(meta["view_names"]),
            meta["text_view"],
            text,
            meta["center_query"],
        )


def fit_retrieval(
    kernels,
    d: int = 2,
    kappa: float = 0.1,
    view_names=None,
    text_view: int = 0,
    text_features=None,
    center_query: bool = True,
) -> RetrievalModel:
    """Fit KCCA over the views and wrap it for out-of-sample queries.
    The text view's features must be the tf-idf rows the text kernel was
    built from."""
    model = kcca(kernels, d, kappa)
    if view_names is None:
        view_names = tuple(k.provenance or f"view{v}" for v, k in enumerate(kernels))
    if text_features is None:
        raise ValueError("text_features (training tf-idf rows) are required")
    return RetrievalModel(
        model,
        [k.K.copy() for k in kernels],
        tuple(view_names),
        text_view,
        np.asarray(text_features, dtype=float),
        center_query,
    )


def embed_query_text(query: str, corpus: Corpus, stopwords=None, reserved=None) -> np.ndarray:
    """Query -> tf-idf feature vector over the training vocabulary.
    Terms unseen in training are dropped; weights are query term counts
    times the training idf."""
    if stopwords is None:
        stopwords = default_stopwords()
    if reserved is None:
        reserved = java_reserved_words()
    terms = tokenize(query, stopwords, reserved)
    vec = np.zeros(len(corpus.vocabulary))
    known = 0
    for term in terms:
        j = corpus.vocabulary.get(term)
        if j is not None:
            vec[j] += 1
            known += 1
    if known == 0:
        raise EmptyQueryError(
            f"no query terms survive preprocessing against the training vocabulary: {query!r}"
        )
    return vec * corpus.idf


def _query_kernel_row(model: RetrievalModel, q: np.ndarray, view: int) -> np.ndarray:
    """k_q for the bag-of-words text view: cosine against training rows."""
    if view != model.text_view:
        raise ValueError("only text-view queries are supported")
    X = model.text_features
    qn = np.linalg.norm(q)
    if qn == 0:
        raise EmptyQueryError("query feature vector is zero")
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms == 0, 1.0, norms)
    k_q = (X @ q) / (safe * qn)
    k_q[norms == 0] = 0.0
    return k_q


def project_kernel_row(model: RetrievalModel, k_q: np.ndarray, view: int) -> np.ndarray:
    """k_q -> q_pc -> q_cca. Centering subtracts the training kernel's
    row means and then the vector's own mean, mirroring the training
    double-centering; the flag restores the literal uncentered chain."""
    k_q = np.asarray(k_q, dtype=float)
    if model.center_query:
        K = model.kernels_raw[view]
        centered = k_q - K.mean(axis=1)
        k_q = centered - centered.mean()
    U, S = model.cca.U[view], model.cca.S[view]
    q_pc = (k_q @ U) / S
    return q_pc @ model.cca.W[view]


def query_subspace(model: RetrievalModel, q: np.ndarray, view: str | int = "text") -> np.ndarray:
    """Shared-subspace coordinates of a query feature vector."""
    if view == "text":
        v = model.text_view
    elif isinstance(view, str):
        v = model.view_names.index(view)
    else:
        v = int(view)
    k_q = _query_kernel_row(model, np.asarray(q, dtype=float), v)
    return project_kernel_row(model, k_q, v)


def nearest(model: RetrievalModel, q_cca: np.ndarray, topn: int = 10):
    """Units ranked by ascending euclidean distance in the shared
    subspace; ties break on the lower index."""
    if topn < 1:
        raise ValueError("topn must be >= 1")
    dists = np.linalg.norm(model.shared - np.asarray(q_cca)[None, :], axis=1)
    order = np.argsort(dists, kind="stable")[:topn]
    return [(model.units[i], float(dists[i])) for i in order]


def search(model: RetrievalModel, query: str, corpus: Corpus, topn: int = 10,
           stopwords=None, reserved=None):
    """End-to-end text search: embed, project, rank."""
    q = embed_query_text(query, corpus, stopwords, reserved)
    q_cca = query_subspace(model, q, "text")
    return nearest(model, q_cca, topn), q_cca
