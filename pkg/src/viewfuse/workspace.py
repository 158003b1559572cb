"""Workspace directory layout and the reproducibility manifest.

A workspace holds everything one analyzed system needs:

    units.txt       the shared unit order, one name per line
    views/          loaded view data (adjacency, incidence, tf-idf, ...)
    kernels/        kernel matrices as CSV with provenance headers
    models/         fitted fusion / retrieval models
    reports/        evaluation tables, trees, and figures
    manifest.json   per-command record of arguments and seeds

Every artifact is a pure function of (input files, flags, seed), so
re-running a command reproduces it byte for byte; the manifest never
stores wall-clock time.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ingest import (
    CallGraph,
    Corpus,
    TransactionLog,
    UnitIndex,
)
from .kernels import KernelMatrix, read_matrix_csv, write_matrix_csv
from .trees import TreeNode, parse_newick, to_newick

SUBDIRS = ("views", "kernels", "models", "reports")


class Workspace:
    def __init__(self, root):
        self.root = Path(root)

    # -- layout -------------------------------------------------------

    def create(self):
        self.root.mkdir(parents=True, exist_ok=True)
        for sub in SUBDIRS:
            (self.root / sub).mkdir(exist_ok=True)
        return self

    def path(self, *parts) -> Path:
        return self.root.joinpath(*parts)

    def exists(self):
        return (self.root / "units.txt").is_file()

    # -- manifest -----------------------------------------------------

    def record(self, command: str, args: dict, outputs: list):
        """Keyed by command name: re-running the same command overwrites
        its own entry, keeping reruns byte-identical."""
        manifest_path = self.root / "manifest.json"
        manifest = {}
        if manifest_path.is_file():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest[command] = {
            "args": {k: args[k] for k in sorted(args)},
            "outputs": sorted(str(o) for o in outputs),
        }
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    # -- units --------------------------------------------------------

    def save_units(self, units: UnitIndex):
        self.path("units.txt").write_text(
            "\n".join(units.ids) + "\n", encoding="utf-8"
        )

    def load_units(self) -> UnitIndex:
        names = [
            line
            for line in self.path("units.txt").read_text(encoding="utf-8").splitlines()
            if line
        ]
        return UnitIndex(tuple(names))

    # -- views --------------------------------------------------------

    def save_call_graph(self, graph: CallGraph):
        write_matrix_csv(
            self.path("views", "adjacency.csv"), graph.units.ids, graph.A,
            comment="call adjacency",
        )

    def load_call_graph(self) -> CallGraph:
        units = self.load_units()
        _, A, _ = read_matrix_csv(self.path("views", "adjacency.csv"))
        return CallGraph(A, units)

    def save_transactions(self, log: TransactionLog):
        write_matrix_csv(
            self.path("views", "incidence.csv"),
            [txid for txid, _ in log.transactions],
            log.incidence,
            comment="transaction incidence",
        )

    def load_incidence(self) -> np.ndarray:
        return read_matrix_csv(self.path("views", "incidence.csv"))[1]

    def save_corpus(self, corpus: Corpus):
        views = self.path("views")
        lines = [
            f"{term}\t{format(corpus.idf[j], '.17g')}"
            for j, term in enumerate(corpus.terms)
        ]
        (views / "vocabulary.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        write_matrix_csv(views / "tfidf.csv", corpus.terms, corpus.tfidf)
        write_matrix_csv(
            views / "lsi.csv", [f"c{k}" for k in range(corpus.r)], corpus.lsi,
            comment=f"lsi r={corpus.r}",
        )
        doc_lines = [
            f"{unit}\t{' '.join(corpus.token_seqs[unit])}" for unit in corpus.units.ids
        ]
        (views / "tokens.tsv").write_text("\n".join(doc_lines) + "\n", encoding="utf-8")

    def load_corpus(self) -> Corpus:
        units = self.load_units()
        views = self.path("views")
        terms, idf = [], []
        for line in (views / "vocabulary.tsv").read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            term, value = line.split("\t")
            terms.append(term)
            idf.append(float(value))
        _, tfidf, _ = read_matrix_csv(views / "tfidf.csv")
        _, lsi, comment = read_matrix_csv(views / "lsi.csv")
        token_seqs = {}
        for line in (views / "tokens.tsv").read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            unit, _, joined = line.partition("\t")
            token_seqs[unit] = joined.split() if joined else []
        return Corpus(
            raw={},
            token_seqs=token_seqs,
            units=units,
            terms=tuple(terms),
            vocabulary={t: j for j, t in enumerate(terms)},
            tfidf=tfidf,
            idf=np.array(idf),
            lsi=lsi,
            r=lsi.shape[1],
        )

    def save_package_tree(self, tree: TreeNode):
        self.path("views", "package_tree.nwk").write_text(
            to_newick(tree) + "\n", encoding="utf-8"
        )

    def load_package_tree(self) -> TreeNode:
        return parse_newick(
            self.path("views", "package_tree.nwk").read_text(encoding="utf-8")
        )

    # -- kernels ------------------------------------------------------

    def kernel_path(self, name: str) -> Path:
        return self.path("kernels", f"{name}.csv")

    def save_kernel(self, name: str, kernel: KernelMatrix):
        kernel.save_csv(self.kernel_path(name))

    def load_kernel(self, name: str) -> KernelMatrix:
        path = self.kernel_path(name)
        if not path.is_file():
            raise FileNotFoundError(f"kernel {name!r} not found at {path}")
        return KernelMatrix.load_csv(path)
