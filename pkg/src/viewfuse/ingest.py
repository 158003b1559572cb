"""Loading and aligning the three views of a software system.

Views arrive as plain files (call edge list, transaction log, source
corpus directory) and leave as matrices indexed by one shared, sorted
unit order.
"""

from __future__ import annotations

import logging
import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptyIntersectionError, EmptyViewError, ParseError
from .porter import stem
from .trees import TreeNode

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Shared unit order


@dataclass(frozen=True)
class UnitIndex:
    """The ordered set of software units shared by every view."""

    ids: tuple[str, ...]
    position: dict[str, int] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("unit names must be unique")
        object.__setattr__(self, "position", {u: i for i, u in enumerate(self.ids)})

    @classmethod
    def from_names(cls, names) -> "UnitIndex":
        return cls(tuple(sorted(set(names))))

    def __len__(self):
        return len(self.ids)

    def __contains__(self, name):
        return name in self.position


def intersect_views(callgraph_units, transaction_units, corpus_units) -> UnitIndex:
    """Sorted intersection of the three views' unit name sets."""
    sets = {
        "callgraph": set(callgraph_units),
        "transactions": set(transaction_units),
        "corpus": set(corpus_units),
    }
    for name, units in sets.items():
        if not units:
            raise EmptyViewError(f"view {name!r} contributes no units")
    common = sets["callgraph"] & sets["transactions"] & sets["corpus"]
    if not common:
        detail = ", ".join(f"{k}: {len(v)} units" for k, v in sets.items())
        raise EmptyIntersectionError(
            f"the views share no software units ({detail})"
        )
    return UnitIndex.from_names(common)


# ---------------------------------------------------------------------------
# Structural view


@dataclass
class CallGraph:
    """Directed, weighted call adjacency over the unit order."""

    A: np.ndarray
    units: UnitIndex


def _data_lines(path):
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, line.rstrip("\n")


def scan_call_units(path) -> set[str]:
    """Endpoint names mentioned by non-self-loop edges (pre-intersection)."""
    units = set()
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) < 2:
            raise ParseError(path, line_no, "expected caller<TAB>callee[<TAB>weight]")
        caller, callee = parts[0].strip(), parts[1].strip()
        if caller and callee and caller != callee:
            units.update((caller, callee))
    return units


def load_call_graph(path, units: UnitIndex) -> CallGraph:
    """Edge-list loader. Repeated lines accumulate weight; a missing
    weight counts 1; self-loops are dropped."""
    n = len(units)
    A = np.zeros((n, n))
    kept = 0
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) < 2 or len(parts) > 3:
            raise ParseError(path, line_no, "expected caller<TAB>callee[<TAB>weight]")
        caller, callee = parts[0].strip(), parts[1].strip()
        if not caller or not callee:
            raise ParseError(path, line_no, "empty endpoint name")
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(path, line_no, f"bad weight {parts[2]!r}") from None
            if weight < 0 or not math.isfinite(weight):
                raise ParseError(path, line_no, f"weight must be finite and >= 0")
        else:
            weight = 1.0
        if caller == callee:
            continue
        if caller in units and callee in units:
            A[units.position[caller], units.position[callee]] += weight
            kept += 1
    if kept == 0:
        raise EmptyViewError(f"{path}: no call edges remain within the unit index")
    return CallGraph(A, units)


# ---------------------------------------------------------------------------
# Evolutionary view


@dataclass
class TransactionLog:
    """Commit transactions and their unit-by-transaction incidence."""

    transactions: list[tuple[str, frozenset[str]]]
    incidence: np.ndarray  # n x t, binary
    units: UnitIndex


def scan_transaction_units(path, max_files: int = 30) -> set[str]:
    """Files named by transactions that survive the size filter."""
    units = set()
    for _, tx_files in _parse_transactions(path):
        if len(tx_files) <= max_files:
            units.update(tx_files)
    return units


def _parse_transactions(path):
    seen = set()
    out = []
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, line_no, "expected txid<TAB>file1,file2,...")
        txid = parts[0].strip()
        if not txid:
            raise ParseError(path, line_no, "empty transaction id")
        if txid in seen:
            raise ParseError(path, line_no, f"duplicate transaction id {txid!r}")
        seen.add(txid)
        files = [f.strip() for f in parts[1].split(",") if f.strip()]
        out.append((txid, files))
    return out


def load_transactions(path, units: UnitIndex, max_files: int = 30) -> TransactionLog:
    """Transactions larger than max_files (before intersection) are
    dropped as noise; survivors are intersected with the unit index."""
    kept = []
    for txid, files in _parse_transactions(path):
        if len(files) > max_files:
            continue
        members = frozenset(f for f in files if f in units)
        if members:
            kept.append((txid, members))
    if not kept:
        raise EmptyViewError(f"{path}: no transactions remain after filtering")
    n = len(units)
    incidence = np.zeros((n, len(kept)), dtype=np.int8)
    for col, (_, members) in enumerate(kept):
        for name in members:
            incidence[units.position[name], col] = 1
    return TransactionLog(kept, incidence, units)


# ---------------------------------------------------------------------------
# Lexical view

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
_CAMEL_RE = re.compile(
    r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+"
)


def _bundled(name):
    text = resources.files("viewfuse.data").joinpath(name).read_text("utf-8")
    return frozenset(
        w.strip().lower()
        for w in text.splitlines()
        if w.strip() and not w.startswith("#")
    )


def default_stopwords() -> frozenset[str]:
    return _bundled("stopwords.txt")


def java_reserved_words() -> frozenset[str]:
    return _bundled("java_keywords.txt")


def load_wordlist(path) -> frozenset[str]:
    """One word per line; blanks and #-comments ignored."""
    words = set()
    for _, line in _data_lines(path):
        words.add(line.strip().lower())
    return frozenset(words)


def tokenize(text: str, stopwords, reserved) -> list[str]:
    """Full preprocessing pipeline, preserving source order:
    non-alphanumeric split, CamelCase/digit/underscore split, lowercase,
    stop and reserved word removal, length >= 2, Porter stem."""
    out = []
    for raw in _TOKEN_RE.findall(text):
        for piece in _CAMEL_RE.findall(raw):
            word = piece.lower()
            if word in stopwords or word in reserved:
                continue
            if len(word) < 2:
                continue
            out.append(stem(word))
    return out


def preprocess_corpus(raw: dict[str, str], stopwords=None, reserved=None):
    """Token sequences per unit. The tf-idf path treats these as
    multisets; string kernels consume them joined in source order."""
    if stopwords is None:
        stopwords = default_stopwords()
    if reserved is None:
        reserved = java_reserved_words()
    return {unit: tokenize(text, stopwords, reserved) for unit, text in raw.items()}


@dataclass
class Corpus:
    """The lexical view: raw text, token sequences, tf-idf and LSI
    features over a sorted vocabulary."""

    raw: dict[str, str]
    token_seqs: dict[str, list[str]]
    units: UnitIndex
    terms: tuple[str, ...]
    vocabulary: dict[str, int]
    tfidf: np.ndarray  # n x m
    idf: np.ndarray  # m
    lsi: np.ndarray  # n x r
    r: int

    def tokens(self, unit) -> Counter:
        return Counter(self.token_seqs[unit])

    def documents(self) -> list[str]:
        """Space-joined token sequences in unit order (string-kernel input)."""
        return [" ".join(self.token_seqs[u]) for u in self.units.ids]


def scan_corpus_dir(path) -> dict[str, Path]:
    """Map unit names to files: relative path with '/' as '.', extension
    dropped."""
    root = Path(path)
    mapping = {}
    for f in sorted(root.rglob("*")):
        if not f.is_file():
            continue
        rel = f.relative_to(root)
        name = str(rel.with_suffix("")).replace("/", ".")
        mapping[name] = f
    return mapping


def build_tfidf(token_multisets: dict[str, Counter], units: UnitIndex):
    """tf = raw count, idf = ln(n / df); rows follow the unit order.

    Terms present in every document get weight 0 (idf = ln 1).
    """
    n = len(units)
    if n < 2:
        raise ValueError("tf-idf needs at least 2 documents")
    vocab_terms = sorted({t for u in units.ids for t in token_multisets[u]})
    if not vocab_terms:
        raise ValueError("empty vocabulary: no tokens survived preprocessing")
    vocabulary = {t: j for j, t in enumerate(vocab_terms)}
    m = len(vocab_terms)
    tf = np.zeros((n, m))
    for i, unit in enumerate(units.ids):
        for term, count in token_multisets[unit].items():
            tf[i, vocabulary[term]] = count
    df = (tf > 0).sum(axis=0)
    idf = np.log(n / df)
    return tf * idf, idf, tuple(vocab_terms), vocabulary


def lsi_dimension(m: int, n: int) -> int:
    """round((m*n)^0.2), clamped to [2, min(m, n) - 1]."""
    r = round((m * n) ** 0.2)
    upper = max(1, min(m, n) - 1)
    return min(max(2, r), upper)


def fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is
    positive (deterministic eigen/singular vector orientation). Returns
    a C-contiguous copy so downstream BLAS calls are layout-stable."""
    U = np.array(U, copy=True, order="C")
    for k in range(U.shape[1]):
        idx = np.argmax(np.abs(U[:, k]))
        if U[idx, k] < 0:
            U[:, k] = -U[:, k]
    return U


def lsi_project(tfidf: np.ndarray):
    """Document coordinates: top-r left singular vectors scaled by their
    singular values. r drops to the numerical rank when the matrix is
    rank-deficient below it."""
    n, m = tfidf.shape
    if not np.any(tfidf):
        raise ValueError("tf-idf matrix is identically zero")
    r = lsi_dimension(m, n)
    U, s, _ = np.linalg.svd(tfidf, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-10))
    if rank < r:
        warnings.warn(
            f"tf-idf numerical rank {rank} is below the LSI dimension {r}; reducing",
            stacklevel=2,
        )
        r = rank
    U = fix_signs(U[:, :r])
    return U * s[:r], r


def build_corpus(
    raw: dict[str, str],
    units: UnitIndex,
    stopwords=None,
    reserved=None,
) -> Corpus:
    """raw text -> token sequences -> tf-idf -> LSI, all in unit order."""
    missing = [u for u in units.ids if u not in raw]
    if missing:
        raise EmptyViewError(f"corpus lacks text for units: {missing[:5]}")
    seqs = preprocess_corpus({u: raw[u] for u in units.ids}, stopwords, reserved)
    multisets = {u: Counter(seq) for u, seq in seqs.items()}
    tfidf, idf, terms, vocabulary = build_tfidf(multisets, units)
    lsi, r = lsi_project(tfidf)
    return Corpus(raw, seqs, units, terms, vocabulary, tfidf, idf, lsi, r)


# ---------------------------------------------------------------------------
# Authoritative package tree


def build_package_tree(units: UnitIndex, min_size: int = 4, oversize: int = 40) -> TreeNode:
    """Tree of the dot hierarchy. Packages with fewer than min_size leaf
    descendants dissolve into their nearest kept ancestor (or the root);
    packages left with more than `oversize` direct classes are reported,
    not split."""
    leaf_count = Counter()
    for unit in units.ids:
        parts = unit.split(".")
        for depth in range(1, len(parts)):
            leaf_count[".".join(parts[:depth])] += 1

    kept = {p for p, c in leaf_count.items() if c >= min_size}

    def nearest_kept(package_path):
        parts = package_path.split(".")
        for depth in range(len(parts), 0, -1):
            prefix = ".".join(parts[:depth])
            if prefix in kept:
                return prefix
        return ""

    root = TreeNode("")
    nodes = {"": root}
    for pkg in sorted(kept):
        parent = nodes[nearest_kept(".".join(pkg.split(".")[:-1])) if "." in pkg else ""]
        node = TreeNode(pkg)
        nodes[pkg] = node
        parent.children.append(node)

    for unit in units.ids:
        pkg = unit.rsplit(".", 1)[0] if "." in unit else ""
        nodes[nearest_kept(pkg) if pkg else ""].children.append(TreeNode(unit))

    big = [
        node.name
        for node in nodes.values()
        if node.name and sum(c.is_leaf for c in node.children) > oversize
    ]
    if big:
        warnings.warn(
            f"packages with more than {oversize} classes (split them manually): {big}",
            stacklevel=2,
        )
    return root
