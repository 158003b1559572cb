"""String kernels over preprocessed documents.

All three variants share one sum over common substrings,

    K(x, y) = sum_s num_s(x) * num_s(y) * w(s),

with w(s) = 1 (constant), w(s) = [|s| = p] (p-spectrum), or
w(s) = lambda^|s| (exponential decay; lambda = 1 reduces to constant).

Each pair is evaluated on a generalized suffix automaton of the two
strings, whose states partition all substrings into occurrence-count
classes, so a pair costs O(|x| + |y|) automaton states instead of
enumerating substrings. Integer lambda is summed in exact integer
arithmetic; normalization happens in log space, so huge raw values
cannot overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import KernelMatrix, _unit_names


@dataclass(frozen=True)
class StringKernelConfig:
    variant: str  # constant | p-spectrum | exp-decay
    p: int = 2
    lam: float = 2.0
    normalize: bool = True

    def __post_init__(self):
        if self.variant not in ("constant", "p-spectrum", "exp-decay"):
            raise ValueError(f"unknown string kernel variant {self.variant!r}")
        if self.variant == "p-spectrum" and self.p < 1:
            raise ValueError("substring length p must be >= 1")
        if self.variant == "exp-decay" and self.lam < 1:
            raise ValueError("decay base lambda must be >= 1")

    @property
    def provenance(self):
        if self.variant == "constant":
            return "cons"
        if self.variant == "p-spectrum":
            return f"spec(p={self.p})"
        return f"exp(lambda={self.lam:g})"


class _SuffixAutomaton:
    """Generalized suffix automaton over up to two strings, with
    per-string occurrence counts on every state."""

    __slots__ = ("length", "link", "next", "cnt")

    def __init__(self):
        self.length = [0]
        self.link = [-1]
        self.next = [{}]
        self.cnt = [[0, 0]]

    def _new_state(self, length):
        self.length.append(length)
        self.link.append(-1)
        self.next.append({})
        self.cnt.append([0, 0])
        return len(self.length) - 1

    def _extend(self, last, ch):
        if ch in self.next[last]:
            q = self.next[last][ch]
            if self.length[q] == self.length[last] + 1:
                return q
            clone = self._new_state(self.length[last] + 1)
            self.next[clone] = dict(self.next[q])
            self.link[clone] = self.link[q]
            self.link[q] = clone
            p = last
            while p != -1 and self.next[p].get(ch) == q:
                self.next[p][ch] = clone
                p = self.link[p]
            return clone
        cur = self._new_state(self.length[last] + 1)
        p = last
        while p != -1 and ch not in self.next[p]:
            self.next[p][ch] = cur
            p = self.link[p]
        if p == -1:
            self.link[cur] = 0
            return cur
        q = self.next[p][ch]
        if self.length[q] == self.length[p] + 1:
            self.link[cur] = q
            return cur
        clone = self._new_state(self.length[p] + 1)
        self.next[clone] = dict(self.next[q])
        self.link[clone] = self.link[q]
        self.link[q] = clone
        self.link[cur] = clone
        while p != -1 and self.next[p].get(ch) == q:
            self.next[p][ch] = clone
            p = self.link[p]
        return cur

    def add_string(self, s, which):
        last = 0
        for ch in s:
            last = self._extend(last, ch)
            self.cnt[last][which] += 1

    def finish(self):
        """Propagate occurrence counts up the suffix links."""
        order = sorted(range(1, len(self.length)), key=self.length.__getitem__, reverse=True)
        for v in order:
            parent = self.link[v]
            if parent > 0:
                self.cnt[parent][0] += self.cnt[v][0]
                self.cnt[parent][1] += self.cnt[v][1]

    def states(self):
        """(count_x, count_y, min_len, max_len) per non-root state; the
        state's substring class has every length in [min_len, max_len]."""
        for v in range(1, len(self.length)):
            yield (
                self.cnt[v][0],
                self.cnt[v][1],
                self.length[self.link[v]] + 1,
                self.length[v],
            )


def _pair_automaton(x, y):
    sam = _SuffixAutomaton()
    sam.add_string(x, 0)
    if y is None:
        # single-string case: reuse the counts for both sides
        sam.finish()
        return [(cx, cx, lo, hi) for cx, _, lo, hi in sam.states()]
    sam.add_string(y, 1)
    sam.finish()
    return list(sam.states())


def _geom_sum_int(lam, lo, hi):
    """sum of lam^l for l in [lo, hi], exact for integer lam."""
    if lam == 1:
        return hi - lo + 1
    return (lam ** (hi + 1) - lam ** lo) // (lam - 1)


def _geom_sum_float(lam, lo, hi):
    if lam == 1.0:
        return float(hi - lo + 1)
    return (lam ** (hi + 1) - lam ** lo) / (lam - 1)


def string_kernel_value(x: str, y: str, cfg: StringKernelConfig):
    """Raw (unnormalized) kernel value for one pair. Integer for the
    constant and p-spectrum variants and for integer lambda."""
    if not x or not y:
        return 0
    states = _pair_automaton(x, y if y != x else None)
    if cfg.variant == "constant":
        return sum(cx * cy * (hi - lo + 1) for cx, cy, lo, hi in states)
    if cfg.variant == "p-spectrum":
        p = cfg.p
        return sum(cx * cy for cx, cy, lo, hi in states if lo <= p <= hi)
    lam = cfg.lam
    if float(lam).is_integer():
        lam = int(lam)
        return sum(cx * cy * _geom_sum_int(lam, lo, hi) for cx, cy, lo, hi in states)
    return sum(cx * cy * _geom_sum_float(lam, lo, hi) for cx, cy, lo, hi in states)


def _log(v):
    return math.log(v) if v > 0 else -math.inf


def _to_float(v):
    try:
        return float(v)
    except OverflowError:
        return math.inf


def string_kernel(texts, cfg: StringKernelConfig, units=None) -> KernelMatrix:
    """Kernel matrix over documents (space-joined token sequences).

    Cosine normalization is the default; raw values can overflow to inf
    for long documents under exponential decay, normalized ones cannot.
    Empty documents get self-similarity 1 and zero elsewhere.
    """
    texts = list(texts)
    n = len(texts)
    empty = [not t for t in texts]
    if any(empty):
        warnings.warn(f"{sum(empty)} empty documents in string kernel input", stacklevel=2)

    raw = [[0] * n for _ in range(n)]
    for i in range(n):
        raw[i][i] = string_kernel_value(texts[i], texts[i], cfg)
        for j in range(i + 1, n):
            raw[i][j] = raw[j][i] = string_kernel_value(texts[i], texts[j], cfg)

    K = np.zeros((n, n))
    if cfg.normalize:
        logdiag = [_log(raw[i][i]) for i in range(n)]
        for i in range(n):
            K[i, i] = 1.0
            for j in range(i + 1, n):
                v = raw[i][j]
                if v == 0 or empty[i] or empty[j]:
                    continue
                K[i, j] = K[j, i] = math.exp(
                    _log(v) - 0.5 * logdiag[i] - 0.5 * logdiag[j]
                )
    else:
        for i in range(n):
            for j in range(n):
                K[i, j] = _to_float(raw[i][j])
        for i in range(n):
            if empty[i]:
                K[i, i] = 1.0

    tag = cfg.provenance + ("" if cfg.normalize else " raw")
    return KernelMatrix((K + K.T) / 2, _unit_names(units, n), tag)
