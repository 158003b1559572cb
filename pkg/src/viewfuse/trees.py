"""Rooted trees over software units: construction, Newick round-trip,
and leaf-pair path lengths.

Both the clustering output (binary, with merge heights) and the package
oracle (arbitrary arity, no heights) use the same node type.
"""

from __future__ import annotations

import re

import numpy as np


class TreeNode:
    """A rooted tree node. Leaves carry a unit name; internal nodes may
    carry a label (package path) and a merge height."""

    __slots__ = ("name", "children", "height")

    def __init__(self, name="", children=None, height=0.0):
        self.name = name
        self.children = list(children) if children else []
        self.height = height

    @property
    def is_leaf(self):
        return not self.children

    def leaves(self):
        """Leaf names in left-to-right order."""
        if self.is_leaf:
            return [self.name]
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.name)
            else:
                stack.extend(reversed(node.children))
        return out

    def __repr__(self):
        kind = "leaf" if self.is_leaf else f"{len(self.children)} children"
        return f"TreeNode({self.name!r}, {kind})"


def leaf_path_lengths(root: TreeNode, order: list[str]) -> np.ndarray:
    """Edge counts between every leaf pair, indexed by `order`.

    p(i, j) = depth(i) + depth(j) - 2 * depth(lca); computed by merging
    leaf-depth lists bottom-up, so the whole matrix costs O(n^2).
    """
    pos = {name: i for i, name in enumerate(order)}
    n = len(order)
    dist = np.zeros((n, n), dtype=np.int64)

    def visit(node, depth):
        if node.is_leaf:
            if node.name not in pos:
                raise KeyError(f"leaf {node.name!r} not in the given order")
            return [(pos[node.name], depth)]
        merged = []
        for child in node.children:
            sub = visit(child, depth + 1)
            for i, di in merged:
                for j, dj in sub:
                    p = di + dj - 2 * depth
                    dist[i, j] = p
                    dist[j, i] = p
            merged.extend(sub)
        return merged

    visit(root, 0)
    return dist


_NEEDS_QUOTE = re.compile(r"[\s(),:;'\[\]]")


def _quote(name: str) -> str:
    if name and not _NEEDS_QUOTE.search(name):
        return name
    return "'" + name.replace("'", "''") + "'"


def to_newick(root: TreeNode, with_lengths: bool = False) -> str:
    """Serialize; branch lengths, when requested, are parent-child height
    deltas (leaves sit at height 0)."""

    def render(node, parent_height):
        if node.is_leaf:
            s = _quote(node.name)
            h = 0.0
        else:
            s = "(" + ",".join(render(c, node.height) for c in node.children) + ")"
            if node.name:
                s += _quote(node.name)
            h = node.height
        if with_lengths:
            s += f":{parent_height - h:.17g}"
        return s

    return render(root, root.height) + ";"


def parse_newick(text: str) -> TreeNode:
    """Parse the subset of Newick produced by to_newick."""
    text = text.strip()
    if not text.endswith(";"):
        raise ValueError("Newick text must end with ';'")
    s = text[:-1]
    pos = 0

    def error(msg):
        raise ValueError(f"Newick parse error at offset {pos}: {msg}")

    def parse_name():
        nonlocal pos
        if pos < len(s) and s[pos] == "'":
            pos += 1
            out = []
            while pos < len(s):
                if s[pos] == "'":
                    if pos + 1 < len(s) and s[pos + 1] == "'":
                        out.append("'")
                        pos += 2
                        continue
                    pos += 1
                    return "".join(out)
                out.append(s[pos])
                pos += 1
            error("unterminated quoted name")
        start = pos
        while pos < len(s) and s[pos] not in "(),:;":
            pos += 1
        return s[start:pos]

    def parse_length():
        nonlocal pos
        if pos < len(s) and s[pos] == ":":
            pos += 1
            start = pos
            while pos < len(s) and s[pos] not in "(),;":
                pos += 1
            return float(s[start:pos])
        return None

    def parse_node():
        nonlocal pos
        if pos < len(s) and s[pos] == "(":
            pos += 1
            children = [parse_node()]
            while pos < len(s) and s[pos] == ",":
                pos += 1
                children.append(parse_node())
            if pos >= len(s) or s[pos] != ")":
                error("expected ')'")
            pos += 1
            name = parse_name()
            length = parse_length()
            return TreeNode(name, [c for c, _, _ in children]), length, children
        name = parse_name()
        length = parse_length()
        return TreeNode(name), length, []

    root, _, child_info = parse_node()
    if pos != len(s):
        error("trailing characters")

    # Recover heights from branch lengths (edge = parent minus child
    # height, leaves at 0). Without lengths, heights stay 0: PD and the
    # oracle comparison are topology-only.
    def set_heights(node, info):
        if node.is_leaf:
            node.height = 0.0
            return
        heights = []
        for child, (_, length, sub_info) in zip(node.children, info):
            set_heights(child, sub_info)
            heights.append(child.height + (length or 0.0))
        node.height = max(heights)

    set_heights(root, child_info)
    return root
