import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_project(tmp_path):
    """A minimal on-disk project: calls.tsv, trans.tsv, corpus dir.

    Two 2-unit leaf packages nested under two mid-level packages, so a
    binary dendrogram can reproduce the package tree exactly.
    """
    units = {
        "left.a.P1": "parser token grammar parseInput readToken",
        "left.a.P2": "parser token syntax parseExpr readSymbol",
        "left.b.Q1": "lexer symbol scanner scanInput lexChar",
        "left.b.Q2": "lexer symbol reader scanExpr lexLine",
        "right.c.R1": "socket stream packet openSocket sendPacket",
        "right.c.R2": "socket stream remote openStream sendRemote",
        "right.d.S1": "dialog window widget showDialog paintWidget",
        "right.d.S2": "dialog window layout showWindow paintLayout",
    }
    names = sorted(units)
    corpus = tmp_path / "corpus"
    for name, text in units.items():
        path = corpus / (name.replace(".", "/") + ".java")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    pair = {
        "left.a.P1": "left.a.P2", "left.a.P2": "left.a.P1",
        "left.b.Q1": "left.b.Q2", "left.b.Q2": "left.b.Q1",
        "right.c.R1": "right.c.R2", "right.c.R2": "right.c.R1",
        "right.d.S1": "right.d.S2", "right.d.S2": "right.d.S1",
    }
    sibling = {
        "left.a.P1": "left.b.Q1", "left.b.Q1": "left.a.P1",
        "right.c.R1": "right.d.S1", "right.d.S1": "right.c.R1",
    }
    calls = []
    for name in names:
        calls += [f"{name}\t{pair[name]}"] * 3
        if name in sibling:
            calls.append(f"{name}\t{sibling[name]}")
    (tmp_path / "calls.tsv").write_text("\n".join(calls) + "\n", encoding="utf-8")

    trans = []
    tid = 0
    for name in names:
        for _ in range(3):
            trans.append(f"t{tid}\t{name},{pair[name]}")
            tid += 1
        if name in sibling:
            trans.append(f"t{tid}\t{name},{sibling[name]}")
            tid += 1
    (tmp_path / "trans.tsv").write_text("\n".join(trans) + "\n", encoding="utf-8")

    return {
        "root": tmp_path,
        "calls": tmp_path / "calls.tsv",
        "trans": tmp_path / "trans.tsv",
        "corpus": corpus,
        "units": names,
    }
