"""Command-line front end.

Subcommands mirror the pipeline: ingest -> kernel -> cluster /
recommend / eval-links / topics / search. Every command is a pure
function of (workspace state, flags, seed) and reruns byte-identically.

Exit codes: 0 ok, 2 input parse, 3 empty intersection, 4 insufficient
data, 5 empty query, 64 usage.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fusion, ingest, plots, recommend, retrieval
from .clustering import LINKAGES, agglomerate, pd_metric
from .errors import (
    EmptyIntersectionError,
    EmptyQueryError,
    EmptyViewError,
    InsufficientDataError,
    ParseError,
)
from .kernels import (
    KernelMatrix,
    VIEW_KERNELS,
    bow_kernel,
    exp_diffusion,
    kernel_to_distance,
    laplacian_diffusion,
    poly_kernel,
    rbf_kernel,
    read_matrix_csv,
    view_grid,
    write_matrix_csv,
)
from .string_kernels import StringKernelConfig, string_kernel
from .trees import parse_newick, to_newick
from .workspace import Workspace

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_EMPTY_INTERSECTION = 3
EXIT_INSUFFICIENT = 4
EXIT_EMPTY_QUERY = 5
EXIT_USAGE = 64

ENV_WORKSPACE = "VIEWFUSE_WORKSPACE"

DEFAULT_K_GRID = tuple(range(10, 101, 10))
DEFAULT_TOPICS = 7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Kernel construction from workspace views


def kernel_file_name(view: str, kind: str, params: dict) -> str:
    parts = [view, kind] + [f"{key}{params[key]:g}" for key in sorted(params)]
    return "-".join(parts)


def compute_kernel(ws: Workspace, view: str, kind: str, params: dict,
                   raw: bool = False) -> KernelMatrix:
    """Build one kernel from the stored view data, enforcing the static
    view/kernel compatibility table."""
    if view not in VIEW_KERNELS:
        raise UsageError(f"unknown view {view!r}")
    if kind not in VIEW_KERNELS[view]:
        raise UsageError(
            f"kernel {kind!r} is not applicable to view {view!r} "
            f"(allowed: {', '.join(VIEW_KERNELS[view])})"
        )
    units = ws.load_units()
    if view == "struct":
        graph = ws.load_call_graph()
        alpha = params.get("alpha", 1.0)
        fn = exp_diffusion if kind == "ed" else laplacian_diffusion
        return fn(graph, alpha)
    if view == "evol":
        X = ws.load_incidence().astype(float)
        if kind == "poly":
            return poly_kernel(X, params.get("d", 1), units=units)
        return rbf_kernel(X, params.get("gamma", 1.0), units=units)
    corpus = ws.load_corpus()
    if kind == "bow":
        return bow_kernel(corpus.tfidf, units=units)
    if kind == "poly":
        return poly_kernel(corpus.lsi, params.get("d", 1), units=units)
    if kind == "rbf":
        return rbf_kernel(corpus.lsi, params.get("gamma", 1.0), units=units)
    variant = {"cons": "constant", "spec": "p-spectrum", "exp": "exp-decay"}[kind]
    cfg = StringKernelConfig(
        variant,
        p=int(params.get("p", 2)),
        lam=float(params.get("lam", 2.0)),
        normalize=not raw,
    )
    return string_kernel(corpus.documents(), cfg, units=units)


def _param_dict(kind: str, values: list[float]) -> dict:
    names = {
        "poly": ("d",), "rbf": ("gamma",), "ed": ("alpha",), "led": ("alpha",),
        "spec": ("p",), "exp": ("lam",), "bow": (), "cons": (),
    }
    if kind not in names:
        raise UsageError(f"unknown kernel {kind!r}")
    expected = names[kind]
    if len(values) != len(expected):
        raise UsageError(
            f"kernel {kind!r} takes {len(expected)} parameter(s) "
            f"({', '.join(expected) or 'none'}), got {len(values)}"
        )
    return dict(zip(expected, values))


# ---------------------------------------------------------------------------
# Shared helpers


def _workspace(args) -> Workspace:
    root = getattr(args, "ws", None) or os.environ.get(ENV_WORKSPACE)
    if not root:
        raise UsageError("no workspace: pass --ws or set " + ENV_WORKSPACE)
    ws = Workspace(root)
    if not ws.exists():
        raise ParseError(root, 0, "not a workspace (missing units.txt); run ingest first")
    return ws


def _load_kernels(ws: Workspace, names) -> list[KernelMatrix]:
    kernels = []
    for name in names:
        try:
            kernels.append(ws.load_kernel(name))
        except FileNotFoundError as exc:
            raise ParseError(str(ws.kernel_path(name)), 0, str(exc)) from exc
    return kernels


def _fused_similarity(args, kernels, c=None) -> KernelMatrix:
    method = args.method
    if method == "single":
        if len(kernels) != 1:
            raise UsageError("--method single takes exactly one kernel")
        return kernels[0]
    if len(kernels) < 2:
        raise UsageError(f"--method {method} needs at least two kernels")
    if method == "mkl":
        return fusion.mkl_add(kernels)
    if method == "cotrain":
        emb = fusion.cotrain(
            kernels, c or args.c, iters=args.iters, tol=args.tol,
            info_view=getattr(args, "info_view", None),
        )
        return fusion.embedding_similarity(emb)
    if method == "kcca":
        model = fusion.kcca(kernels, d=c or args.dims, kappa=args.kappa)
        return fusion.subspace_similarity(model)
    raise UsageError(f"unknown method {method!r}")


def _default_c(ws: Workspace, requested):
    """Embedding width: the requested value, else the number of
    top-level packages in the oracle (descending through single-child
    chains like a lone root package)."""
    if requested:
        return requested
    node = ws.load_package_tree()
    while len(node.children) == 1 and not node.children[0].is_leaf:
        node = node.children[0]
    packages = sum(1 for child in node.children if not child.is_leaf)
    if packages < 2:
        raise UsageError(
            "cannot infer the embedding width from the oracle; pass --c"
        )
    return packages


def _filter_k_grid(grid, n):
    kept = [k for k in grid if 1 <= k <= n - 1]
    if not kept:
        kept = [max(1, n - 1)]
    if len(kept) < len(list(grid)):
        print(f"note: k grid clipped to k <= {n - 1}", file=sys.stderr)
    return kept


# ---------------------------------------------------------------------------
# Commands


def cmd_ingest(args) -> int:
    ws = Workspace(args.out).create()
    stop = ingest.load_wordlist(args.stopwords) if args.stopwords else ingest.default_stopwords()
    reserved = ingest.load_wordlist(args.reserved) if args.reserved else ingest.java_reserved_words()

    call_units = ingest.scan_call_units(args.calls)
    trans_units = ingest.scan_transaction_units(args.trans, args.max_files)
    corpus_files = ingest.scan_corpus_dir(args.corpus)
    units = ingest.intersect_views(call_units, trans_units, corpus_files.keys())

    graph = ingest.load_call_graph(args.calls, units)
    log = ingest.load_transactions(args.trans, units, args.max_files)
    raw = {u: corpus_files[u].read_text(encoding="utf-8") for u in units.ids}
    corpus = ingest.build_corpus(raw, units, stop, reserved)
    oracle = ingest.build_package_tree(units, args.min_size)

    ws.save_units(units)
    ws.save_call_graph(graph)
    ws.save_transactions(log)
    ws.save_corpus(corpus)
    ws.save_package_tree(oracle)
    ws.record(
        "ingest",
        {
            "calls": str(args.calls), "trans": str(args.trans),
            "corpus": str(args.corpus), "max_files": args.max_files,
            "min_size": args.min_size,
            "stopwords": str(args.stopwords or "builtin"),
            "reserved": str(args.reserved or "builtin"),
        },
        ["units.txt", "views/"],
    )
    n_calls = int(np.count_nonzero(graph.A))
    print(f"units: {len(units)}")
    print(f"calls: {n_calls}")
    print(f"transactions: {len(log.transactions)}")
    print(f"vocabulary: {len(corpus.terms)} terms, lsi dimension {corpus.r}")
    print(f"workspace: {ws.root}")
    return EXIT_OK


def cmd_kernel(args) -> int:
    ws = _workspace(args)
    if args.grid:
        written = []
        for kind, params in view_grid(args.view):
            kernel = compute_kernel(ws, args.view, kind, params, raw=args.raw)
            name = kernel_file_name(args.view, kind, params)
            ws.save_kernel(name, kernel.validate())
            written.append(name)
        ws.record(
            f"kernel-grid-{args.view}",
            {"view": args.view, "grid": True, "raw": args.raw},
            [f"kernels/{n}.csv" for n in written],
        )
        print(f"wrote {len(written)} kernels for view {args.view!r}")
        for name in written:
            print(" ", name)
        return EXIT_OK
    if not args.kernel:
        raise UsageError("pass --kernel NAME or --grid")
    params = _param_dict(args.kernel, args.param or [])
    kernel = compute_kernel(ws, args.view, args.kernel, params, raw=args.raw)
    name = args.out or kernel_file_name(args.view, args.kernel, params)
    ws.save_kernel(name, kernel.validate())
    ws.record(
        f"kernel-{name}",
        {"view": args.view, "kernel": args.kernel, "param": args.param or [],
         "raw": args.raw},
        [f"kernels/{name}.csv"],
    )
    print(f"kernel {name} [{kernel.provenance}] written")
    return EXIT_OK


def _load_oracle(ws: Workspace, spec_arg):
    if spec_arg in (None, "oracle"):
        return ws.load_package_tree()
    return parse_newick(Path(spec_arg).read_text(encoding="utf-8"))


def cmd_cluster(args) -> int:
    ws = _workspace(args)
    out = args.out or "cluster"
    reports = ws.path("reports")

    if args.grid:
        if args.method != "single":
            raise UsageError("--grid is only meaningful with --method single")
        oracle = _load_oracle(ws, args.eval_against)
        rows = []
        best = {}
        for view in VIEW_KERNELS:
            for kind, params in view_grid(view):
                kernel = compute_kernel(ws, view, kind, params)
                dendro = agglomerate(kernel_to_distance(kernel), args.linkage)
                pd = pd_metric(dendro.root, oracle)
                label = kernel_file_name(view, kind, params)
                rows.append((label, pd, view))
                if view not in best or pd < best[view][1]:
                    best[view] = (label, pd, kernel)
        lines = ["configuration,pd,view"]
        lines += [f"{label},{pd},{view}" for label, pd, view in rows]
        lines.append("")
        for view, (label, pd, _) in best.items():
            lines.append(f"best-{view},{pd},{label}")
        (reports / f"{out}-grid.csv").write_text("\n".join(lines) + "\n", "utf-8")
        for view, (label, pd, kernel) in best.items():
            ws.save_kernel(f"best-{view}", kernel)
            print(f"best {view}: {label} (PD {pd})")
        plots.plot_grid_scores(
            [(r[0], r[1]) for r in rows], reports / f"{out}-grid.png"
        )
        ws.record(
            "cluster-grid",
            {"linkage": args.linkage, "eval_against": args.eval_against or "oracle"},
            [f"reports/{out}-grid.csv", f"reports/{out}-grid.png"]
            + [f"kernels/best-{v}.csv" for v in best],
        )
        return EXIT_OK

    kernels = _load_kernels(ws, args.kernels or [])
    if not kernels:
        raise UsageError("pass --kernels (or --grid with --method single)")

    drift = None
    if args.method == "cotrain":
        c = _default_c(ws, args.c)
        emb = fusion.cotrain(kernels, c, iters=args.iters, tol=args.tol,
                             info_view=args.info_view)
        similarity = fusion.embedding_similarity(emb)
        drift = emb.drift
    elif args.method == "kcca":
        d = args.dims or _default_c(ws, args.c)
        model = fusion.kcca(kernels, d=d, kappa=args.kappa)
        similarity = fusion.subspace_similarity(model)
    elif args.method == "mkl":
        if len(kernels) < 2:
            raise UsageError("--method mkl needs at least two kernels")
        similarity = fusion.mkl_add(kernels)
    else:
        if len(kernels) != 1:
            raise UsageError("--method single takes exactly one kernel")
        similarity = kernels[0]

    dendro = agglomerate(kernel_to_distance(similarity), args.linkage)
    newick_path = reports / f"{out}.nwk"
    newick_path.write_text(to_newick(dendro.root, with_lengths=True) + "\n", "utf-8")
    plots.plot_dendrogram(dendro, reports / f"{out}.png",
                          title=f"{args.method} clustering")
    outputs = [f"reports/{out}.nwk", f"reports/{out}.png"]

    summary = [f"method: {args.method}", f"similarity: {similarity.provenance}"]
    if args.eval_against:
        oracle = _load_oracle(ws, args.eval_against)
        pd = pd_metric(dendro.root, oracle)
        summary.append(f"pd: {pd}")
        print(f"PD vs oracle: {pd}")
    if drift is not None:
        drift_arr = np.asarray(drift, dtype=float)
        n_views = drift_arr.shape[1] if drift_arr.size else len(kernels)
        lines = [",".join(["iteration"] + [f"view{v + 1}" for v in range(n_views)])]
        for i, row in enumerate(drift_arr, 1):
            lines.append(f"{i}," + ",".join(format(v, ".17g") for v in row))
        (reports / f"{out}-drift.csv").write_text("\n".join(lines) + "\n", "utf-8")
        plots.plot_drift(drift_arr, reports / f"{out}-drift.png", tol=args.tol)
        outputs += [f"reports/{out}-drift.csv", f"reports/{out}-drift.png"]
        converged = drift_arr.size and drift_arr[-1].max() < args.tol
        summary.append(f"cotrain converged: {bool(converged)}")
        print(f"co-training drift after {len(drift_arr)} iterations: "
              f"{drift_arr[-1].max() if drift_arr.size else 0:.2e}")
    (reports / f"{out}-summary.txt").write_text("\n".join(summary) + "\n", "utf-8")
    outputs.append(f"reports/{out}-summary.txt")

    ws.record(
        f"cluster-{out}",
        {"method": args.method, "kernels": list(args.kernels or []),
         "linkage": args.linkage, "iters": args.iters, "c": args.c,
         "dims": args.dims, "kappa": args.kappa,
         "eval_against": args.eval_against},
        outputs,
    )
    print(f"dendrogram: {newick_path}")
    return EXIT_OK


def _target_items(ws: Workspace, args) -> recommend.ItemMatrix:
    units = ws.load_units()
    if args.target == "call":
        A = ws.load_call_graph().A
        W = (A > 0).astype(np.int8)
        np.fill_diagonal(W, 0)
        return recommend.ItemMatrix(W, "callee-unit", units.ids, units.ids)
    if args.target == "change":
        tx_names, incidence, _ = read_matrix_csv(ws.path("views", "incidence.csv"))
        return recommend.ItemMatrix(
            incidence.astype(np.int8), "transaction", units.ids, tuple(tx_names)
        )
    model = _topic_model(ws, args)
    return recommend.binarize_topics(model, getattr(args, "theta", 0.5), units.ids)


def _topic_model(ws: Workspace, args) -> recommend.TopicModel:
    """Load the fitted topic model, or auto-fit NMF with the defaults."""
    model_dir = ws.path("models", "topics")
    corpus = ws.load_corpus()
    if (model_dir / "W_doc.csv").is_file():
        _, W_doc, _ = read_matrix_csv(model_dir / "W_doc.csv")
        _, H, _ = read_matrix_csv(model_dir / "H.csv")
        return recommend.TopicModel(W_doc, H, W_doc.shape[1], [], corpus.terms)
    t = min(getattr(args, "topics", DEFAULT_TOPICS), *corpus.tfidf.shape)
    model = recommend.nmf_topics(
        corpus.tfidf, t, iters=getattr(args, "nmf_iters", 200), seed=args.seed
    )
    model.terms = corpus.terms
    return model


def cmd_topics(args) -> int:
    ws = _workspace(args)
    corpus = ws.load_corpus()
    t = min(args.t, *corpus.tfidf.shape)
    if t < args.t:
        print(f"note: topic count reduced to {t}", file=sys.stderr)
    model = recommend.nmf_topics(corpus.tfidf, t, iters=args.iters, seed=args.seed)
    model.terms = corpus.terms
    model_dir = ws.path("models", "topics")
    model_dir.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(model_dir / "W_doc.csv",
                     [f"topic_{j + 1}" for j in range(t)], model.W_doc,
                     comment=f"nmf t={t} seed={args.seed}")
    write_matrix_csv(model_dir / "H.csv", corpus.terms, model.H)
    keywords = model.top_keywords(10)
    lines = ["topic\ttop_keywords"]
    lines += [f"topic_{j + 1}\t{','.join(words)}" for j, words in enumerate(keywords)]
    ws.path("reports", "topics.tsv").write_text("\n".join(lines) + "\n", "utf-8")
    plots.plot_topic_keywords(model, ws.path("reports", "topics.png"))
    ws.record(
        "topics",
        {"t": args.t, "iters": args.iters, "seed": args.seed},
        ["models/topics/W_doc.csv", "models/topics/H.csv",
         "reports/topics.tsv", "reports/topics.png"],
    )
    print(f"fitted {t} topics; final relative error "
          f"{model.error_history[-1]:.4f}")
    for j, words in enumerate(keywords):
        print(f"topic {j + 1}: {', '.join(words)}")
    return EXIT_OK


def cmd_recommend(args) -> int:
    ws = _workspace(args)
    items = _target_items(ws, args)
    kernels = _load_kernels(ws, args.kernels)
    c = args.c or (None if args.method != "cotrain" else _default_c(ws, None))
    similarity = _fused_similarity(args, kernels, c)
    n = similarity.n
    k = min(args.k, n - 1)
    if k < args.k:
        print(f"note: k reduced to {k} (n = {n})", file=sys.stderr)

    recs = recommend.recommend_links(similarity, items, k, args.threshold)
    keywords = None
    if args.target == "topic":
        keywords = _topic_model(ws, args).top_keywords(10)
    lines = recommend.format_recommendations(recs, items.kind, keywords)

    out = args.out or f"recommend-{args.target}"
    reports = ws.path("reports")
    tsv = ["unit\titem\tscore\tkind"]
    tsv += [f"{u}\t{i}\t{s:.17g}\t{items.kind}" for u, i, s in recs]
    (reports / f"{out}.tsv").write_text("\n".join(tsv) + "\n", "utf-8")
    (reports / f"{out}.txt").write_text(
        ("\n".join(lines) + "\n") if lines else "no recommendations\n", "utf-8"
    )
    plots.plot_recommendation_scores(
        recs, reports / f"{out}.png", threshold=args.threshold,
        title=f"Link recommendations ({args.target})",
    )
    ws.record(
        f"recommend-{args.target}",
        {"target": args.target, "method": args.method,
         "kernels": list(args.kernels), "k": args.k,
         "threshold": args.threshold, "seed": args.seed},
        [f"reports/{out}.tsv", f"reports/{out}.txt", f"reports/{out}.png"],
    )
    print(f"{len(recs)} recommendations at threshold {args.threshold}")
    for line in lines[:10]:
        print(" ", line)
    return EXIT_OK


def cmd_eval_links(args) -> int:
    ws = _workspace(args)
    items = _target_items(ws, args)
    n = len(items.units)

    if args.method == "single" and not args.kernels:
        view = {"call": "struct", "change": "evol", "topic": "lex"}[args.target]
        candidates = []
        for kind, params in view_grid(view):
            kernel = compute_kernel(ws, view, kind, params)
            candidates.append((kernel_file_name(view, kind, params), kernel))
    elif args.method == "single":
        candidates = [(name, k) for name, k in
                      zip(args.kernels, _load_kernels(ws, args.kernels))]
    else:
        kernels = _load_kernels(ws, args.kernels)
        c = args.c or (None if args.method != "cotrain" else _default_c(ws, None))
        fused = _fused_similarity(args, kernels, c)
        candidates = [(fused.provenance, fused)]

    k_grid = _filter_k_grid(args.k_grid or DEFAULT_K_GRID, n)
    report = recommend.nested_cv(
        candidates, items, k_grid,
        outer=args.outer, inner=args.inner, seed=args.seed, target=args.target,
    )
    out = args.out or f"eval-{args.target}"
    reports = ws.path("reports")
    report.to_csv(reports / f"{out}.csv")
    plots.plot_pr_curves(report.pooled, reports / f"{out}-pr.png",
                         title=f"PR per outer fold ({args.target})")
    ws.record(
        f"eval-links-{args.target}",
        {"target": args.target, "method": args.method,
         "kernels": list(args.kernels or []), "outer": args.outer,
         "inner": args.inner, "seed": args.seed,
         "k_grid": list(k_grid)},
        [f"reports/{out}.csv", f"reports/{out}-pr.png"],
    )
    print(report.summary())
    for f in report.folds:
        print(f"  fold {f.fold}: PRAUC {f.prauc:.4f} maxF1 {f.max_f1:.4f} "
              f"[{f.kernel}, k={f.k}]")
    return EXIT_OK


def _retrieval_model(ws: Workspace, args) -> retrieval.RetrievalModel:
    model_dir = ws.path("models", "retrieval")
    if (model_dir / "retrieval.json").is_file():
        return retrieval.RetrievalModel.load(model_dir)
    corpus = ws.load_corpus()
    units = ws.load_units()
    graph = ws.load_call_graph()
    incidence = ws.load_incidence().astype(float)
    kernels = [
        bow_kernel(corpus.tfidf, units=units),
        exp_diffusion(graph, 1.0),
        poly_kernel(incidence, 1, units=units),
    ]
    model = retrieval.fit_retrieval(
        kernels, d=args.dims, kappa=args.kappa,
        view_names=("lex", "struct", "evol"), text_view=0,
        text_features=corpus.tfidf,
        center_query=not args.raw_query_centering,
    )
    model.save(model_dir)
    return model


def cmd_search(args) -> int:
    ws = _workspace(args)
    corpus = ws.load_corpus()
    model = _retrieval_model(ws, args)
    results, q_cca = retrieval.search(model, args.query, corpus, args.top)

    out = args.out or "search"
    reports = ws.path("reports")
    lines = ["rank\tunit\tdistance"]
    lines += [f"{r + 1}\t{unit}\t{dist:.17g}" for r, (unit, dist) in enumerate(results)]
    tsv = "\n".join(lines) + "\n"
    sys.stdout.write(tsv)
    (reports / f"{out}.tsv").write_text(tsv, "utf-8")
    text = [f"query: {args.query}"]
    text += [
        f"{r + 1:3d}. {unit}  (distance {dist:.4f})"
        for r, (unit, dist) in enumerate(results)
    ]
    (reports / f"{out}.txt").write_text("\n".join(text) + "\n", "utf-8")
    plots.plot_subspace(
        model.shared, model.units, reports / f"{out}.png",
        query=q_cca, highlight=[u for u, _ in results],
        title=f"Shared subspace: {args.query!r}",
    )
    ws.record(
        "search",
        {"query": args.query, "top": args.top, "dims": args.dims,
         "kappa": args.kappa, "raw_query_centering": args.raw_query_centering},
        [f"reports/{out}.tsv", f"reports/{out}.txt", f"reports/{out}.png",
         "models/retrieval/"],
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="viewfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load the three views into a workspace")
    p.add_argument("--calls", required=True)
    p.add_argument("--trans", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--reserved")
    p.add_argument("--max-files", type=int, default=30, dest="max_files")
    p.add_argument("--min-size", type=int, default=4, dest="min_size")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("kernel", help="compute kernels for one view")
    p.add_argument("--view", required=True, choices=sorted(VIEW_KERNELS))
    p.add_argument("--kernel")
    p.add_argument("--param", type=float, nargs="*")
    p.add_argument("--grid", action="store_true")
    p.add_argument("--raw", action="store_true",
                   help="skip cosine normalization of string kernels")
    p.add_argument("--ws")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("cluster", help="hierarchical clustering and PD scoring")
    p.add_argument("--method", default="single",
                   choices=("single", "mkl", "cotrain", "kcca"))
    p.add_argument("--kernels", nargs="*")
    p.add_argument("--linkage", default="average", choices=LINKAGES)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--c", type=int)
    p.add_argument("--dims", type=int)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--info-view", type=int, dest="info_view")
    p.add_argument("--eval-against", dest="eval_against")
    p.add_argument("--grid", action="store_true")
    p.add_argument("--ws")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("topics", help="fit the NMF topic model")
    p.add_argument("--t", type=int, default=DEFAULT_TOPICS)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ws")
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("recommend", help="threshold link recommendations")
    p.add_argument("--target", required=True, choices=("call", "change", "topic"))
    p.add_argument("--method", default="single",
                   choices=("single", "mkl", "cotrain", "kcca"))
    p.add_argument("--kernels", nargs="+", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--topics", type=int, default=DEFAULT_TOPICS)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--nmf-iters", type=int, default=200, dest="nmf_iters")
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--c", type=int)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ws")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("eval-links", help="nested-CV link prediction evaluation")
    p.add_argument("--target", required=True, choices=("call", "change", "topic"))
    p.add_argument("--method", default="single",
                   choices=("single", "mkl", "cotrain", "kcca"))
    p.add_argument("--kernels", nargs="*")
    p.add_argument("--k-grid", type=int, nargs="*", dest="k_grid")
    p.add_argument("--outer", type=int, default=10)
    p.add_argument("--inner", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topics", type=int, default=DEFAULT_TOPICS)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--nmf-iters", type=int, default=200, dest="nmf_iters")
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--c", type=int)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--ws")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_links)

    p = sub.add_parser("search", help="cross-modal code search")
    p.add_argument("--query", required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--raw-query-centering", action="store_true",
                   dest="raw_query_centering",
                   help="skip double-centering of the query kernel row")
    p.add_argument("--ws")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"viewfuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"viewfuse: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyViewError as exc:
        print(f"viewfuse: empty view: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyIntersectionError as exc:
        print(f"viewfuse: {exc}", file=sys.stderr)
        return EXIT_EMPTY_INTERSECTION
    except InsufficientDataError as exc:
        print(f"viewfuse: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except EmptyQueryError as exc:
        print(f"viewfuse: {exc}", file=sys.stderr)
        return EXIT_EMPTY_QUERY


if __name__ == "__main__":
    sys.exit(main())
