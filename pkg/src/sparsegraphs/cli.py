"""Command-line front end: ``sparsegraphs sample|metric|experiment ...``.

Reports go to standard output (JSON, or CSV for tables) and bulk data to
``--out``.  Every report echoes its configuration and labels each number
with how it was obtained.  Exit codes: 0 ok, 1 usage or invalid input,
2 exact computation refused on size.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from ._numbers import format_number, parse_number
from .errors import SizeRefusal, SparseGraphError
from .graph import Graph, complete_graph, cycle_graph, path_graph, read_edgelist, star_graph, write_edgelist


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument helpers


def parse_density(text: str | None, n: int | None):
    """``"1/n"``, ``"c/n"``, ``"p/q"`` or a decimal; ``None`` means ``1/n``."""
    if text is None:
        return None
    s = text.strip()
    if s.endswith("/n"):
        if n is None:
            raise UsageError("a density of the form c/n needs --n")
        c = parse_number(s[:-2] or "1")
        return c / n if isinstance(c, Fraction) else float(c) / n
    try:
        return parse_number(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read {text!r} as a number") from exc


def parse_matrix(text: str) -> np.ndarray:
    """Rows separated by ``;`` and entries by ``,``; entries may be ``p/q``."""
    rows = [[float(parse_number(x)) for x in r.split(",")] for r in text.split(";") if r.strip()]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise UsageError("matrix rows must be nonempty and of equal length")
    return np.array(rows)


def named_graph(name: str) -> Graph:
    """``K3``, ``P4`` (path on 4 vertices), ``C5``, ``S3`` (star with 3 leaves) or an edge-list path."""
    if not os.path.exists(name) and len(name) >= 2 and name[0] in "KPCS" and name[1:].isdigit():
        m = int(name[1:])
        return {"K": complete_graph, "P": path_graph, "C": cycle_graph, "S": star_graph}[name[0]](m)
    return read_edgelist(name)


def _float(x):
    return float(x) if x is not None else None


def _emit_json(obj, out=None):
    text = json.dumps(obj, sort_keys=True, default=_jsonable)
    print(text)


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serialisable: {type(x)}")


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _seed(args) -> int:
    return 0 if args.seed is None else int(args.seed)


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args) -> int:
    from . import graph_models as gm
    from .kernel_core import load_kernel

    n = args.n
    seed = _seed(args)
    model = args.model
    multigraph = None
    if model == "gnk":
        if not args.kernel:
            raise UsageError("gnk needs --kernel")
        G = gm.sample_inhomogeneous(load_kernel(args.kernel), n, parse_density(args.p, n), seed)
    elif model == "gnp":
        if args.c is None:
            raise UsageError("gnp needs --c")
        G = gm.sample_gnp(n, parse_number(args.c), seed)
    elif model == "planted":
        if args.p_in is None or args.p_out is None:
            raise UsageError("planted needs --p-in and --p-out")
        G = gm.sample_planted_bisection(n, parse_density(args.p_in, n), parse_density(args.p_out, n), seed)
    elif model == "clique":
        if not args.family:
            raise UsageError("clique needs --family, e.g. K3:6,K2:1")
        fam = []
        for item in args.family.split(","):
            name, _, w = item.rpartition(":")
            if not name:
                raise UsageError(f"family item {item!r} must look like NAME:WEIGHT")
            fam.append((named_graph(name), parse_number(w)))
        G = gm.sample_clique_model(n, fam, seed)
    elif model == "triangle":
        if args.d is None:
            raise UsageError("triangle needs --d")
        res = gm.sample_triangle_config(n, args.d, simplify=args.simplify, seed=seed)
        if isinstance(res, gm.Multigraph):
            multigraph = res
            G = None
        else:
            G = res
    else:
        raise UsageError(f"unknown model {model!r}")

    summary = {"config": _config(args), "model": model, "n": n}
    if multigraph is not None:
        edges = multigraph.edge_list()
        deg = np.bincount(edges.ravel(), minlength=n) if len(edges) else np.zeros(n, dtype=np.int64)
        summary.update({"edges": int(len(edges)), "max_degree": int(deg.max()) if n else 0,
                        "simple": multigraph.is_simple(), "triangles_placed": int(len(multigraph.triplets))})
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(f"{n}\n")
                for u, v in edges.tolist():
                    fh.write(f"{u} {v}\n")
    else:
        summary.update({"edges": G.m, "max_degree": int(G.degrees().max()) if n else 0})
        if args.out:
            write_edgelist(G, args.out)
    _emit_json(summary)
    return 0


# ---------------------------------------------------------------------------
# metric


def _graphs(args, need_b=True):
    if not args.a:
        raise UsageError("metric needs --a")
    a = named_graph(args.a)
    b = None
    if need_b:
        if not args.b:
            raise UsageError("metric needs --b")
        b = named_graph(args.b)
    return a, b


def cmd_metric(args) -> int:
    from . import metrics as M

    name = args.metric
    seed = _seed(args)
    report = {"config": _config(args), "metric": name, "provenance": {"seed": seed, "budget": args.budget}}
    mode = args.mode
    if name == "cutnorm":
        if args.kernel:
            from .kernel_core import load_kernel
            k = load_kernel(args.kernel)
            est = M.cut_norm(k.kappa_array(), k.mu_array(), mode=_cut_mode(mode), seed=seed)
        elif args.matrix:
            w = parse_matrix(args.weights).ravel() if args.weights else None
            est = M.cut_norm(parse_matrix(args.matrix), w, mode=_cut_mode(mode), seed=seed)
        else:
            raise UsageError("cutnorm needs --kernel or --matrix")
        report.update(est.to_dict())
    elif name in ("dcut", "dedit"):
        a, b = _graphs(args)
        p = parse_density(args.p, a.n)
        fn = M.cut_distance_graphs if name == "dcut" else M.edit_distance
        report.update(fn(a, b, p, mode=_cut_mode(mode), seed=seed).to_dict())
    elif name == "counts":
        a, _ = _graphs(args, need_b=False)
        p = parse_density(args.p, a.n)
        pats = [named_graph(x) for x in args.pattern.split(",")] if args.pattern else M.all_trees(args.max_edges)
        rows = []
        for F in pats:
            c = M.subgraph_counts(F, a, args.kind, p)
            rows.append({"pattern_vertices": F.n, "pattern_edges": [list(e) for e in F.edges.tolist()],
                         "raw": c.raw, "normalised": c.normalised, "tilde": c.tilde, "mode": "exact"})
        if args.format == "csv":
            return _emit_csv(report["config"], ["pattern_edges", "raw", "normalised", "tilde", "mode"],
                             [[json.dumps(r["pattern_edges"]), r["raw"], r["normalised"], r["tilde"], r["mode"]]
                              for r in rows])
        report.update({"counts": rows, "mode": "exact"})
    elif name == "ploc":
        a, _ = _graphs(args, need_b=False)
        law_a = M.neighbourhood_law(a, args.t)
        if args.b:
            b = named_graph(args.b)
            report.update({"value": M.law_tv(law_a.probs, M.neighbourhood_law(b, args.t).probs), "mode": "exact",
                           "local_distance": M.local_distance(a, b, args.t)})
        else:
            if args.format == "csv":
                return _emit_csv(report["config"], ["ball", "probability", "mode"],
                                 [[k, format_number(v), "exact"] for k, v in sorted(law_a.probs.items())])
            report.update({"law": law_a.to_dict(), "mode": "exact"})
    elif name == "dP":
        a, b = _graphs(args)
        p = parse_density(args.p, a.n)
        pmode = "exact" if mode == "exact" else "search"
        est = M.partition_distance(a, b, p, args.kmax, pmode, args.budget, seed, args.kind_set)
        report.update(est.to_dict())
        if args.out:
            _write_spectra(args.out, a, b, p, args.kmax, pmode, args.budget, seed)
    elif name == "dcn":
        a, b = _graphs(args)
        cmode = "exact" if mode == "exact" else "search"
        est = M.coloured_distance(a, b, args.kmax, args.t, cmode, args.budget, seed)
        report.update(est.to_dict())
        report["truncation"] = {"k": [1, args.kmax], "t": [1, args.t]}
    else:
        raise UsageError(f"unknown metric {name!r}")
    _emit_json(report)
    return 0


def _cut_mode(mode: str) -> str:
    return "exact" if mode == "exact" else "heuristic"


def _write_spectra(path, a, b, p, kmax, mode, budget, seed):
    from .metrics import partition_spectrum
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph", "k", "index", "matrix", "multiplicity", "provenance"])
        for tag, G, s in (("a", a, seed), ("b", b, seed + 1 if mode == "search" else seed)):
            for k in range(2, kmax + 1):
                sp = partition_spectrum(G, k, p, mode, budget, s)
                for i, m in enumerate(sp.matrices):
                    mult = int(sp.multiplicity[i]) if sp.multiplicity is not None else ""
                    w.writerow([tag, k, i, json.dumps(np.round(m, 12).tolist()), mult, sp.provenance])


# ---------------------------------------------------------------------------
# experiments


def _emit_csv(config: dict, header: list, rows: list, summary: list | None = None) -> int:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True, default=_jsonable) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    if summary:
        buf.write("# summary\n")
        for r in summary:
            w.writerow(r)
    sys.stdout.write(buf.getvalue())
    return 0


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return format_number(x)
    return repr(float(x))


def exp_et234(args):
    from .unimodular import FiniteSupportLaw, QuasiTransitiveSpec, degree_rule, involution_check, laws_equal
    from .unimodular import scan_violations, size_biased_shift
    spec = QuasiTransitiveSpec(((0, 1, 1), (2, 0, 1), (1, 3, 0)))
    pi = FiniteSupportLaw.qt(spec, [Fraction(9, 20), Fraction(7, 20), Fraction(4, 20)])
    biased, shifted = size_biased_shift(pi)
    lhs, rhs, ok = involution_check(pi, degree_rule(2, 3))
    n_viol = len(scan_violations(pi, 2))
    rows = [
        ["involution deg(2,3)", format_number(lhs), format_number(rhs), float(lhs), float(rhs),
         "unimodular" if ok else "non-unimodular", "exact"],
        ["shift", " ".join(map(format_number, biased.type_weights(spec))),
         " ".join(map(format_number, shifted.type_weights(spec))), "", "",
         "fixed-point" if laws_equal(biased, shifted, 0.0) else "moved", "exact"],
        ["violations radius<=2", n_viol, "", "", "", "found" if n_viol else "none", "exact"],
    ]
    return ["check", "lhs", "rhs", "lhs_float", "rhs_float", "verdict", "mode"], rows, None


def exp_grandmother(args):
    from .unimodular import BallEntry, FiniteSupportLaw, grandmother_graph, grandmother_parent_rule, involution_check
    depth = max(2, args.t or 2)
    pi = FiniteSupportLaw.point(BallEntry(grandmother_graph(depth), depth))
    lhs, rhs, ok = involution_check(pi, grandmother_parent_rule())
    rows = [["involution parent", format_number(lhs), format_number(rhs),
             "unimodular" if ok else "non-unimodular", "exact"]]
    return ["check", "lhs", "rhs", "verdict", "mode"], rows, None


def _seeds(args) -> list:
    base = _seed(args)
    return [base + i for i in range(args.seeds)]


def exp_giant(args):
    from .graph_models import giant_fixed_point, sample_gnp
    c = float(parse_number(args.c if args.c is not None else "2"))
    n = args.n or 50000
    rows = []
    vals = []
    for s in _seeds(args):
        f = sample_gnp(n, c, s).largest_component_fraction()
        vals.append(f)
        rows.append([s, c, n, _fmt(f), "montecarlo"])
    rho = giant_fixed_point(c)
    summary = [["mean", c, n, _fmt(np.mean(vals)), "montecarlo"], ["fixed_point", c, "", _fmt(rho), "exact"]]
    return ["seed", "c", "n", "largest_fraction", "mode"], rows, summary


def exp_reconstruct(args):
    from .branching import planted_kernel, reconstruct_root
    c = parse_number(args.c if args.c is not None else "2")
    deltas = [parse_number(x) for x in (args.deltas or "0,0.8,1.8").split(",")]
    t = args.t or 8
    rows = []
    for s in _seeds(args):
        for d in deltas:
            acc = reconstruct_root(planted_kernel(c, d), t, args.m, seed=s)
            rows.append([s, _fmt(d), t, args.m, _fmt(acc), "montecarlo"])
    return ["seed", "delta", "t", "m", "accuracy", "mode"], rows, None


def exp_bipartite(args):
    from .graph_models import sample_gnp, sample_planted_bisection
    from .metrics import partition_spectrum
    n = args.n or 2000
    rows = []
    for s in _seeds(args):
        for model, G in (("planted", sample_planted_bisection(n, 0, Fraction(4, n), s)),
                         ("gnp", sample_gnp(n, 2, s))):
            sp = partition_spectrum(G, 2, None, "search", args.budget, s)
            m = sp.matrices
            trace = m[:, 0, 0] + m[:, 1, 1]
            split = (m[:, 0, 0] <= 0.1) & (m[:, 1, 1] <= 0.1) & (m[:, 0, 1] >= 3.6)
            rows.append([s, model, n, _fmt(trace.min()), _fmt(m[:, 0, 1].max()), bool(split.any()), len(sp),
                         "search"])
    return ["seed", "model", "n", "min_trace", "max_offdiag", "contains_split", "matrices", "mode"], rows, None


def exp_dpconc(args):
    from .graph_models import sample_gnp
    from .metrics import partition_spectrum
    from .metrics.partition import point_to_set
    n = args.n or 2000
    c = parse_number(args.c if args.c is not None else "2")
    probe = parse_matrix(args.probe or "1,3;3,1")
    rows, vals = [], []
    for s in _seeds(args):
        sp = partition_spectrum(sample_gnp(n, c, s), probe.shape[0], None, "search", args.budget, s)
        d = point_to_set(probe, sp)
        vals.append(d)
        rows.append([s, n, _fmt(d), "search"])
    summary = [["mean", n, _fmt(np.mean(vals)), "search"],
               ["std", n, _fmt(np.std(vals, ddof=1) if len(vals) > 1 else 0.0), "search"]]
    return ["seed", "n", "distance", "mode"], rows, summary


EXPERIMENTS = {
    "et234": exp_et234,
    "grandmother": exp_grandmother,
    "giant": exp_giant,
    "reconstruct": exp_reconstruct,
    "bipartite": exp_bipartite,
    "dpconc": exp_dpconc,
}


def cmd_experiment(args) -> int:
    fn = EXPERIMENTS.get(args.name)
    if fn is None:
        raise UsageError(f"unknown experiment {args.name!r}; known: {', '.join(sorted(EXPERIMENTS))}")
    header, rows, summary = fn(args)
    if args.format == "json":
        _emit_json({"config": _config(args), "columns": header, "rows": rows, "summary": summary or []})
        return 0
    out = _emit_csv(_config(args), header, rows, summary)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    return out


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sparsegraphs", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (0 when omitted; always echoed)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--out", default=None, help="file for bulk output")
    common.add_argument("--p", default=None, help='normalising density, e.g. "1/n" (default), "2/n", "1/3"')

    s = sub.add_parser("sample", parents=[common], help="sample a random graph")
    s.add_argument("model", choices=["gnk", "gnp", "planted", "clique", "triangle"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", default=None)
    s.add_argument("--kernel", default=None, help="kernel JSON file")
    s.add_argument("--p-in", dest="p_in", default=None)
    s.add_argument("--p-out", dest="p_out", default=None)
    s.add_argument("--family", default=None, help="inserted graphs, e.g. K3:6,K2:1")
    s.add_argument("--d", type=int, default=None)
    s.add_argument("--simplify", action="store_true", help="drop loops and repeated edges")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("metric", parents=[common], help="evaluate a metric")
    m.add_argument("metric", choices=["cutnorm", "dcut", "dedit", "counts", "ploc", "dP", "dcn"])
    m.add_argument("--a", default=None)
    m.add_argument("--b", default=None)
    m.add_argument("--kernel", default=None)
    m.add_argument("--matrix", default=None, help='signed matrix, e.g. "1,-1;-1,1"')
    m.add_argument("--weights", default=None, help='block weights, e.g. "1/2,1/2"')
    m.add_argument("--mode", choices=["exact", "search", "heuristic"], default="exact")
    m.add_argument("--budget", type=int, default=10**4)
    m.add_argument("--kmax", type=int, default=2)
    m.add_argument("--t", type=int, default=1)
    m.add_argument("--kind", choices=["emb", "hom"], default="emb")
    m.add_argument("--set-distance", dest="kind_set", choices=["hausdorff", "matching", "weighted_matching"],
                   default="hausdorff")
    m.add_argument("--pattern", default=None, help="comma-separated patterns (K3, P4, or files); default all trees")
    m.add_argument("--max-edges", dest="max_edges", type=int, default=6)
    m.set_defaults(func=cmd_metric)

    e = sub.add_parser("experiment", parents=[common], help="run a canned experiment")
    e.add_argument("name")
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--c", default=None)
    e.add_argument("--t", type=int, default=None)
    e.add_argument("--m", type=int, default=2000)
    e.add_argument("--deltas", default=None)
    e.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds starting at --seed")
    e.add_argument("--budget", type=int, default=10**4)
    e.add_argument("--probe", default=None, help='probe matrix for dpconc, default "1,3;3,1"')
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except SizeRefusal as exc:
        print(json.dumps({"error": "size_refusal", "message": str(exc)}), file=sys.stderr)
        return 2
    except (UsageError, SparseGraphError, ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
