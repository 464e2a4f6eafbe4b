"""Command-line front end: parse graphs, run pipelines, emit reports.

Edge-list format: an optional '#' starts a comment anywhere on a line, the
first significant line is the header "n <count> [directed]", and every
following line is "u v [w]" (weight defaults to 1).  Undirected duplicate
edges merge by weight sum and edges are kept sorted, so serialization is
canonical and identical invocations produce byte-identical files.

Exit codes: 0 success (and check passed), 1 check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import graph as graph_mod
from . import sketches, sparsify, verify
from .errors import ParseError, WalksparseError
from .matrix_walk import partial_color


@dataclass
class RunConfig:
    command: str
    epsilon: float = 0.5
    c_support: float = 1024.0
    phi_target: float | None = None
    input_path: str = ""
    against_path: str = ""
    output_path: str = ""
    report_path: str = ""
    vectors_path: str = ""
    check: bool = False
    kind: str = "spectral"
    c_sketch: float = 4.0
    c_resist: float = 4.0


def parse_edge_list(text):
    """Parse the edge-list format into a Graph, with line-numbered errors."""
    n = None
    directed = False
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if n is None:
            if tokens[0] != "n" or len(tokens) not in (2, 3):
                raise ParseError("expected header 'n <count> [directed]'", line=lineno)
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad vertex count {tokens[1]!r}", line=lineno) from None
            if n < 0:
                raise ParseError("negative vertex count", line=lineno)
            if len(tokens) == 3:
                if tokens[2] != "directed":
                    raise ParseError(f"unknown header flag {tokens[2]!r}", line=lineno)
                directed = True
            continue
        if len(tokens) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {line!r}", line=lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
            w = float(tokens[2]) if len(tokens) == 3 else 1.0
        except ValueError:
            raise ParseError(f"malformed edge line {line!r}", line=lineno) from None
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge ({u},{v}) out of range", line=lineno)
        if not np.isfinite(w) or w <= 0:
            raise ParseError(f"bad weight {w}", line=lineno)
        edges.append((u, v, w))
    if n is None:
        raise ParseError("missing header line")
    return graph_mod.Graph(n, tuple(edges), directed=directed)


def serialize_graph(g):
    """Canonical text form; weights in shortest exact decimal form.

    repr() of a float is the shortest string that re-parses to the same
    bits (always at least 12 significant digits of precision), so
    parse(serialize(G)) reproduces G exactly.
    """
    header = f"n {g.n} directed" if g.directed else f"n {g.n}"
    lines = [header]
    for u, v, w in g.edges:
        lines.append(f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def load_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def load_vectors(path, n):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals = [float(t) for t in line.split()]
            except ValueError:
                raise ParseError("malformed vector line", line=lineno) from None
            if len(vals) != n:
                raise ParseError(
                    f"vector of length {len(vals)}, expected {n}", line=lineno
                )
            rows.append(vals)
    if not rows:
        raise ParseError("vector file is empty")
    return np.asarray(rows)


def _emit(cfg, out_graph, report):
    text = serialize_graph(out_graph) if out_graph is not None else None
    if text is not None:
        if cfg.output_path:
            with open(cfg.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    if report is not None:
        payload = report.to_json() if hasattr(report, "to_json") else json.dumps(report, indent=2)
        if cfg.report_path:
            with open(cfg.report_path, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
        elif cfg.check:
            sys.stdout.write(payload + "\n")


def _sparsify_options(cfg):
    return sparsify.SparsifyOptions(c_support=cfg.c_support)


def _run_partial_color(cfg, g):
    family = sparsify.spectral_family(g)
    h = sparsify.degree_subspace(g)
    x = partial_color(family, h)
    out = g.reweighted(1.0 + x)
    bound = 16.0 * np.sqrt(2.0 * g.n / g.m)
    measured = family.aggregate_norm(x)
    rep = verify.ApproxReport(
        kind="spectral",
        target=bound,
        measured_eps=measured,
        kernel_ok=True,
        degree_max_dev=float(
            np.max(np.abs(out.weighted_degrees() - g.weighted_degrees()), initial=0.0)
        ),
        support_size=out.m,
    )
    return out, rep


def _run_command(cfg):
    g = load_graph(cfg.input_path)
    if cfg.command == "partial-color":
        out, rep = _run_partial_color(cfg, g)
    elif cfg.command == "sparsify":
        if g.is_connected():
            out = sparsify.spectral_sparsify(g, cfg.epsilon, _sparsify_options(cfg)).graph
        else:
            out = sparsify.sparsify_components(
                g, lambda sub: sparsify.spectral_sparsify(sub, cfg.epsilon, _sparsify_options(cfg))
            )
        rep = verify.check_spectral(g, out, target=cfg.epsilon)
    elif cfg.command == "uc":
        if g.is_connected():
            out = sparsify.uc_sparsify(g, cfg.epsilon, _sparsify_options(cfg)).graph
        else:
            out = sparsify.sparsify_components(
                g, lambda sub: sparsify.uc_sparsify(sub, cfg.epsilon, _sparsify_options(cfg))
            )
        rep = verify.check_uc_undirected(g, out, target=cfg.epsilon)
    elif cfg.command == "sv":
        if g.directed:
            out = sparsify.sv_sparsify(
                g, cfg.epsilon, phi_target=cfg.phi_target, options=_sparsify_options(cfg)
            ).graph
        else:
            lam = graph_mod.lambda2(g)
            out = sparsify.sv_sparsify_expander(
                g, lam, cfg.epsilon, _sparsify_options(cfg)
            ).graph
        rep = verify.check_sv(g, out, target=cfg.epsilon)
    elif cfg.command == "sketch":
        if not cfg.vectors_path:
            raise WalksparseError("sketch requires --vectors")
        kvecs = load_vectors(cfg.vectors_path, g.n)
        res = sketches.sketch(
            g, kvecs, cfg.epsilon, sketches.SketchOptions(phi_target=cfg.phi_target)
        )
        out = res.graph
        rep = verify.check_sketch(g, out, kvecs, target=cfg.c_sketch * cfg.epsilon)
    elif cfg.command == "resist":
        res = sketches.resistance_sparsify(
            g,
            cfg.epsilon,
            sketches.SketchOptions(phi_target=cfg.phi_target, c_resist=cfg.c_resist),
        )
        out = res.graph
        rep = verify.check_resistance(g, out, target=cfg.c_resist * cfg.epsilon)
    elif cfg.command == "decompose":
        phi = cfg.phi_target if cfg.phi_target is not None else graph_mod.default_phi_target(g.n)
        pieces = graph_mod.expander_decompose(g, phi)
        mult = np.zeros(g.n, dtype=int)
        for p in pieces:
            for v in p.non_isolated():
                mult[v] += 1
        if cfg.output_path:
            for i, p in enumerate(pieces):
                with open(f"{cfg.output_path}.piece{i}", "w", encoding="utf-8") as fh:
                    fh.write(serialize_graph(p))
        payload = {
            "pieces": len(pieces),
            "phi_target": phi,
            "edge_counts": [p.m for p in pieces],
            "lambda2": [graph_mod.lambda2(p) for p in pieces],
            "max_multiplicity": int(mult.max(initial=0)),
            "pass": True,
        }
        _emit(cfg, None, payload)
        return 0
    elif cfg.command == "verify":
        other = load_graph(cfg.against_path)
        if cfg.kind == "spectral":
            rep = verify.check_spectral(g, other, target=cfg.epsilon)
        elif cfg.kind == "uc":
            rep = verify.check_uc_undirected(g, other, target=cfg.epsilon)
        elif cfg.kind == "sv":
            rep = verify.check_sv(g, other, target=cfg.epsilon)
        elif cfg.kind == "sketch":
            kvecs = load_vectors(cfg.vectors_path, g.n)
            rep = verify.check_sketch(g, other, kvecs, target=cfg.epsilon)
        elif cfg.kind == "resistance":
            rep = verify.check_resistance(g, other, target=cfg.epsilon)
        else:
            raise WalksparseError(f"unknown verify kind {cfg.kind!r}")
        _emit(cfg, None, rep)
        return 0 if (not cfg.check or rep.passed) else 1
    else:
        raise WalksparseError(f"unknown command {cfg.command!r}")

    _emit(cfg, out, rep)
    if cfg.check and hasattr(rep, "passed") and not rep.passed:
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="walksparse",
        description="Deterministic discrepancy-walk sparsifiers and their verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, against=False):
        p.add_argument("input", help="edge-list file")
        if against:
            p.add_argument("against", help="candidate edge-list file")
        p.add_argument("--epsilon", type=float, default=0.5)
        p.add_argument("--c-support", type=float, default=1024.0)
        p.add_argument("--phi-target", type=float, default=None)
        p.add_argument("--vectors", default="")
        p.add_argument("--out", default="")
        p.add_argument("--report", default="")
        p.add_argument("--check", action="store_true")
        p.add_argument("--c-sketch", type=float, default=4.0)
        p.add_argument("--c-resist", type=float, default=4.0)

    for name in ("partial-color", "sparsify", "uc", "sv", "sketch", "resist", "decompose"):
        common(sub.add_parser(name))
    pv = sub.add_parser("verify")
    common(pv, against=True)
    pv.add_argument("--kind", default="spectral",
                    choices=["spectral", "uc", "sv", "sketch", "resistance"])
    return parser


def config_from_args(args):
    return RunConfig(
        command=args.command,
        epsilon=args.epsilon,
        c_support=args.c_support,
        phi_target=args.phi_target,
        input_path=args.input,
        against_path=getattr(args, "against", ""),
        output_path=args.out,
        report_path=args.report,
        vectors_path=args.vectors,
        check=args.check,
        kind=getattr(args, "kind", "spectral"),
        c_sketch=args.c_sketch,
        c_resist=args.c_resist,
    )


def run(cfg):
    """Run one configured command; returns the process exit code."""
    if not (0.0 < cfg.epsilon < 2.0):
        print(f"error: epsilon {cfg.epsilon} outside (0, 2)", file=sys.stderr)
        return 2
    try:
        return _run_command(cfg)
    except (WalksparseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
