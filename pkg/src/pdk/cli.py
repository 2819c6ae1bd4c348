"""Command-line entry points: validate, gen, solve, oracle, bench, kernel-stats.

Every command prints one JSON document (or a markdown report for `bench`) on
standard output.  Exit codes: 0 = decided (including validation reports that
say "not ok"), 2 = usage or input-parsing error, 3 = a precondition or guard
refused the computation.
"""

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Optional

from .bench import SUITES, bench_report, run_suite
from .errors import OracleLimitError, PdkError, PreconditionViolation, ValidationError
from .formats import contact_to_json, dumps, load_path, system_to_json
from .generators import generate_contact_system, generate_system
from .geometry import (
    ContactSegmentSystem,
    PseudoDiskSystem,
    contact_graph_edges,
    validate_contact_system,
    validate_system,
)
from .graphs import IntersectionGraph, build_intersection_graph
from .oracle import brute_force_fvs, brute_force_th, verify_fvs, verify_th
from .solver import (
    kernel_statistics,
    solve_fvs,
    solve_fvs_contact_segments,
    solve_fvs_graph,
    solve_th,
)

GEN_KINDS = ("squares", "disks", "mixed", "contact")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    k: int = 0
    p: Optional[int] = None
    no_kernel: bool = False
    graph_only: bool = False
    representation: str = "geometric"
    seed: int = 0
    out: Optional[str] = None

    def check(self):
        if self.k < 0:
            raise PdkError("budget k must be non-negative")
        if self.p is not None and self.p < 3:
            raise PdkError("clique threshold p must be at least 3")
        if self.no_kernel and self.representation == "fallback":
            raise PdkError("--no-kernel and --fallback-k are exclusive")


def _nonneg(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _auto_p(text):
    if text == "auto":
        return None
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdk", description="pseudo-disk FVS / triangle-hitting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a pds-1 / css-1 / graph-1 file")
    v.add_argument("input")

    g = sub.add_parser("gen", help="generate a random input file")
    g.add_argument("kind", choices=GEN_KINDS)
    g.add_argument("--n", type=_nonneg, required=True)
    g.add_argument("--ply", type=int, default=None)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--seed", type=_nonneg, default=0)
    g.add_argument("--out", default=None)

    s = sub.add_parser("solve", help="decide an instance end to end")
    s.add_argument("problem", choices=("fvs", "th"))
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--p", type=_auto_p, default=None,
                   help="clique threshold (default: auto)")
    s.add_argument("--no-kernel", action="store_true",
                   help="skip kernelization, go straight to the DP")
    s.add_argument("--graph-only", action="store_true",
                   help="discard the representation, solve the bare graph")
    s.add_argument("--fallback-k", action="store_true",
                   help="kernelize with the representation-free clique sets")
    s.add_argument("--cert", action="store_true",
                   help="re-verify the certificate and say so in the output")
    s.add_argument("--out", default=None)

    o = sub.add_parser("oracle", help="brute-force ground truth")
    o.add_argument("problem", choices=("fvs", "th"))
    o.add_argument("--input", required=True)
    o.add_argument("--k", type=_nonneg, required=True)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", choices=SUITES + ("all",), required=True)
    b.add_argument("--seed", type=_nonneg, default=0)
    b.add_argument("--scale", type=float, default=1.0,
                   help="shrink factor for trial counts (default 1.0)")
    b.add_argument("--out", default=None,
                   help="directory for report.md and data.csv")

    ks = sub.add_parser("kernel-stats",
                        help="rule-hit table and size ratios, no DP")
    ks.add_argument("--input", required=True)
    ks.add_argument("--k", type=_nonneg, required=True)
    ks.add_argument("--p", type=_auto_p, default=None)
    ks.add_argument("--fallback-k", action="store_true")
    return parser


def _load_input(path: str):
    try:
        return load_path(path)
    except OSError as e:
        raise _UsageError("cannot read %s: %s" % (path, e)) from None
    except ValidationError as e:
        raise _UsageError("cannot parse %s: %s" % (path, e)) from None


class _UsageError(Exception):
    pass


def _emit(doc, out: Optional[str]):
    text = dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _cmd_validate(args) -> int:
    obj = _load_input(args.input)
    if isinstance(obj, PseudoDiskSystem):
        report = validate_system(obj)
    elif isinstance(obj, ContactSegmentSystem):
        report = validate_contact_system(obj)
    else:
        _emit({"ok": True, "issues": [], "kind": "graph"}, None)
        return 0
    issues = [{"code": i.code, "message": i.message, "ids": list(i.ids)}
              for i in report.issues]
    _emit({"ok": report.ok, "issues": issues}, None)
    return 0


def _cmd_gen(args) -> int:
    if args.kind == "contact":
        css = generate_contact_system(args.n, args.seed)
        doc = contact_to_json(css)
    else:
        system = generate_system(args.kind, args.n, args.seed,
                                 ply=args.ply, density=args.density)
        doc = system_to_json(system)
    _emit(doc, args.out)
    return 0


def _contact_graph(css: ContactSegmentSystem) -> IntersectionGraph:
    edges = sorted(tuple(sorted(e)) for e in contact_graph_edges(css))
    return IntersectionGraph(sorted(css.by_id), edges)


def _cmd_solve(args, cfg: RunConfig) -> int:
    obj = _load_input(args.input)
    if args.problem == "fvs":
        if isinstance(obj, ContactSegmentSystem):
            if cfg.graph_only:
                res = solve_fvs_graph(_contact_graph(obj), cfg.k, p=cfg.p,
                                      use_kernel=not cfg.no_kernel)
            else:
                res = solve_fvs_contact_segments(obj, cfg.k, p=cfg.p)
        elif isinstance(obj, PseudoDiskSystem):
            if cfg.graph_only:
                res = solve_fvs_graph(build_intersection_graph(obj), cfg.k,
                                      p=cfg.p, use_kernel=not cfg.no_kernel)
            else:
                res = solve_fvs(obj, cfg.k, p=cfg.p,
                                use_kernel=not cfg.no_kernel,
                                representation=cfg.representation)
        else:
            res = solve_fvs_graph(obj, cfg.k, p=cfg.p,
                                  use_kernel=not cfg.no_kernel)
    else:
        if isinstance(obj, ContactSegmentSystem):
            target = _contact_graph(obj)
        elif isinstance(obj, PseudoDiskSystem) and cfg.graph_only:
            target = build_intersection_graph(obj)
        else:
            target = obj
        res = solve_th(target, cfg.k)
    doc = res.to_json()
    if args.cert and res.answer == "yes":
        g = _graph_of(obj)
        check = verify_fvs if args.problem == "fvs" else verify_th
        doc["certified"] = bool(check(g, set(res.solution))
                                and len(res.solution) <= cfg.k)
    _emit(doc, args.out)
    return 0


def _graph_of(obj) -> IntersectionGraph:
    if isinstance(obj, PseudoDiskSystem):
        return build_intersection_graph(obj)
    if isinstance(obj, ContactSegmentSystem):
        return _contact_graph(obj)
    return obj


def _cmd_oracle(args) -> int:
    g = _graph_of(_load_input(args.input))
    res = (brute_force_fvs if args.problem == "fvs" else brute_force_th)(g)
    answer = "yes" if res.opt <= args.k else "no"
    _emit({"answer": answer, "opt": res.opt,
           "witness": sorted(res.witness, key=str)}, None)
    return 0


def _cmd_bench(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    results = [run_suite(name, seed=args.seed, scale=args.scale)
               for name in names]
    md, csv = bench_report(results)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.md"), "w") as fh:
            fh.write(md)
        with open(os.path.join(args.out, "data.csv"), "w") as fh:
            fh.write(csv)
    sys.stdout.write(md)
    return 0


def _cmd_kernel_stats(args, cfg: RunConfig) -> int:
    obj = _load_input(args.input)
    target = obj if isinstance(obj, PseudoDiskSystem) else _graph_of(obj)
    stats = kernel_statistics(target, cfg.k, p=cfg.p,
                              representation=cfg.representation)
    _emit(stats, None)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    cfg = RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        k=getattr(args, "k", 0),
        p=getattr(args, "p", None),
        no_kernel=getattr(args, "no_kernel", False),
        graph_only=getattr(args, "graph_only", False),
        representation=("fallback" if getattr(args, "fallback_k", False)
                        else "geometric"),
        seed=getattr(args, "seed", 0),
        out=getattr(args, "out", None))
    try:
        cfg.check()
    except PdkError as e:
        sys.stderr.write("error: %s\n" % e)
        return 2
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args, cfg)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "kernel-stats":
            return _cmd_kernel_stats(args, cfg)
        raise PdkError("unknown command %r" % args.command)
    except _UsageError as e:
        sys.stderr.write("error: %s\n" % e)
        return 2
    except (PreconditionViolation, ValidationError, OracleLimitError) as e:
        sys.stderr.write("refused: %s\n" % e)
        return 3
    except PdkError as e:
        sys.stderr.write("refused: %s\n" % e)
        return 3


if __name__ == "__main__":
    sys.exit(main())
