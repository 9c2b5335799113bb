"""Command-line front end.

Exit codes: 0 success / property holds, 1 property fails or a proven
invariant was violated, 2 usage or parse error, 3 resource cap exceeded.
Results go to stdout (JSON with ``--json``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import domination as dom
from .digraph import Digraph, VertexSet, is_source_free, parse_edge_list, serialize_edge_list, to_dot
from .errors import (
    CapExceeded,
    CertificateMismatch,
    InvariantViolation,
    PreconditionFailed,
    QKernelError,
    ShardConflict,
)
from .explorer import FILTERS, ScanConfig, SearchReport, merge_reports, run_sharded, scan
from .generators import KINDS, generate
from .solvers import ShrinkCertificate, chvatal_quasi_kernel, find_kernel, min_quasi_kernel, shrink_kernel, verify_certificate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_graph(path: str) -> Digraph:
    return parse_edge_list(_read_text(path))


def _parse_set(text: Optional[str]) -> list[int]:
    if text is None or not text.strip():
        return []
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad vertex list {text!r}") from None


def _parse_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise UsageError(f"bad n range {text!r}; use N or LO..HI") from None


def _fmt(vs) -> str:
    return " ".join(str(v) for v in vs)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        print(text)


# --- subcommands ----------------------------------------------------------------


def _explain(D: Digraph, prop: str, S: list[int]) -> tuple[bool, Optional[str], object]:
    """Verdict, human-readable reason and machine witness for one property."""
    if prop == "source-free":
        missing = [v for v in range(D.n) if not D.in_masks[v]]
        if missing:
            return False, f"vertex {missing[0]} has no in-arc", {"vertex": missing[0]}
        return True, None, None
    if prop in ("independent", "kernel", "quasi-kernel"):
        arc = dom.independence_violation(D, S)
        if arc:
            return False, f"arc {arc[0]} -> {arc[1]} inside set", {"arc": list(arc)}
    if prop == "independent":
        return True, None, None
    if prop == "kernel":
        v = dom.undominated_vertex(D, S)
        if v is not None:
            return False, f"vertex {v} not dominated", {"vertex": v}
        return True, None, None
    if prop == "quasi-kernel":
        v = dom.uncovered_vertex(D, S)
        if v is not None:
            return False, f"vertex {v} not reachable within 2 steps", {"vertex": v}
        return True, None, None
    if prop == "inward-dominated":
        arc = dom.inward_violation(D, S)
        if arc:
            return False, f"arc {arc[0]} -> {arc[1]} enters the set from undominated vertex {arc[0]}", {"arc": list(arc)}
        return True, None, None
    raise UsageError(f"unknown property {prop!r}")


def cmd_check(args) -> int:
    D = _load_graph(args.file)
    S = _parse_set(args.set)
    D.mask_of(S)
    holds, reason, witness = _explain(D, args.property, S)
    text = "true" if holds else f"false: {reason}"
    _emit(args, {"property": args.property, "set": sorted(set(S)), "holds": holds, "witness": witness}, text)
    return EXIT_OK if holds else EXIT_FAIL


def cmd_solve(args) -> int:
    D = _load_graph(args.file)
    if args.what == "kernel":
        result = find_kernel(D)
    elif args.what == "min-qk":
        result = min_quasi_kernel(D)
    else:
        result = chvatal_quasi_kernel(D)
    if args.dot:
        Path(args.dot).write_text(to_dot(D, result or ()))
    if result is None:
        _emit(args, {"what": args.what, "set": None}, "none")
        return EXIT_FAIL
    _emit(args, {"what": args.what, "set": result.to_list()}, _fmt(result))
    return EXIT_OK


def cmd_shrink(args) -> int:
    D = _load_graph(args.file)
    if args.kernel is not None:
        K = VertexSet(_parse_set(args.kernel))
        D.mask_of(K)
    else:
        if not is_source_free(D):
            print("precondition failed: not source free", file=sys.stderr)
            return EXIT_FAIL
        K = find_kernel(D)
        if K is None:
            print("precondition failed: graph has no kernel", file=sys.stderr)
            return EXIT_FAIL
    try:
        cert = shrink_kernel(D, K, verify=args.verify)
    except PreconditionFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    except InvariantViolation as exc:
        print(str(exc), file=sys.stderr)
        if args.trace_out:
            Path(args.trace_out).write_text(exc.certificate.to_json())
        return EXIT_FAIL
    if args.trace_out:
        Path(args.trace_out).write_text(cert.to_json() + "\n")
    size, bound = len(cert.final_set), D.n // 2
    _emit(args, cert.to_dict(), f"{_fmt(cert.final_set)} (size {size} ≤ {bound})")
    return EXIT_OK


def cmd_verify_cert(args) -> int:
    D = _load_graph(args.file)
    try:
        cert = ShrinkCertificate.from_json(_read_text(args.cert))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from None
    try:
        verify_certificate(D, cert)
    except CertificateMismatch as exc:
        _emit(args, {"valid": False, "check": exc.check, "detail": exc.detail}, str(exc))
        return EXIT_FAIL
    _emit(args, {"valid": True}, "true")
    return EXIT_OK


def cmd_gen(args) -> int:
    D = generate(args.kind, args.n, seed=args.seed, arc_prob=args.arc_prob)
    text = serialize_edge_list(D)
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _summary(report) -> str:
    lines = []
    for n, t in report.per_n.items():
        lines.append(
            f"n={n} scanned={t.scanned} matched={t.matched} source_free={t.source_free} "
            f"with_kernel={t.with_kernel} theorem={t.theorem_passes}/{t.theorem_checked} "
            f"conjecture={t.conjecture_passes}/{t.conjecture_checked} extremal="
            f"{sum(1 for e in report.extremal if e['n'] == n)}"
        )
    lines.append(
        f"counterexamples: {len(report.conjecture_counterexamples)} conjecture, "
        f"{len(report.invariant_failures)} invariant failures"
    )
    return "\n".join(lines)


def cmd_search(args) -> int:
    lo, hi = _parse_range(args.n)
    config = ScanConfig(
        n_min=lo,
        n_max=hi,
        mode=args.mode,
        sample_count=args.samples,
        seed=args.seed,
        arc_prob=args.arc_prob,
        filters=tuple(args.filter or ()),
        verification=not args.no_verify,
        collect_matches=args.collect,
        allow_n6=args.allow_n6,
    )
    if args.shard:
        try:
            index, total = (int(x) for x in args.shard.split("/"))
        except ValueError:
            raise UsageError("--shard expects INDEX/TOTAL") from None
        config = ScanConfig.from_dict({**config.to_dict(), "shard": (index, total)})
        report = scan(config)
    elif args.shards > 1 or args.checkpoint or args.threads > 1:
        total = max(args.shards, args.threads)
        report = run_sharded(config, total, workers=args.threads, checkpoint_dir=args.checkpoint)
    else:
        report = scan(config)
    if args.merge:
        parts = [report] + [SearchReport.from_json(_read_text(p)) for p in args.merge]
        report = merge_reports(parts)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
    if args.csv:
        Path(args.csv).write_text(report.csv_summary())
    if args.json:
        print(report.to_json(indent=None))
    else:
        print(_summary(report))
    for entry in report.invariant_failures:
        print(f"invariant failure: n={entry['n']} code={entry['code']} reason={entry['reason']}", file=sys.stderr)
    return EXIT_FAIL if report.invariant_failures else EXIT_OK


# --- parser ---------------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Shared so the flags work before or after the subcommand name; the
    # subcommand copies use SUPPRESS so they never clobber the top-level values.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", default=default(False), help="JSON output")
    p.add_argument("--threads", type=int, default=default(1), help="worker processes for search")
    p.add_argument(
        "--verify", action="store_true", default=default(False),
        help="assert the shrink loop invariants after every removal",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkernel",
        description="Kernels and small quasi-kernels of digraphs.",
        parents=[_global_flags(False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("check", parents=common, help="test a property of a vertex set")
    p.add_argument("file")
    p.add_argument(
        "--property", required=True,
        choices=["independent", "kernel", "quasi-kernel", "inward-dominated", "source-free"],
    )
    p.add_argument("--set", default="", help="comma- or space-separated vertex ids")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=common, help="compute a kernel or quasi-kernel")
    p.add_argument("file")
    p.add_argument("what", choices=["kernel", "min-qk", "qk-chvatal"])
    p.add_argument("--dot", help="also write a DOT drawing with the result highlighted")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("shrink", parents=common, help="shrink a kernel to a quasi-kernel of size <= n/2")
    p.add_argument("file")
    p.add_argument("--kernel", help="starting kernel; default: a minimum kernel")
    p.add_argument("--trace-out", help="write the JSON certificate here")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("verify-cert", parents=common, help="re-check a shrink certificate")
    p.add_argument("file")
    p.add_argument("cert")
    p.set_defaults(func=cmd_verify_cert)

    p = sub.add_parser("gen", parents=common, help="generate a digraph in edge-list format")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--arc-prob", type=float, default=0.5)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("search", parents=common, help="scan small digraphs")
    p.add_argument("--n", required=True, help="N or LO..HI")
    p.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--samples", type=int, default=1000, help="samples per n in random mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--arc-prob", type=float, default=0.5)
    p.add_argument("--filter", action="append", choices=FILTERS)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--csv", help="write a per-n CSV summary here")
    p.add_argument("--shard", help="run only shard INDEX/TOTAL")
    p.add_argument("--shards", type=int, default=1, help="split the scan into this many shards")
    p.add_argument("--checkpoint", help="directory for shard reports and the checkpoint file")
    p.add_argument("--merge", nargs="+", help="shard report files to merge with this run")
    p.add_argument("--collect", action="store_true", help="list every graph passing the filters")
    p.add_argument("--allow-n6", action="store_true", help="permit exhaustive n=6 (slow)")
    p.add_argument("--no-verify", action="store_true", help="skip lemma checks and certificate re-verification")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "allow_n6", False):
        print("warning: exhaustive n=6 covers 2^30 graphs and takes a very long time", file=sys.stderr)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ShardConflict, QKernelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
