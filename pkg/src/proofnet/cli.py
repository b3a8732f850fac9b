"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 parse or validation failure,
3 fuel or budget exhaustion, 4 mismatch found by ``compare``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .corpus import build_corpus, load_corpus
from .net import NetError, parse_net, validate_net
from .points import show_interp
from .predictor import cut_nets, predict
from .rewrite import DEFAULT_FUEL, STRATEGIES, normalize, strong_length
from .semantics import Budget, interpretation

EXIT_USAGE, EXIT_PARSE, EXIT_EXHAUSTED, EXIT_MISMATCH = 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Fail(Exception):
    def __init__(self, code: int, payload: dict):
        super().__init__(payload)
        self.code = code
        self.payload = payload


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False), flush=True)


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_USAGE, {"error": "io", "message": str(exc)})
    try:
        return parse_net(text)
    except NetError as exc:
        raise _Fail(EXIT_PARSE, {"error": exc.code, "message": str(exc), "position": exc.position})


def _budget(args) -> Budget:
    b = Budget()
    if getattr(args, "budget", None) is not None:
        b = b.with_(max_total_sbis=args.budget)
    if getattr(args, "cap", None) is not None:
        b = b.with_(cap=args.cap)
    return b


def cmd_check(args) -> int:
    n = _load(args.file)
    report = validate_net(n)
    _emit(json.loads(report.to_json()))
    return 0 if report.acyclic_switchings else EXIT_PARSE


def cmd_reduce(args) -> int:
    n = _load(args.file)
    trace, status = normalize(n, args.strategy, args.fuel)
    out = {"status": status, "steps": len(trace.steps), "result": str(trace.end)}
    if args.trace:
        out["trace"] = [s.to_json(i) for i, s in enumerate(trace.steps)]
    _emit(out)
    return EXIT_EXHAUSTED if status == "fuel_exhausted" else 0


def cmd_strong(args) -> int:
    n = _load(args.file)
    res = strong_length(n, args.mode, args.fuel)
    _emit({"summary": str(res), **res.to_json()})
    return EXIT_EXHAUSTED if res.status == "Unknown" else 0


def cmd_interp(args) -> int:
    n = _load(args.file)
    pts = interpretation(n, args.mode, _budget(args))
    _emit(sorted(show_interp(p) for p in pts))
    return 0


def cmd_predict(args) -> int:
    a, b = _load(args.file1), _load(args.file2)
    try:
        p = predict(a, b, args.c, args.c2, _budget(args))
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, {"error": "usage", "message": str(exc)})
    _emit(p.to_json())
    return 0 if p.status == "SN" else EXIT_EXHAUSTED


def compare_rows(directory, timing: bool = True) -> list[dict]:
    rows = []
    for fx in load_corpus(directory):
        if not fx.pair:
            continue
        a, b = parse_net(fx.pair["left"]), parse_net(fx.pair["right"])
        t0 = time.perf_counter()
        oracle = strong_length(cut_nets(a, b, fx.pair["c"], fx.pair["c2"]))
        pred = predict(a, b, fx.pair["c"], fx.pair["c2"])
        ms = round((time.perf_counter() - t0) * 1000, 1)
        if oracle.status == "SN":
            match = pred.status == "SN" and pred.predicted_strong == oracle.max_len
        else:
            match = oracle.status == "NotSN" and pred.status == "NotSN_within_budget"
        row = {
            "pair": fx.name,
            "oracle_strong": oracle.max_len if oracle.status == "SN" else str(oracle),
            "predicted_strong": pred.predicted_strong if pred.status == "SN" else pred.status,
            "match": match,
            "budget": pred.budget_used.max_total_sbis,
        }
        if timing:
            row["runtime_ms"] = ms
        rows.append(row)
    return sorted(rows, key=lambda r: r["pair"])


def cmd_compare(args) -> int:
    if not Path(args.corpus_dir).is_dir():
        raise _Fail(EXIT_USAGE, {"error": "io", "message": f"not a directory: {args.corpus_dir}"})
    rows = compare_rows(args.corpus_dir, not args.no_timing)
    _emit(rows)
    return 0 if all(r["match"] for r in rows) else EXIT_MISMATCH


def cmd_build_corpus(args) -> int:
    fixtures = build_corpus(args.out_dir)
    _emit({"fixtures": len(fixtures), "dir": str(args.out_dir)})
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="proofnet", description="Proof nets: reduction, interpretations and length prediction.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="parse and run the switching criterion")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("reduce", help="normalize with a strategy")
    s.add_argument("file")
    s.add_argument("--strategy", choices=STRATEGIES, default="any")
    s.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    s.add_argument("--trace", action="store_true")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("strong", help="longest reduction length by exhaustive search")
    s.add_argument("file")
    s.add_argument("--mode", choices=("all_steps", "nonerasing_only"), default="all_steps")
    s.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    s.set_defaults(func=cmd_strong)

    s = sub.add_parser("interp", help="most general points of a budgeted interpretation slice")
    s.add_argument("file")
    s.add_argument("--mode", choices=("sm", "smbis"), default="smbis")
    s.add_argument("--budget", type=int, help="bound on experiment size s'")
    s.set_defaults(func=cmd_interp)

    s = sub.add_parser("predict", help="predict the strong length of a cut between two cut-free nets")
    s.add_argument("file1")
    s.add_argument("file2")
    s.add_argument("--c", required=True)
    s.add_argument("--c2", required=True)
    s.add_argument("--budget", type=int, help="cap on the experiment size bound")
    s.set_defaults(func=cmd_predict, cap=None)

    s = sub.add_parser("compare", help="oracle against prediction over a corpus directory")
    s.add_argument("corpus_dir")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("build-corpus", help="write the fixture corpus")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_build_corpus)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.verb == "predict" and args.budget is not None:
        args.cap, args.budget = args.budget, None
    try:
        return args.func(args)
    except _Fail as exc:
        _emit(exc.payload)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
