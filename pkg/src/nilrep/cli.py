"""Command-line entry point: ``nilrep <command> [flags]``.

Exit codes: 0 success, 2 bad flags, 3 certification failure, 4 budget
exhausted.  JSON output is canonical (sorted keys, no timestamps), so the
same flags and seed always give byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .exactq import ShapeError
from .freenil import graded_dims
from .minconstruct import (
    AttemptsExhausted,
    CertificationError,
    check_column_property,
    construct,
    random_sab_with_stats,
    recursive_sab_with_trace,
    sab_conditions,
    BASE_CASE_MAX,
    verify_sab,
)
from .rep import certify, generators_match, is_nilpotent, mu_branches, mu_formula, rep_from_json
from .searchk import (
    PUBLISHED_UPPER_BOUNDS,
    BudgetExhausted,
    SearchConfig,
    reference_bounds,
    search_min_dim,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CERT = 3
EXIT_BUDGET = 4


class UsageError(Exception):
    pass


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def input_hash(inputs: dict) -> str:
    blob = json.dumps({"inputs": inputs, "version": __version__}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def certificate(command: str, inputs: dict, checks: dict, seeds: dict | None = None,
                witness=None, extra: dict | None = None) -> dict:
    cert = {
        "tool": "nilrep",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "input_hash": input_hash(inputs),
        "seeds": seeds or {},
        "checks": checks,
        "passed": all(checks.values()),
        "witness": witness,
    }
    if extra:
        cert.update(extra)
    return cert


def emit(args, payload: dict, summary: list[str]) -> None:
    text = canonical(payload)
    if args.out:
        Path(args.out).write_text(text)
    if args.format == "pretty":
        sys.stdout.write("\n".join(summary) + "\n")
    elif not args.out:
        sys.stdout.write(text)


def _need(value, name: str, minimum: int):
    if value is None:
        raise UsageError(f"--{name} is required")
    if value < minimum:
        raise UsageError(f"--{name} must be at least {minimum}")
    return value


# -- commands ------------------------------------------------------------------

def cmd_dim(args) -> int:
    r, k = _need(args.r, "r", 2), _need(args.k, "k", 2)
    dims = graded_dims(r, k)
    emit(args, {"r": r, "k": k, "dims": dims, "total": sum(dims)},
         [f"L_({r},{k}): graded dims {dims}, total {sum(dims)}"])
    return EXIT_OK


def cmd_mu(args) -> int:
    r = _need(args.r, "r", 2)
    branches = mu_branches(r)
    emit(args, {"r": r, "mu": mu_formula(r), **branches},
         [f"mu(L_({r},2)) = {mu_formula(r)}"])
    return EXIT_OK


def cmd_construct(args) -> int:
    r = _need(args.r, "r", 2)
    bound = _need(args.bound, "bound", 1)
    strategy = args.strategy or "random"
    if strategy not in ("random", "recursive"):
        raise UsageError("--strategy must be random or recursive")
    inputs = {"r": r, "strategy": strategy, "seed": args.seed, "bound": bound}
    try:
        built = construct(r, strategy=strategy, seed=args.seed, entry_bound=bound)
    except (CertificationError, AttemptsExhausted) as exc:
        cert = certificate("construct", inputs, {"constructed": False}, {"seed": args.seed},
                           witness={"error": str(exc)})
        emit(args, {"certificate": cert}, [f"construction failed: {exc}"])
        return EXIT_CERT
    report = certify(built.rep)
    checks = {"is_homomorphism": report.is_homomorphism, "is_faithful": report.is_faithful,
              "dimension_matches_formula": report.dimension == mu_formula(r)}
    cert = certificate("construct", inputs, checks, {"seed": args.seed}, report.witness,
                       extra=built.certificate())
    payload = {"representation": built.rep.to_json(include_images=True),
               "report": report.to_json(), "certificate": cert}
    emit(args, payload, [f"r={r}: dimension {report.dimension}, profile {list(built.rep.profile.dims)}",
                         f"homomorphism {report.is_homomorphism}, faithful {report.is_faithful}"])
    return EXIT_OK if cert["passed"] else EXIT_CERT


def cmd_verify(args) -> int:
    if not args.path:
        raise UsageError("verify needs a representation file")
    try:
        raw = Path(args.path).read_bytes()
        obj = json.loads(raw)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {args.path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError(f"{args.path} does not hold a JSON object")
    rep_obj = obj.get("representation", obj)
    inputs = {"file_sha256": hashlib.sha256(raw).hexdigest(), "full_check": args.full}
    try:
        rep = rep_from_json(rep_obj)
    except (KeyError, ShapeError, ValueError, TypeError) as exc:
        cert = certificate("verify", inputs, {"well_formed": False}, witness={"error": str(exc)})
        emit(args, {"certificate": cert}, [f"malformed representation: {exc}"])
        return EXIT_CERT
    consistent, gen_witness = generators_match(rep)
    report = certify(rep, full_check=args.full)
    checks = {"generators_match_images": consistent, "is_homomorphism": report.is_homomorphism,
              "is_faithful": report.is_faithful, "is_nilpotent": is_nilpotent(rep)}
    witness = report.witness if report.witness else gen_witness
    cert = certificate("verify", inputs, checks, witness=witness)
    lines = [f"{name}: {'pass' if ok else 'FAIL'}" for name, ok in checks.items()]
    if witness:
        lines.append(f"witness: {json.dumps(witness, sort_keys=True)}")
    emit(args, {"report": report.to_json(), "certificate": cert}, lines)
    return EXIT_OK if cert["passed"] else EXIT_CERT


def cmd_sab(args) -> int:
    a, b = _need(args.a, "a", 1), _need(args.b, "b", 1)
    strategy = args.strategy or "random"
    bound = _need(args.bound, "bound", 1)
    if strategy not in ("random", "recursive"):
        raise UsageError("--strategy must be random or recursive")
    if strategy == "recursive" and (a < b or (a > BASE_CASE_MAX and not sab_conditions(a, b))):
        raise UsageError(f"({a}, {b}) does not satisfy the conditions for the recursive construction")
    inputs = {"a": a, "b": b, "strategy": strategy, "seed": args.seed, "bound": bound}
    extra = {}
    try:
        if strategy == "recursive":
            res = recursive_sab_with_trace(a, b, seed=args.seed)
            seq = res.seq
            extra["trace"] = [s.to_json() for s in res.trace]
        else:
            stats = random_sab_with_stats(a, b, seed=args.seed, entry_bound=bound, check_columns=False)
            seq = stats.seq
            extra["attempts"] = stats.attempts
    except (CertificationError, AttemptsExhausted) as exc:
        cert = certificate("sab", inputs, {"verify_sab": False}, {"seed": args.seed},
                           witness={"error": str(exc)})
        emit(args, {"certificate": cert}, [f"no sequence: {exc}"])
        return EXIT_CERT
    col = check_column_property(seq)
    checks = {"verify_sab": verify_sab(seq)}
    extra["column_property"] = {"holds": col.ok, "mode": col.mode, "subsets_checked": col.subsets_checked,
                                "size": col.size}
    cert = certificate("sab", inputs, checks, {"seed": args.seed}, extra=extra)
    emit(args, {"sequence": seq.to_json(), "certificate": cert},
         [f"S_({a},{b}): n={seq.n}, i0={seq.i0}, verify_sab {checks['verify_sab']}",
          f"column property {col.ok} ({col.mode})"])
    return EXIT_OK if cert["passed"] else EXIT_CERT


def _attempts_markdown(result_log: list[dict]) -> str:
    lines = ["| total | profile | trials | successes |", "|---|---|---|---|"]
    for a in result_log:
        lines.append(f"| {a['total']} | {tuple(a['profile'])} | {a['trials']} | {a['successes']} |")
    return "\n".join(lines) + "\n"


def cmd_search(args) -> int:
    r, k = _need(args.r, "r", 2), _need(args.k, "k", 2)
    trials = _need(args.trials, "trials", 1)
    if args.bound is not None and args.bound < 0:
        raise UsageError("--bound must be non-negative")
    if args.budget is not None and args.budget < 1:
        raise UsageError("--budget must be positive")
    if args.time_limit is not None and args.time_limit <= 0:
        raise UsageError("--time-limit must be positive")
    config = SearchConfig(r, k, trials_per_profile=trials, entry_bound=args.bound, master_seed=args.seed,
                          dim_budget=args.budget, time_budget=args.time_limit)
    inputs = {"r": r, "k": k, "seed": args.seed, "trials": trials, "bound": config.entry_bound,
              "budget": args.budget}
    refs = reference_bounds(r, k)
    try:
        result = search_min_dim(config)
    except BudgetExhausted as exc:
        log = [a.to_json() for a in exc.log]
        cert = certificate("search", inputs, {"found": False}, {"master_seed": args.seed},
                           witness={"error": str(exc)})
        emit(args, {"attempts": log, "reference_bounds": refs, "certificate": cert},
             [f"budget exhausted: {exc}"])
        if args.report:
            Path(args.report).write_text(f"# Search L_({r},{k}): budget exhausted\n\n" + _attempts_markdown(log))
        return EXIT_BUDGET
    report = certify(result.representation)
    log = [a.to_json() for a in result.attempts]
    checks = {"is_homomorphism": report.is_homomorphism, "is_faithful": report.is_faithful}
    if k == 2:
        checks["not_below_formula"] = result.best_dim >= mu_formula(r)
    published = refs["published"]
    payload = {
        "best_dim": result.best_dim,
        "best_profile": list(result.best_profile.dims),
        "trials_run": result.trials_run,
        "winning_trial": result.winning_trial,
        "attempts": log,
        "reference_bounds": refs,
        "representation": result.representation.to_json(),
        "certificate": certificate("search", inputs, checks, {"master_seed": args.seed}, report.witness),
    }
    emit(args, payload, [f"L_({r},{k}): best_dim {result.best_dim} with profile {tuple(result.best_profile.dims)}",
                         f"trials {result.trials_run}, published bound {published}"])
    if args.report:
        head = (f"# Search L_({r},{k})\n\nbest_dim {result.best_dim}, profile "
                f"{tuple(result.best_profile.dims)}, published bound {published}\n\n")
        Path(args.report).write_text(head + _attempts_markdown(log))
    return EXIT_OK if payload["certificate"]["passed"] else EXIT_CERT


def cmd_report(args) -> int:
    max_r = _need(args.r, "r", 2)
    trials = _need(args.trials, "trials", 1)
    mu_rows = []
    for r in range(2, 17):
        built = construct(r, seed=args.seed)
        rep = certify(built.rep)
        mu_rows.append({"r": r, "formula": mu_formula(r), "constructed": rep.dimension, "certified": rep.ok})
    step_rows = []
    for k in (3, 4):
        for r in sorted(PUBLISHED_UPPER_BOUNDS[k]):
            row = {"r": r, "k": k, "published": PUBLISHED_UPPER_BOUNDS[k][r], "found": None, "profile": None,
                   "asymptote": reference_bounds(r, k)["center_asymptote"]}
            # step 4 grows much faster, so it is searched one rank lower
            if r <= max_r - (k - 3):
                try:
                    res = search_min_dim(SearchConfig(r, k, trials_per_profile=trials, master_seed=args.seed))
                    row["found"], row["profile"] = res.best_dim, list(res.best_profile.dims)
                except BudgetExhausted:
                    pass
            step_rows.append(row)
    if args.format == "pretty":
        out = ["## mu(L_(r,2))", "", "| r | formula | constructed | certified |", "|---|---|---|---|"]
        out += [f"| {m['r']} | {m['formula']} | {m['constructed']} | {m['certified']} |" for m in mu_rows]
        for k in (3, 4):
            out += ["", f"## step {k} upper bounds", "",
                    "| r | published | found | profile | ceil 2 sqrt(r^k/k) |", "|---|---|---|---|---|"]
            for s in step_rows:
                if s["k"] == k:
                    found = s["found"] if s["found"] is not None else "not run"
                    prof = tuple(s["profile"]) if s["profile"] else ""
                    out.append(f"| {s['r']} | {s['published']} | {found} | {prof} | {s['asymptote']} |")
        text = "\n".join(out) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        sys.stdout.write(text)
    else:
        text = canonical({"mu_table": mu_rows, "step_tables": step_rows, "seed": args.seed,
                          "version": __version__})
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "dim": cmd_dim, "mu": cmd_mu, "construct": cmd_construct, "verify": cmd_verify,
    "sab": cmd_sab, "search": cmd_search, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "pretty"), default="json")
    common.add_argument("--out", help="write the JSON artifact here")
    common.add_argument("--seed", type=int, default=1)

    parser = argparse.ArgumentParser(prog="nilrep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nilrep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="graded dimensions of L_(r,k)")
    p.add_argument("--r", type=int)
    p.add_argument("--k", type=int, default=2)

    p = sub.add_parser("mu", parents=[common], help="closed formula for mu(L_(r,2))")
    p.add_argument("--r", type=int)

    p = sub.add_parser("construct", parents=[common], help="build a minimal faithful rep of L_(r,2)")
    p.add_argument("--r", type=int)
    p.add_argument("--strategy", choices=("random", "recursive"), default="random")
    p.add_argument("--bound", type=int, default=99, help="entry bound for random sampling")

    p = sub.add_parser("verify", parents=[common], help="re-certify a representation file")
    p.add_argument("path", nargs="?")
    p.add_argument("--full", action="store_true", help="also test injectivity on the whole basis")

    p = sub.add_parser("sab", parents=[common], help="produce an S_ab matrix sequence")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--strategy", choices=("random", "recursive"), default="random")
    p.add_argument("--bound", type=int, default=99)

    p = sub.add_parser("search", parents=[common], help="random search over block profiles")
    p.add_argument("--r", type=int)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--trials", type=int, default=200, help="trials per profile")
    p.add_argument("--bound", type=int, help="entry bound (default 9 for k >= 3, else 99)")
    p.add_argument("--budget", type=int, help="largest total dimension to try")
    p.add_argument("--time-limit", type=float, help="wall-clock limit in seconds")
    p.add_argument("--report", help="also write a markdown log of attempted profiles")

    p = sub.add_parser("report", parents=[common], help="formula and experiment tables next to found values")
    p.add_argument("--r", type=int, default=3, help="largest rank searched for step 3")
    p.add_argument("--trials", type=int, default=200)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"nilrep {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
