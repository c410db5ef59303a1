"""Command-line front end.

    amqcheck analyze     closed-form false-positive table
    amqcheck compare     exact Bloom formula vs the classic approximation
    amqcheck oracle      exhaustive enumeration vs closed form
    amqcheck simulate    seeded Monte-Carlo estimate with a Wilson interval
    amqcheck conformance executable laws for one or all structures

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from amqcheck import amq_core, harness
from amqcheck.analytic import (
    BloomParams,
    bloom_bit_set_prob,
    bloom_classic_bound,
    bloom_false_positive,
    bloom_false_positive_float,
    format_exact,
    to_float,
)
from amqcheck.blocked import BlockedAmq
from amqcheck.bloom import BloomFilter
from amqcheck.counting_bloom import CountingBloomFilter
from amqcheck.errors import EnumerationTooLarge, FeasibilityError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

STRUCTURES = ("bloom", "counting", "quotient", "blocked-bloom", "blocked-counting", "blocked-quotient")
CLASSIC_NOTE = "classic bound (1-(1-1/m)^(kl))^k is a historically incorrect approximation, shown for comparison"

ANALYZE_FIELDS = ["structure", "params", "l", "mode", "exact", "float", "classic_exact", "classic_float"]
COMPARE_FIELDS = ["params", "l", "exact", "exact_float", "classic_exact", "classic_float", "classic_minus_exact",
                  "bit_set_exact"]
ORACLE_FIELDS = ["structure", "params", "l", "oracle_exact", "analytic_exact", "equal"]
SIMULATE_FIELDS = ["structure", "params", "l", "trials", "seed", "successes", "estimate", "ci_low", "ci_high",
                   "analytic_exact", "analytic_float", "z", "aborted_trials"]
CONFORMANCE_FIELDS = ["structure", "law", "status", "checked", "detail"]


class UsageError(Exception):
    pass


def _quotient_widths(args) -> tuple[int, int]:
    q, r, p = args.q, args.r, args.p
    if p is not None:
        if q is None and r is None:
            q = p // 2
        if q is None:
            q = p - r
        if r is None:
            r = p - q
        if q + r != p:
            raise UsageError(f"--q {q} and --r {r} do not add up to --p {p}")
    q = 4 if q is None else q
    r = 4 if r is None else r
    return q, r


def build_structure(args) -> amq_core.Amq:
    from amqcheck.quotient import QuotientFilter

    name = args.structure
    try:
        if name in ("bloom", "blocked-bloom"):
            inner = BloomFilter(args.m, args.k)
        elif name in ("counting", "blocked-counting"):
            inner = CountingBloomFilter(args.m, args.k, args.bound)
        elif name in ("quotient", "blocked-quotient"):
            inner = QuotientFilter(*_quotient_widths(args))
        else:
            raise UsageError(f"unknown structure {name!r}")
        if name.startswith("blocked-"):
            return BlockedAmq(args.blocks, inner)
        return inner
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _params_text(amq) -> str:
    return " ".join(f"{k}={v}" for k, v in amq.params().items())


def _l_values(args) -> list[int]:
    if args.l_max is not None:
        if args.l_max < 0:
            raise UsageError("--l-max must be >= 0")
        return list(range(args.l_max + 1))
    if args.l < 0:
        raise UsageError("--l must be >= 0")
    return [args.l]


def _render(rows: list[dict], fields: list[str], fmt: str, header: dict) -> str:
    if fmt == "json":
        return json.dumps({**header, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fields})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    amq = build_structure(args)
    rows = []
    for l in _l_values(args):
        row = {"structure": amq.name, "params": _params_text(amq), "l": l, "mode": "exact",
               "exact": None, "float": None, "classic_exact": None, "classic_float": None}
        bloom_like = isinstance(amq, (BloomFilter, CountingBloomFilter))
        try:
            value = amq.false_positive(l)
            row["exact"] = format_exact(value)
            row["float"] = to_float(value)
        except FeasibilityError as exc:
            if not bloom_like:
                raise UsageError(str(exc)) from exc
            row["mode"] = "float"
            row["float"] = bloom_false_positive_float(amq.bloom_params, l)
        if bloom_like:
            classic = bloom_classic_bound(amq.bloom_params, l)
            if row["mode"] == "exact":
                row["classic_exact"] = format_exact(classic)
            row["classic_float"] = to_float(classic)
        rows.append(row)
    header = {"command": "analyze", "structure": amq.name, "params": amq.params()}
    if isinstance(amq, (BloomFilter, CountingBloomFilter)):
        header["note"] = CLASSIC_NOTE
    _emit(_render(rows, ANALYZE_FIELDS, args.format, header), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.structure not in ("bloom", "counting"):
        raise UsageError("compare needs --structure bloom or counting")
    amq = build_structure(args)
    params = BloomParams(amq.m, amq.k)
    rows = []
    for l in _l_values(args):
        try:
            exact = bloom_false_positive(params, l)
        except FeasibilityError as exc:
            raise UsageError(str(exc)) from exc
        classic = bloom_classic_bound(params, l)
        rows.append({
            "params": _params_text(amq),
            "l": l,
            "exact": format_exact(exact),
            "exact_float": to_float(exact),
            "classic_exact": format_exact(classic),
            "classic_float": to_float(classic),
            "classic_minus_exact": to_float(classic - exact),
            "bit_set_exact": format_exact(bloom_bit_set_prob(params, l)),
        })
    print(CLASSIC_NOTE, file=sys.stderr)
    header = {"command": "compare", "params": amq.params(), "note": CLASSIC_NOTE}
    _emit(_render(rows, COMPARE_FIELDS, args.format, header), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    amq = build_structure(args)
    rows = []
    try:
        for l in _l_values(args):
            oracle = harness.oracle_false_positive(amq, l, mode=args.oracle_mode)
            analytic = amq.false_positive(l)
            rows.append({"structure": amq.name, "params": _params_text(amq), "l": l,
                         "oracle_exact": format_exact(oracle), "analytic_exact": format_exact(analytic),
                         "equal": oracle == analytic})
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    header = {"command": "oracle", "structure": amq.name, "params": amq.params()}
    _emit(_render(rows, ORACLE_FIELDS, args.format, header), args.out)
    return EXIT_OK if all(r["equal"] for r in rows) else EXIT_FAIL


def cmd_simulate(args) -> int:
    amq = build_structure(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.z <= 0:
        raise UsageError("--z must be positive")
    reports = [harness.estimate_fp(amq, l, args.trials, args.seed, args.z) for l in _l_values(args)]
    rows = []
    for rep in reports:
        row = rep.to_dict()
        row["params"] = _params_text(amq)
        rows.append(row)
    if args.format == "json":
        payload = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports]}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = _render(rows, SIMULATE_FIELDS, "csv", {})
    _emit(text, args.out)
    return EXIT_OK if all(r.within_interval for r in reports) else EXIT_FAIL


def _conformance_results(amq, args) -> list[amq_core.CheckResult]:
    trials, seed = args.trials, args.seed
    results = amq_core.conformance(amq, trials=trials, seed=seed)
    tamper = (lambda s: amq.new()) if args.inject_fault else None
    results.append(harness.check_no_false_negatives(amq, args.l, trials, seed, tamper=tamper))
    if isinstance(amq, CountingBloomFilter):
        witness = amq.to_bloom_witness()
        results.append(amq_core.check_amq_map(witness, amq_core.map_scenarios(amq, trials, seed)))
        results.append(amq_core.check_trace_equivalence(witness, args.l, trials, seed))
        results.append(harness.check_counting_removal(amq, trials, seed))
        results.append(harness.check_counter_increment(amq, trials, seed))
    if isinstance(amq, BlockedAmq) and amq.blocks == 1:
        results.append(amq_core.check_trace_equivalence(amq.single_block_witness(), args.l, trials, seed))
    return results


def cmd_conformance(args) -> int:
    names = STRUCTURES if args.structure == "all" else (args.structure,)
    rows = []
    failed = False
    for name in names:
        args.structure = name
        amq = build_structure(args)
        for res in _conformance_results(amq, args):
            status = "pass" if res.passed else ("rejected" if res.rejected else "fail")
            failed |= status == "fail"
            detail = res.detail
            if res.counterexample:
                detail = (detail + " " if detail else "") + json.dumps(res.counterexample, default=repr)
            rows.append({"structure": amq.name, "law": res.name, "status": status, "checked": res.checked,
                         "detail": detail})
    header = {"command": "conformance", "seed": args.seed, "trials": args.trials}
    _emit(_render(rows, CONFORMANCE_FIELDS, args.format, header), args.out)
    for row in rows:
        if row["status"] != "pass":
            print(f"{row['status'].upper()}: {row['law']} {row['detail']}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def _default_seed() -> int:
    env = os.environ.get("AMQ_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"AMQ_SEED is not an integer: {env!r}") from None


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--structure", default="bloom")
    common.add_argument("--m", type=int, default=64, help="bits / counters per filter (per block when blocked)")
    common.add_argument("--k", type=int, default=3, help="hash functions")
    common.add_argument("--bound", type=int, default=15, help="counter bound for counting filters")
    common.add_argument("--p", type=int, default=None, help="quotient filter hash width (q + r)")
    common.add_argument("--q", type=int, default=None, help="quotient bits")
    common.add_argument("--r", type=int, default=None, help="remainder bits")
    common.add_argument("--blocks", type=int, default=4)
    common.add_argument("--l", type=int, default=10, help="number of inserts")
    common.add_argument("--l-max", type=int, default=None, help="tabulate l = 0..L_MAX instead of a single --l")
    common.add_argument("--trials", type=int, default=10_000)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="defaults to $AMQ_SEED, then 0")
    common.add_argument("--z", type=float, default=4.0, help="interval width in standard deviations")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="amqcheck", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="closed-form false-positive table")
    sub.add_parser("compare", parents=[common], help="exact Bloom formula vs classic approximation")
    p_oracle = sub.add_parser("oracle", parents=[common], help="enumeration oracle vs closed form")
    p_oracle.add_argument("--oracle-mode", choices=("merged", "replay"), default="merged")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo estimate")
    p_conf = sub.add_parser("conformance", parents=[common], help="check the AMQ laws")
    p_conf.add_argument("--inject-fault", action="store_true",
                        help="clear the filter before the no-false-negatives query (harness self-test)")
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "conformance": cmd_conformance,
}


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command != "conformance" and args.structure not in STRUCTURES:
        parser.error(f"--structure must be one of {', '.join(STRUCTURES)}")
    if args.command == "conformance" and args.structure not in STRUCTURES + ("all",):
        parser.error(f"--structure must be one of {', '.join(STRUCTURES)} or all")
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
