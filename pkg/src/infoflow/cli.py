"""Command line interface: flows, audits, traces, sweeps, example models.

Exit codes: 0 success, 1 malformed model file, 2 audit failure, 64 usage
error.  All output is deterministic for fixed arguments (including --seed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .channel import Model, ModelFormatError, load_model, save_model
from .families import (
    classical_family,
    extension_family,
    reduction_family,
    trace_family,
)
from .measures import LOG2, chain_decomposition, verify_model
from .partitions import Partition
from .sampling import random_model
from .scenarios import SweepSpec, run_sweep, scenario_model

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_AUDIT = 2
EXIT_USAGE = 64

FAMILY_BUILDERS = {
    "extension": extension_family,
    "reduction": reduction_family,
    "classical": classical_family,
    "raw-trace": trace_family,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_order(text: str, n: int) -> list[frozenset[int]]:
    """Ordering grammar: groups separated by ';', members by ','; members
    are X<j> or plain 1-based indices, e.g. 'X1;X2,X3'."""
    groups = []
    for chunk in text.split(";"):
        members = set()
        for token in chunk.split(","):
            token = token.strip()
            if token[:1] in ("X", "x"):
                token = token[1:]
            if not token.isdigit():
                raise UsageError(f"bad ordering token {token!r}")
            index = int(token) - 1
            if not 0 <= index < n:
                raise UsageError(f"input X{token} out of range (model has {n} inputs)")
            members.add(index)
        if not members:
            raise UsageError("empty ordering group")
        groups.append(frozenset(members))
    seen: set[int] = set()
    for g in groups:
        if seen & g:
            raise UsageError("ordering groups overlap")
        seen |= g
    return groups


def parse_gamma(text: str, model: Model) -> Partition:
    """Output partition grammar: blocks separated by ';', labels by ','."""
    label_to_index = {lab: i for i, lab in enumerate(model.out.labels)}
    blocks = []
    for chunk in text.split(";"):
        block = []
        for token in chunk.split(","):
            token = token.strip()
            if token not in label_to_index:
                raise UsageError(f"unknown output label {token!r}")
            block.append(label_to_index[token])
        blocks.append(block)
    try:
        return Partition.from_blocks(model.out, blocks)
    except ValueError as exc:
        raise UsageError(f"--gamma is not a partition of the output: {exc}") from exc


def parse_betas(text: str) -> list[float]:
    """Comma-separated values, or an inclusive 'start:stop:step' range."""
    try:
        if ":" in text:
            start, stop, step = (float(tok) for tok in text.split(":"))
            if step <= 0:
                raise UsageError("beta range step must be positive")
            values = []
            i = 0
            while (value := start + i * step) <= stop + 1e-12:
                values.append(value)
                i += 1
            if not values:
                raise UsageError("empty beta range")
            return values
        return [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --betas value {text!r}") from exc


def _resolve_model(args, need_model: bool = True) -> Model:
    if args.model is not None and args.scenario is not None:
        raise UsageError("give either --model or --scenario, not both")
    if args.model is not None:
        model = load_model(args.model)
    elif args.scenario is not None:
        model = scenario_model(args.scenario, beta=args.beta, n=args.n, k=args.k)
    elif need_model:
        raise UsageError("one of --model or --scenario is required")
    else:
        return None
    if getattr(args, "gamma_spec", None):
        gamma = parse_gamma(args.gamma_spec, model)
        model = Model(model.mu, model.nu, gamma, model.tol)
    if args.tol is not None:
        model = Model(model.mu, model.nu, model.gamma, args.tol)
    return model


def _write_out(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _format_flow(report, fmt: str, bits: bool) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(bits=bits), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(report.to_csv_rows(bits=bits))
        return buf.getvalue()
    data = report.to_dict(bits=bits)
    width = max(len(t["label"]) for t in data["terms"]) + 2
    lines = [f"family: {data['family']}    unit: {data['unit']}"]
    for step, term in enumerate(data["terms"], start=1):
        lines.append(f"  {step}  {term['label']:<{width}} {term['value']!r}")
    lines.append(f"  total    {data['total']!r}")
    lines.append(f"  residual {data['residual']!r}")
    return "\n".join(lines) + "\n"


def cmd_flow(args) -> int:
    model = _resolve_model(args)
    family = FAMILY_BUILDERS[args.family](model)
    if args.order is not None:
        ordering = parse_order(args.order, model.n_inputs)
    else:
        ordering = [frozenset({i}) for i in range(model.n_inputs)]
    report = chain_decomposition(model, family, ordering)
    _write_out(_format_flow(report, args.format, args.bits), args.out)
    return EXIT_OK


def cmd_traces(args) -> int:
    model = _resolve_model(args)
    family = FAMILY_BUILDERS[args.family](model)
    _write_out(json.dumps(family.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.random is not None:
        if args.model is not None or args.scenario is not None:
            raise UsageError("--random cannot be combined with --model/--scenario")
        rng = np.random.default_rng(args.seed)
        models = [
            random_model(rng, max_inputs=args.n) for _ in range(args.random)
        ]
    else:
        models = [_resolve_model(args)]

    lines = []
    failed = 0
    for index, model in enumerate(models):
        family = FAMILY_BUILDERS[args.family](model)
        report = verify_model(model, family)
        for result in report.failures():
            failed += 1
            lines.append(
                f"model {index}: check {result.check_id} FAILED — {result.message}"
            )
    total_checks = len(models)
    if failed:
        lines.append(f"verify: FAILED ({failed} failing checks over {total_checks} models)")
    else:
        lines.append(f"verify: ok ({total_checks} models, family '{args.family}')")
    _write_out("\n".join(lines) + "\n", args.out)
    return EXIT_AUDIT if failed else EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        scenario=args.scenario,
        betas=tuple(parse_betas(args.betas)),
        quantities=tuple(args.quantities.split(",")) if args.quantities else (),
        n=args.n,
        k=args.k,
    )
    rows = run_sweep(spec)
    scale = 1.0 / LOG2 if args.bits else 1.0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["beta", "quantity", "value"])
    for beta, quantity, value in rows:
        writer.writerow([repr(beta), quantity, repr(value * scale)])
    _write_out(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_example(args) -> int:
    model = scenario_model(args.scenario, beta=args.beta, n=args.n, k=args.k)
    save_model(model, args.out)
    return EXIT_OK


def _add_model_args(sub, need_scenario: bool = False) -> None:
    sub.add_argument("--model", help="path to a model JSON file")
    sub.add_argument(
        "--scenario",
        choices=("copy", "transfer", "sum"),
        required=need_scenario,
        help="built-in scenario id",
    )
    sub.add_argument("--beta", type=float, default=0.0, help="scenario coupling strength")
    sub.add_argument("--n", type=int, default=3, help="sum scenario: number of inputs")
    sub.add_argument("--k", type=int, default=2, help="sum scenario: alphabet size")
    sub.add_argument("--tol", type=float, default=None, help="row-equality tolerance override")
    sub.add_argument(
        "--gamma",
        dest="gamma_spec",
        default=None,
        help="output partition, blocks ';'-separated, labels ','-separated",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infoflow", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    flow = subs.add_parser("flow", help="chain-rule flow decomposition")
    _add_model_args(flow)
    flow.add_argument("--family", choices=sorted(FAMILY_BUILDERS), default="extension")
    flow.add_argument("--order", default=None, help="e.g. 'X1;X2,X3' (groups ';', members ',')")
    flow.add_argument("--format", choices=("table", "json", "csv"), default="table")
    flow.add_argument("--bits", action="store_true", help="report values in bits")
    flow.add_argument("--out", default=None)
    flow.set_defaults(func=cmd_flow)

    traces = subs.add_parser("traces", help="dump a partition family as JSON")
    _add_model_args(traces)
    traces.add_argument("--family", choices=sorted(FAMILY_BUILDERS), default="extension")
    traces.add_argument("--out", default=None)
    traces.set_defaults(func=cmd_traces)

    verify = subs.add_parser("verify", help="chain-rule and property audit")
    _add_model_args(verify)
    verify.add_argument("--family", choices=sorted(FAMILY_BUILDERS), default="extension")
    verify.add_argument("--random", type=int, default=None, help="audit this many random models")
    verify.add_argument("--seed", type=int, default=0, help="random model seed")
    verify.add_argument("--out", default=None)
    verify.set_defaults(func=cmd_verify)

    sweep = subs.add_parser("sweep", help="evaluate quantities over a beta grid (CSV)")
    sweep.add_argument("--scenario", choices=("copy", "transfer", "sum"), required=True)
    sweep.add_argument("--betas", required=True, help="comma list or start:stop:step")
    sweep.add_argument("--quantities", default=None, help="comma list of quantity ids")
    sweep.add_argument("--n", type=int, default=3)
    sweep.add_argument("--k", type=int, default=2)
    sweep.add_argument("--bits", action="store_true")
    sweep.add_argument("--out", default=None)
    sweep.set_defaults(func=cmd_sweep)

    example = subs.add_parser("example", help="write a scenario model file")
    example.add_argument("--scenario", choices=("copy", "transfer", "sum"), required=True)
    example.add_argument("--beta", type=float, default=0.0)
    example.add_argument("--n", type=int, default=3)
    example.add_argument("--k", type=int, default=2)
    example.add_argument("--out", required=True)
    example.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"infoflow: error: {exc}\n")
        return EXIT_USAGE
    except ModelFormatError as exc:
        sys.stderr.write(f"infoflow: bad model: {exc}\n")
        return EXIT_MODEL
    except OSError as exc:
        sys.stderr.write(f"infoflow: {exc}\n")
        return EXIT_MODEL


def entry() -> None:
    sys.exit(main())
