"""Batch front door: rank reports, densities, subvariety certificates,
filling and approximation harnesses, and deterministic sweep tables.

Exit codes:
    0  success (and, for find-sub/verify/conv-check, every flag true)
    2  parse or input-format error (also argparse usage errors)
    3  precondition violated (empty variety, oversized bad set, bad shapes)
    4  enumeration budget exceeded
    5  verification or construction failure
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import budget
from .budget import BudgetExceededError
from .construct import (
    ConstructionError,
    external_approx,
    find_subvariety,
    verify_certificate,
)
from .errors import PreconditionError, ZeroBiasError
from .forms import (
    Shape,
    analytic_rank,
    bias,
    partition_rank_bilinear,
    partition_rank_search,
    prank_lower_bound,
    zero_fiber_identity_check,
)
from .generators import (
    RunConfig,
    planted_low_prank_form,
    planted_product_variety,
    random_point_subset,
    random_variety,
)
from .jsonio import (
    FORMAT_VERSION,
    certificate_from_obj,
    certificate_to_obj,
    dump_json,
    form_from_obj,
    frac_to_str,
    load_json,
    map_from_obj,
    map_to_obj,
    variety_from_obj,
)
from .variety import Variety, conv_fill_check, density, variety_bitmap

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4
EXIT_VERIFY = 5

SWEEP_COLUMNS = (
    "seed",
    "p",
    "k",
    "dims",
    "density",
    "arank",
    "achieved_codim",
    "budget",
    "status",
    "cost_points",
)


def _emit(args, human_lines, obj):
    fmt = getattr(args, "format", "text")
    if fmt == "csv":
        raise PreconditionError("csv output applies to the sweep command only")
    if fmt == "json":
        print(json.dumps(obj, indent=2))
    else:
        for line in human_lines:
            print(line)


def _file_config(command: str, path: str) -> dict:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return {
        "command": command,
        "input_sha256": digest,
        "budget": budget.point_budget(),
        "format_version": FORMAT_VERSION,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_rank(args) -> int:
    form = form_from_obj(load_json(args.input))
    b = bias(form)
    report = {"bias": frac_to_str(b)}
    lines = [f"bias: {frac_to_str(b)}"]
    try:
        ar = analytic_rank(form)
        report["analytic_rank"] = ar.value
        lines.append(f"analytic_rank: {ar.value!r}")
        report["prank_lower_bound"] = prank_lower_bound(form)
        lines.append(f"prank_lower_bound: {report['prank_lower_bound']}")
    except ZeroBiasError:
        report["analytic_rank"] = "inf"
        lines.append("analytic_rank: inf (bias 0; single-factor support)")
    if form.is_zero():
        report["partition_rank"] = 0
        lines.append("partition_rank: 0")
    elif len(form.support) == 2:
        report["partition_rank"] = partition_rank_bilinear(form)
        lines.append(f"partition_rank: {report['partition_rank']}")
    elif len(form.support) > 2:
        result = partition_rank_search(form)
        if isinstance(result, tuple):
            report["partition_rank_interval"] = list(result)
            lines.append(f"partition_rank: in [{result[0]}, {result[1]}]")
        else:
            report["partition_rank"] = result
            lines.append(f"partition_rank: {result}")
    else:
        report["partition_rank"] = None
        lines.append("partition_rank: n/a (single-factor support)")
    if form.shape.k >= 2:
        zf = zero_fiber_identity_check(form)
        report["zero_fiber_identity"] = {
            "holds": zf.holds,
            "count": zf.zero_fiber_count,
            "expected": frac_to_str(zf.expected),
        }
        lines.append(
            f"zero_fiber_identity: {'holds' if zf.holds else 'FAILS'} "
            f"(count={zf.zero_fiber_count}, expected={frac_to_str(zf.expected)})"
        )
    _emit(args, lines, report)
    return EXIT_OK


def cmd_density(args) -> int:
    v = variety_from_obj(load_json(args.input))
    c = density(v)
    _emit(args, [f"density: {frac_to_str(c)}"], {"density": frac_to_str(c)})
    return EXIT_OK


def cmd_find_sub(args) -> int:
    v = variety_from_obj(load_json(args.input))
    cert = find_subvariety(v)
    check = verify_certificate(v, cert)
    obj = certificate_to_obj(cert, config=_file_config("find-sub", args.input))
    obj["verified"] = {
        "containment": check.containment_ok,
        "nonempty": check.nonempty_ok,
        "codim": check.codim_ok,
    }
    if args.output:
        dump_json(obj, args.output)
    summary = (
        f"density={frac_to_str(cert.input_density)} codim={cert.output_codim} "
        f"budget={cert.budget} verified={check.all_ok}"
    )
    _emit(args, [summary], obj)
    return EXIT_OK if check.all_ok else EXIT_VERIFY


def cmd_verify(args) -> int:
    v = variety_from_obj(load_json(args.input))
    cert = certificate_from_obj(load_json(args.certificate))
    check = verify_certificate(v, cert)
    lines = [
        f"containment: {check.containment_ok}",
        f"nonempty: {check.nonempty_ok}",
        f"codim_within_budget: {check.codim_ok}",
    ]
    obj = {
        "containment": check.containment_ok,
        "nonempty": check.nonempty_ok,
        "codim": check.codim_ok,
        "budget": check.budget,
    }
    _emit(args, lines, obj)
    return EXIT_OK if check.all_ok else EXIT_VERIFY


def cmd_conv_check(args) -> int:
    v = variety_from_obj(load_json(args.input))
    rng = random.Random(args.seed)
    mask = variety_bitmap(v)
    k = v.shape.k
    r = v.codim
    cap = Fraction(v.shape.total_points, 2 ** (2 * k) * v.shape.p ** (k * r))
    allowed = min(int(cap), int(np.count_nonzero(mask)))
    count = allowed if args.bad_count is None else args.bad_count
    bad = random_point_subset(rng, v.shape, mask, count)
    report = conv_fill_check(v, bad)
    lines = [
        f"codim: {report.codim}",
        f"bad_size: {report.bad_size} (cap {report.bad_cap})",
        f"points_checked: {report.checked}",
        f"corners_checked: {report.corners_checked}",
        f"success: {report.success}",
    ]
    obj = {
        "codim": report.codim,
        "bad_size": report.bad_size,
        "bad_cap": frac_to_str(report.bad_cap),
        "points_checked": report.checked,
        "corners_checked": report.corners_checked,
        "failures": [str(f) for f in report.failures],
        "success": report.success,
    }
    _emit(args, lines, obj)
    return EXIT_OK if report.success else EXIT_VERIFY


def cmd_approx(args) -> int:
    source = map_from_obj(load_json(args.input))
    result = external_approx(source, args.s)
    lines = [
        f"functionals: {args.s}",
        f"error_count: {result.error_count} (cap {result.error_cap})",
        f"containment: {result.containment_checked}",
    ]
    obj = {
        "s": args.s,
        "error_count": result.error_count,
        "error_cap": frac_to_str(result.error_cap),
        "containment": result.containment_checked,
        "survivors_per_step": list(result.survivors_per_step),
        "phi": map_to_obj(result.phi),
    }
    if args.output:
        payload = dict(obj)
        payload["config"] = _file_config("approx", args.input)
        dump_json(payload, args.output)
    _emit(args, lines, obj)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def _split_codim(rng: random.Random, dims, total: int) -> list[int]:
    out = [0] * len(dims)
    if total > sum(dims):
        raise PreconditionError(f"total codimension {total} exceeds {sum(dims)}")
    while sum(out) < total:
        i = rng.randrange(len(dims))
        if out[i] < dims[i]:
            out[i] += 1
    return out


def _sweep_rows(config: RunConfig):
    dims = config.dims
    shape = Shape(config.p, dims)
    if config.generator == "product":
        plan = [("product", t) for t in config.params["logdensities"]]
    elif config.generator == "random-forms":
        plan = [("random-forms", config.params["forms"]) for _ in range(config.params["count"])]
    elif config.generator == "low-prank":
        plan = [("low-prank", config.params["terms"]) for _ in range(config.params["count"])]
    else:
        raise PreconditionError(f"unknown sweep generator {config.generator!r}")
    for index, (kind, param) in enumerate(plan):
        rng = random.Random(config.seed + index)
        row = {
            "seed": config.seed + index,
            "p": config.p,
            "k": config.k,
            "dims": "x".join(str(n) for n in dims),
        }
        budget.reset_work()
        try:
            if kind == "product":
                v, _ = planted_product_variety(rng, shape, _split_codim(rng, dims, param))
            elif kind == "low-prank":
                v = Variety(shape, (planted_low_prank_form(rng, shape, param),))
            else:
                v = random_variety(rng, shape, param)
            c = density(v)
            cert = find_subvariety(v)
            check = verify_certificate(v, cert)
            row["density"] = frac_to_str(c)
            row["arank"] = repr(float(math.log(c.denominator / c.numerator, config.p)))
            row["achieved_codim"] = cert.output_codim
            row["budget"] = cert.budget
            row["status"] = "ok" if check.all_ok else "verify_failed"
        except BudgetExceededError:
            row["status"] = "budget_exceeded"
        row["cost_points"] = budget.work_points()
        yield row


def cmd_sweep(args) -> int:
    if args.format == "json":
        raise PreconditionError("sweep output is csv")
    dims = tuple(int(x) for x in args.dims.split(","))
    params = {}
    if args.gen == "product":
        if not args.logdensities:
            raise PreconditionError("product sweeps need --logdensities")
        params["logdensities"] = [int(x) for x in args.logdensities.split(",")]
    elif args.gen == "low-prank":
        params["count"] = args.count
        params["terms"] = args.terms
    else:
        params["count"] = args.count
        params["forms"] = args.forms
    config = RunConfig(
        seed=args.seed,
        p=args.p,
        k=len(dims),
        dims=dims,
        generator=args.gen,
        params=params,
        budget=budget.point_budget(),
    )
    header_comment = "# mlvariety-sweep format=" + FORMAT_VERSION + " config=" + json.dumps(
        config.to_obj(), sort_keys=True, separators=(",", ":")
    )
    lines = [header_comment, ",".join(SWEEP_COLUMNS)]
    for row in _sweep_rows(config):
        lines.append(",".join(str(row.get(col, "")) for col in SWEEP_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlvariety",
        description="Exact-arithmetic calculus of multilinear forms and varieties over F_p",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None, help="point budget override")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--output", default=None, help="output file path")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rank = sub.add_parser("rank", parents=[common], help="bias and rank report for a form")
    p_rank.add_argument("--input", required=True)
    p_rank.set_defaults(func=cmd_rank)

    p_density = sub.add_parser("density", parents=[common], help="exact density of a variety")
    p_density.add_argument("--input", required=True)
    p_density.set_defaults(func=cmd_density)

    p_find = sub.add_parser("find-sub", parents=[common], help="extract a certified subvariety")
    p_find.add_argument("--input", required=True)
    p_find.set_defaults(func=cmd_find_sub)

    p_verify = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    p_verify.add_argument("--input", required=True, help="variety file")
    p_verify.add_argument("--certificate", required=True, help="certificate file")
    p_verify.set_defaults(func=cmd_verify)

    p_conv = sub.add_parser("conv-check", parents=[common], help="filling-witness harness")
    p_conv.add_argument("--input", required=True)
    p_conv.add_argument("--seed", type=int, default=0)
    p_conv.add_argument("--bad-count", type=int, default=None)
    p_conv.set_defaults(func=cmd_conv_check)

    p_approx = sub.add_parser("approx", parents=[common], help="external approximation harness")
    p_approx.add_argument("--input", required=True, help="multilinear map file")
    p_approx.add_argument("--s", type=int, required=True, help="number of functionals")
    p_approx.set_defaults(func=cmd_approx)

    p_sweep = sub.add_parser("sweep", parents=[common], help="deterministic instance sweep CSV")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--p", type=int, default=2)
    p_sweep.add_argument("--dims", required=True, help="comma-separated factor dimensions")
    p_sweep.add_argument("--gen", choices=["product", "random-forms", "low-prank"],
                         default="product")
    p_sweep.add_argument("--logdensities", default=None,
                         help="comma-separated planted log_p(1/density) values")
    p_sweep.add_argument("--count", type=int, default=0, help="rows for random generators")
    p_sweep.add_argument("--forms", type=int, default=2, help="forms per random variety")
    p_sweep.add_argument("--terms", type=int, default=2,
                         help="factorizable summands per planted low-prank form")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is not None:
        budget.set_point_budget(args.budget)
    try:
        return args.func(args)
    except (json.JSONDecodeError, KeyError, TypeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConstructionError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
