"""Command-line front end.

Commands mirror the library surface: ``fit``, ``scan``, ``analyze``,
``compare``, ``sample``, ``ci-study``, ``contour``, ``ridge``, and
``slope-threshold``. Data output (JSON by default, RFC-4180 CSV with
``--format csv``) goes to stdout or ``--output``; diagnostics go to
stderr only. Every command is deterministic given its flags: anything
random is driven by ``--seed`` (default 42).

Exit codes: 0 success, 1 usage, 2 I/O, 3 degenerate data, 4 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import simulation
from .comparison import FIRST, SECOND, lrt_test, vuong_test
from .dataset import load_counts, truncate
from .errors import (
    EXIT_IO,
    EXIT_OK,
    CitefitError,
    DegenerateDataError,
    InternalConsistencyError,
    UsageError,
)
from .fitting import FitResult, fit_kind, scan_x_min
from .kernels import (
    DiscreteDistribution,
    DiscreteLognormalParams,
    HookedPowerLawParams,
    ParamSpec,
    PowerLawParams,
)

DEFAULT_SEED = 42
KINDS = ("pl", "ln", "hooked")

#: Full-protocol defaults for the precision studies, plus a desk-scale preset.
FULL_REPLICATES = 500
DESK_REPLICATES = 100
DEFAULT_ALPHA_GRID = "2,3,4,5,6,7,8,9,10"
DEFAULT_N_GRID = "500,1000,2000,4000"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _diag(message: str):
    print(message, file=sys.stderr)


def parse_axis(text: str) -> list[float]:
    """Axis spec: comma list ("2,6,10") or inclusive range ("2:10:0.5")."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range spec must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("range step must be positive")
        values = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-9:
                break
            values.append(round(v, 12))
            k += 1
        return values
    try:
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise UsageError(f"could not parse axis {text!r}") from None


def _build_params(args) -> ParamSpec:
    if args.dist == "pl":
        if args.alpha is None:
            raise UsageError("--alpha is required for the power law")
        return PowerLawParams(args.alpha)
    if args.dist == "hooked":
        if args.alpha is None:
            raise UsageError("--alpha is required for the hooked power law")
        return HookedPowerLawParams(args.alpha, args.B)
    if args.mu is None or args.sigma is None:
        raise UsageError("--mu and --sigma are required for the lognormal")
    return DiscreteLognormalParams(args.mu, args.sigma)


def _params_fields(params: ParamSpec) -> dict:
    if isinstance(params, PowerLawParams):
        return {"alpha": params.alpha}
    if isinstance(params, HookedPowerLawParams):
        return {"alpha": params.alpha, "B": params.B}
    return {"mu": params.mu, "sigma": params.sigma}


def _fit_report(kind: str, fit: FitResult) -> dict:
    return {
        "kind": kind,
        "x_min": fit.x_min,
        "n_tail": fit.n_tail,
        "params": _params_fields(fit.params),
        "neg_log_likelihood": fit.neg_log_likelihood,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "gradient_norm_at_exit": fit.gradient_norm_at_exit,
    }


def _flatten_fit(report: dict) -> dict:
    flat = dict(report)
    params = flat.pop("params")
    for key, value in params.items():
        flat[f"param_{key}"] = value
    return flat


# ---------------------------------------------------------------- commands


def cmd_fit(args):
    data = load_counts(args.input, args.input_format)
    view = truncate(data, args.x_min)
    kinds = KINDS if args.dist == "all" else (args.dist,)
    reports = []
    for kind in kinds:
        fit = fit_kind(view, kind)
        if not fit.converged:
            _diag(f"warning: {kind} fit did not converge "
                  f"(gradient norm {fit.gradient_norm_at_exit:.3g})")
        report = _fit_report(kind, fit)
        report["source"] = data.source_label
        report["zeros_dropped"] = data.zeros_dropped
        reports.append(report)
    payload = reports[0] if len(reports) == 1 else reports
    return payload, [_flatten_fit(r) for r in reports]


def cmd_scan(args):
    data = load_counts(args.input, args.input_format)
    candidates = (
        [int(v) for v in parse_axis(args.x_min_range)]
        if args.x_min_range
        else sorted(set(data.counts))
    )
    result = scan_x_min(data, args.dist, candidates)
    entries = []
    for entry in result.per_xmin:
        row = _flatten_fit(_fit_report(args.dist, entry.fit))
        row["selection_score"] = entry.selection_score
        row["best"] = entry.x_min == result.best_x_min
        entries.append(row)
    payload = {
        "source": data.source_label,
        "dist": args.dist,
        "best_x_min": result.best_x_min,
        "entries": entries,
    }
    return payload, entries


def cmd_compare(args):
    data = load_counts(args.input, args.input_format)
    view = truncate(data, args.x_min)
    names = (args.first, args.second)
    fits = {name: fit_kind(view, name) for name in set(names)}
    if set(names) == {"pl", "hooked"}:
        outcome = lrt_test(fits["pl"], fits["hooked"])
        better_name = {FIRST: "pl", SECOND: "hooked"}.get(outcome.better, "neither")
    else:
        outcome = vuong_test(fits[names[0]], fits[names[1]], view)
        better_name = {FIRST: names[0], SECOND: names[1]}.get(outcome.better, "neither")
    row = {
        "source": data.source_label,
        "first": names[0],
        "second": names[1],
        "test": outcome.kind,
        "x_min": view.x_min,
        "n": outcome.n,
        "statistic": outcome.statistic,
        "threshold_05": outcome.threshold_05,
        "threshold_01": outcome.threshold_01,
        "better": better_name,
        "significant_05": outcome.significant_05,
        "degenerate": outcome.degenerate,
    }
    return row, [row]


def cmd_analyze(args):
    data = load_counts(args.input, args.input_format)
    flags = []
    if args.x_min == "all":
        policy, x_min = "all-cited", 1
    elif args.x_min == "scan":
        policy = f"scan-{args.scan_dist}"
        candidates = (
            [int(v) for v in parse_axis(args.x_min_range)]
            if args.x_min_range
            else sorted(set(data.counts))
        )
        x_min = scan_x_min(data, args.scan_dist, candidates).best_x_min
    else:
        try:
            x_min = int(args.x_min)
        except ValueError:
            raise UsageError(f"--x-min must be an integer, 'scan', or 'all', got {args.x_min!r}") from None
        policy = "fixed"
    view = truncate(data, x_min)

    fits: dict[str, FitResult | None] = {}
    for kind in KINDS:
        try:
            fits[kind] = fit_kind(view, kind)
            if not fits[kind].converged:
                flags.append(f"{kind}:non-convergent")
                _diag(f"warning: {kind} fit did not converge")
        except DegenerateDataError as exc:
            fits[kind] = None
            flags.append(f"{kind}:degenerate")
            _diag(f"warning: {kind} fit degenerate: {exc}")

    def stat_or_none(first, second, test):
        if fits[first] is None or fits[second] is None:
            return None
        try:
            if test == "vuong":
                return vuong_test(fits[first], fits[second], view).statistic
            return lrt_test(fits[first], fits[second]).statistic
        except InternalConsistencyError as exc:
            flags.append(f"{test}({first},{second}):inconsistent")
            _diag(f"warning: {exc}")
            return None

    def param(kind, name):
        fit = fits[kind]
        return None if fit is None else getattr(fit.params, name)

    def neg_ll(kind):
        fit = fits[kind]
        return None if fit is None else fit.neg_log_likelihood

    row = {
        "source": data.source_label,
        "policy": policy,
        "x_min": x_min,
        "n_tail": view.n_tail,
        "zeros_dropped": data.zeros_dropped,
        "pl_alpha": param("pl", "alpha"),
        "ln_mu": param("ln", "mu"),
        "ln_sigma": param("ln", "sigma"),
        "hooked_alpha": param("hooked", "alpha"),
        "hooked_b": param("hooked", "B"),
        "neg_ll_pl": neg_ll("pl"),
        "neg_ll_ln": neg_ll("ln"),
        "neg_ll_hooked": neg_ll("hooked"),
        "vuong_pl_ln": stat_or_none("pl", "ln", "vuong"),
        "vuong_ln_hooked": stat_or_none("ln", "hooked", "vuong"),
        "lrt_hooked_pl": stat_or_none("pl", "hooked", "lrt"),
        "flags": ";".join(flags),
    }
    return row, [row]


def cmd_sample(args):
    dist = DiscreteDistribution(_build_params(args), args.x_min)
    values = [int(v) for v in dist.sample(args.n, args.seed)]
    return values, [{"value": v} for v in values]


def cmd_ci_study(args):
    replicates = args.replicates
    if replicates is None:
        replicates = DESK_REPLICATES if args.preset == "desk" else FULL_REPLICATES
    if args.kind in ("hooked", "pl"):
        grid = simulation.ci_width_study(
            args.kind,
            parse_axis(args.alpha_grid),
            [int(v) for v in parse_axis(args.n_grid)],
            replicates=replicates,
            seed=args.seed,
            B=args.B,
        )
        _warn_flagged(grid)
        return grid.to_json_dict(), grid.to_rows()
    if args.mu_grid is None or args.sigma_grid is None:
        raise UsageError("--mu-grid and --sigma-grid are required for the lognormal study")
    mu_grid, sigma_grid = simulation.lognormal_ci_study(
        parse_axis(args.mu_grid),
        parse_axis(args.sigma_grid),
        n=args.n,
        replicates=replicates,
        seed=args.seed,
    )
    _warn_flagged(mu_grid)
    payload = {"mu": mu_grid.to_json_dict(), "sigma": sigma_grid.to_json_dict()}
    return payload, mu_grid.to_rows() + sigma_grid.to_rows()


def _warn_flagged(grid):
    flagged = sum(f for row in grid.flagged for f in row)
    if flagged:
        _diag(f"warning: {flagged} cell(s) excluded more than 10% of replicates")


def cmd_contour(args):
    data = load_counts(args.input, args.input_format)
    view = truncate(data, args.x_min)
    grid = simulation.ll_contour(view, args.kind, parse_axis(args.p1), parse_axis(args.p2))
    if grid.invalid_cells:
        _diag(f"warning: {grid.invalid_cells} grid cell(s) fell outside the parameter domain")
    return grid.to_json_dict(), grid.to_rows()


def cmd_ridge(args):
    report = simulation.ridge_demo(args.alpha, args.B, n=args.n, seed=args.seed)
    if not report.fit_converged:
        _diag("warning: hooked fit did not converge")
    payload = report.to_json_dict()
    row = {
        "true_alpha": report.true_alpha,
        "true_B": report.true_B,
        "fitted_alpha": report.fitted_alpha,
        "fitted_B": report.fitted_B,
        "neg_ll_true": report.neg_ll_true,
        "neg_ll_fitted": report.neg_ll_fitted,
        "neg_ll_hybrid": report.neg_ll_hybrid,
        "fit_converged": report.fit_converged,
    }
    return payload, [row]


def cmd_slope_threshold(args):
    value = simulation.slope_tolerance_threshold(args.tolerance, args.B)
    if value == int(value):
        value = int(value)
    return value, [{"threshold": value}]


# ---------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="citefit", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, **kwargs):
        p = sub.add_parser(name, help=help_text, **kwargs)
        p.set_defaults(handler=handler)
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="output format (default json)")
        p.add_argument("--output", default=None, help="write output here instead of stdout")
        return p

    def add_input(p):
        p.add_argument("--input", required=True, help="count file to read")
        p.add_argument("--input-format", choices=("plain", "csv"), default="plain",
                       help="input file format (default plain: one integer per line)")

    p = add("fit", cmd_fit, "fit one distribution (or all three) to a count file")
    add_input(p)
    p.add_argument("--dist", choices=KINDS + ("all",), required=True)
    p.add_argument("--x-min", type=int, default=1)

    p = add("scan", cmd_scan, "scan truncation points and keep the best fit")
    add_input(p)
    p.add_argument("--dist", choices=KINDS, required=True)
    p.add_argument("--x-min-range", default=None,
                   help="candidate x_min values (list or start:stop:step); "
                        "default: every distinct observed count")

    p = add("analyze", cmd_analyze, "fit all three distributions and compare them")
    add_input(p)
    p.add_argument("--x-min", default="all",
                   help="truncation policy: an integer, 'scan', or 'all' (default)")
    p.add_argument("--scan-dist", choices=KINDS, default="pl",
                   help="distribution driving the scan policy (default pl)")
    p.add_argument("--x-min-range", default=None, help="candidates for the scan policy")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("compare", cmd_compare, "pairwise test between two fitted distributions")
    add_input(p)
    p.add_argument("--first", choices=KINDS, required=True)
    p.add_argument("--second", choices=KINDS, required=True)
    p.add_argument("--x-min", type=int, default=1)

    p = add("sample", cmd_sample, "draw from a distribution")
    p.add_argument("--dist", choices=KINDS, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--x-min", type=int, default=1)
    p.add_argument("-n", "--n", type=int, required=True, help="number of draws")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("ci-study", cmd_ci_study, "Monte-Carlo precision study of fitted parameters")
    p.add_argument("--kind", choices=("hooked", "pl", "ln"), required=True)
    p.add_argument("--alpha-grid", default=DEFAULT_ALPHA_GRID)
    p.add_argument("--n-grid", default=DEFAULT_N_GRID)
    p.add_argument("--B", type=float, default=simulation.DEFAULT_HOOKED_B,
                   help="generator offset for the hooked study (default 10)")
    p.add_argument("--mu-grid", default=None)
    p.add_argument("--sigma-grid", default=None)
    p.add_argument("--n", type=int, default=500, help="sample size for the lognormal study")
    p.add_argument("--replicates", type=int, default=None,
                   help=f"replicates per cell (default {FULL_REPLICATES}, "
                        f"or {DESK_REPLICATES} with --preset desk)")
    p.add_argument("--preset", choices=("full", "desk"), default="full")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("contour", cmd_contour, "negative log-likelihood grid over two parameters")
    add_input(p)
    p.add_argument("--kind", choices=("hooked", "ln"), required=True)
    p.add_argument("--x-min", type=int, default=1)
    p.add_argument("--p1", required=True, help="first-parameter axis (alpha or mu)")
    p.add_argument("--p2", required=True, help="second-parameter axis (B or sigma)")

    p = add("ridge", cmd_ridge, "sample, fit, and evaluate the alpha/B trade-off once")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--B", type=float, default=simulation.DEFAULT_HOOKED_B)
    p.add_argument("-n", "--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("slope-threshold", cmd_slope_threshold,
            "citation count where the log-log slope reaches the exponent")
    p.add_argument("--tolerance", "-T", type=float, required=True,
                   help="relative slope tolerance in (0, 1)")
    p.add_argument("--B", type=float, required=True)

    return parser


def _sanitize(obj):
    """NaN is not valid JSON; report it as null."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _emit(payload, rows, args):
    if args.format == "json":
        text = json.dumps(_sanitize(payload), indent=2, allow_nan=False) + "\n"
    else:
        rows = [_sanitize(r) for r in rows]
        fieldnames = []
        for row in rows:
            for key in row:
                if key not in fieldnames:
                    fieldnames.append(key)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
        text = buffer.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload, rows = args.handler(args)
        _emit(payload, rows, args)
        return EXIT_OK
    except CitefitError as exc:
        _diag(f"error: {exc}")
        return exc.exit_code
    except OSError as exc:
        _diag(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
