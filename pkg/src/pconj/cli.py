"""Command-line surface: combine user-supplied values, run experiments.

Subcommands:
    combine      combine p-values for a replicability target
    combine-e    merge e-values for a replicability target
    power        rejection rate per (pattern, method), plus relative power
    gamma-sweep  power across replicability targets gamma
    null-ecdf    rejection rate at alpha as zeros turn conservative
    ecdf-curve   full empirical cdf of the combined p-value
    patterns     dump the signal-pattern catalog

Experiment subcommands accept either a named --preset or an explicit
flag set (--model, --pattern/--base, --r, --gamma, ...).  Results land
in CSV or JSON files whose header records the resolved configuration;
reruns with the same flags and seed are byte-identical, whatever the
worker count.  Exit codes: 0 success, 2 usage, 3 unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .combiners import P_METHODS, partial_conjunction_p
from .evalues import e_to_p, partial_conjunction_e
from .models import DEFAULT_SIGMA, EvidencePattern, find_pattern, pattern_catalog
from .presets import BASES, CURVE_METHODS, DISPLAY_METHODS, PRESETS, Preset, preset_names
from .sim import (
    METHOD_CODES,
    ExperimentConfig,
    gamma_sweep,
    relative_power,
    run_ecdf_curve,
    run_null_ecdf,
    run_power,
    weaken_pattern,
)
from .svgplot import Series, render_line_chart

__all__ = ["main"]

OUTPUT_DIR_ENV = "PCONJ_OUTPUT_DIR"

_DEFAULT_GRID_SPEC = "0.01:0.99:0.01"


class _UsageError(Exception):
    pass


class _OutputError(Exception):
    pass


# ---------------------------------------------------------------- parsing

def _parse_float_token(token: str, what: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise _UsageError(f"invalid {what} {token!r}") from None
    if math.isnan(v):
        raise _UsageError(f"invalid {what} {token!r}")
    return v


def _parse_prob_list(text: str) -> list[float]:
    out = []
    for token in text.split(","):
        token = token.strip()
        v = _parse_float_token(token, "probability")
        if not 0.0 <= v <= 1.0:
            raise _UsageError(f"invalid probability {token!r}: must lie in [0, 1]")
        out.append(v)
    return out


def _parse_evalue_list(text: str) -> list[float]:
    out = []
    for token in text.split(","):
        token = token.strip()
        v = _parse_float_token(token, "e-value")
        if v < 0.0:
            raise _UsageError(f"invalid e-value {token!r}: must be >= 0")
        out.append(v)
    return out


def _parse_int_token(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise _UsageError(f"invalid {what} {token!r}") from None


def _parse_int_spec(text: str, what: str) -> list[int]:
    """Parse "3", "1,4", or "0..5" (inclusive range)."""
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo = _parse_int_token(lo_s.strip(), what)
        hi = _parse_int_token(hi_s.strip(), what)
        if hi < lo:
            raise _UsageError(f"invalid {what} range {text!r}: end below start")
        return list(range(lo, hi + 1))
    return [_parse_int_token(t.strip(), what) for t in text.split(",")]


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"invalid grid {text!r}: expected start:stop:step")
    start = _parse_float_token(parts[0], "grid bound")
    stop = _parse_float_token(parts[1], "grid bound")
    step = _parse_float_token(parts[2], "grid step")
    if step <= 0.0 or stop < start:
        raise _UsageError(f"invalid grid {text!r}")
    n = int(round((stop - start) / step))
    pts = [round(start + i * step, 12) for i in range(n + 1)]
    pts = [t for t in pts if t <= stop + 1e-12]
    if any(not 0.0 <= t <= 1.0 for t in pts):
        raise _UsageError(f"invalid grid {text!r}: thresholds must lie in [0, 1]")
    return pts


def _parse_methods(text: str) -> tuple[str, ...]:
    names = tuple(t.strip() for t in text.split(","))
    for name in names:
        if name not in METHOD_CODES:
            raise _UsageError(
                f"unknown method {name!r}; expected one of {', '.join(sorted(METHOD_CODES))}"
            )
    if len(set(names)) != len(names):
        raise _UsageError("duplicate method names")
    return names


def _parse_patterns(text: str, strength: float) -> list[EvidencePattern]:
    labels = [t.strip() for t in text.split(",")]
    out = []
    for label in labels:
        try:
            out.append(find_pattern(label, strength))
        except KeyError:
            valid = ", ".join(p.label for p in pattern_catalog(1.0))
            raise _UsageError(f"unknown pattern {label!r}; expected one of {valid}") from None
    return out


# ---------------------------------------------------------------- output

def _output_dir(args) -> str:
    return args.out or os.environ.get(OUTPUT_DIR_ENV) or "."


def _write_bytes(path: str, data: bytes) -> None:
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc}") from None


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render_csv(header_pairs, fieldnames, rows) -> bytes:
    buf = io.StringIO()
    for k, v in header_pairs:
        buf.write(f"# {k}={v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def _render_json(header_pairs, fieldnames, rows) -> bytes:
    doc = {
        "config": {k: v for k, v in header_pairs},
        "rows": [dict(zip(fieldnames, row)) for row in rows],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def _emit_table(args, stem: str, header_pairs, fieldnames, rows) -> str:
    out_dir = _output_dir(args)
    if args.format == "json":
        path = os.path.join(out_dir, f"{stem}.json")
        _write_bytes(path, _render_json(header_pairs, fieldnames, rows))
    else:
        path = os.path.join(out_dir, f"{stem}.csv")
        _write_bytes(path, _render_csv(header_pairs, fieldnames, rows))
    print(path)
    return path


def _emit_svg(args, name: str, text: str) -> str:
    path = os.path.join(_output_dir(args), name)
    _write_bytes(path, text.encode("utf-8"))
    print(path)
    return path


# ---------------------------------------------------------------- resolution

_SCIENCE_FLAGS = ("model", "pattern", "r", "gamma", "gammas", "methods", "base", "conservative", "grid")


def _reject_science_flags(args) -> None:
    for name in _SCIENCE_FLAGS:
        if getattr(args, name, None) is not None:
            raise _UsageError(f"--{name.replace('_', '-')} cannot be combined with --preset")


def _require(args, names: tuple[str, ...]) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join(f"--{n}" for n in missing)
        raise _UsageError(f"without --preset the following flags are required: {flags}")


def _resolve_reps(args, preset: Preset | None) -> int:
    if args.reps is not None and args.full:
        raise _UsageError("--reps and --full cannot be combined")
    if args.reps is not None:
        if args.reps < 1:
            raise _UsageError("--reps must be positive")
        return args.reps
    if args.full:
        if preset is None:
            raise _UsageError("--full requires --preset")
        return preset.full_repetitions
    if preset is not None:
        return preset.desk_repetitions
    return 10_000


class _Plan:
    """Resolved science knobs shared by the experiment subcommands."""

    def __init__(self, args, command: str, default_methods: tuple[str, ...]):
        self.preset: Preset | None = None
        if args.preset is not None:
            self.preset = PRESETS[args.preset]
            _reject_science_flags(args)
            self.model = self.preset.model
            self.strength = self.preset.strength(args.sigma)
            self.r_text = self.preset.strength_text()
            self.methods = self.preset.methods
        else:
            _require(args, ("model", "r"))
            self.model = args.model
            if not args.r > 0.0 or math.isinf(args.r):
                raise _UsageError(f"--r must be finite and positive, got {args.r!r}")
            self.strength = args.r
            self.r_text = repr(float(args.r))
            self.methods = _parse_methods(args.methods) if args.methods else default_methods
        self.command = command
        self.sigma = args.sigma
        self.alpha = args.alpha
        self.seed = args.seed
        self.reps = _resolve_reps(args, self.preset)

    def header(self, science_pairs) -> list[tuple[str, str]]:
        pairs: list[tuple[str, str]] = [("command", self.command)]
        if self.preset is not None:
            pairs.append(("preset", self.preset.name))
        pairs.append(("model", self.model))
        pairs.extend(science_pairs)
        pairs.append(("r", self.r_text))
        pairs.append(("strength", repr(float(self.strength))))
        pairs.append(("methods", ",".join(self.methods)))
        pairs.append(("alpha", repr(float(self.alpha))))
        pairs.append(("repetitions", str(self.reps)))
        pairs.append(("seed", str(self.seed)))
        pairs.append(("sigma", repr(float(self.sigma))))
        return pairs

    def config(self, pattern: EvidencePattern, gamma: int) -> ExperimentConfig:
        return ExperimentConfig(
            model=self.model,
            pattern=pattern,
            gamma=gamma,
            methods=self.methods,
            alpha=self.alpha,
            repetitions=self.reps,
            seed=self.seed,
            sigma=self.sigma,
        )

    def stem(self, command: str) -> str:
        return self.preset.name if self.preset is not None else command


def _plan_gamma(args, plan: _Plan) -> int:
    if plan.preset is not None:
        g = plan.preset.gamma
        assert g is not None
        return g
    _require(args, ("gamma",))
    return args.gamma


def _plan_patterns(args, plan: _Plan) -> list[EvidencePattern]:
    if plan.preset is not None:
        return [find_pattern(label, plan.strength) for label in plan.preset.patterns]
    _require(args, ("pattern",))
    return _parse_patterns(args.pattern, plan.strength)


def _plan_bases(args, plan: _Plan, *, allow_both: bool) -> list[str]:
    if plan.preset is not None:
        base = plan.preset.base
    else:
        base = args.base or ("zeros" if allow_both else "spike")
    if base == "both":
        if not allow_both:
            raise _UsageError("--base both is not supported here")
        return ["zeros", "spike"]
    if base not in BASES:
        raise _UsageError(f"unknown base {base!r}; expected zeros or spike")
    return [base]


def _plan_counts(args, plan: _Plan) -> list[int]:
    if plan.preset is not None:
        return list(plan.preset.counts)
    if args.conservative is None:
        return [0]
    counts = _parse_int_spec(args.conservative, "replacement count")
    for c in counts:
        if not 0 <= c <= 6:
            raise _UsageError(f"replacement count {c} out of range 0..6")
    return counts


# ---------------------------------------------------------------- commands

_TABLE_FIELDS = ("model", "pattern", "r", "gamma", "method", "estimate", "se", "repetitions", "seed")


def _cmd_combine(args) -> int:
    pvals = _parse_prob_list(args.p)
    if len(pvals) < 2:
        raise _UsageError("need at least two p-values")
    try:
        value = partial_conjunction_p(pvals, args.gamma, args.method)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    print(f"{value:.10g}")
    return 0


def _cmd_combine_e(args) -> int:
    evs = _parse_evalue_list(args.e)
    if len(evs) < 2:
        raise _UsageError("need at least two e-values")
    try:
        value = partial_conjunction_e(evs, args.gamma, args.rule)
        if args.to_p:
            value = e_to_p(value)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    print(f"{value:.10g}")
    return 0


def _cmd_power(args) -> int:
    plan = _Plan(args, "power", DISPLAY_METHODS)
    gamma = _plan_gamma(args, plan)
    patterns = _plan_patterns(args, plan)
    header = plan.header(
        [("patterns", ",".join(p.label for p in patterns)), ("gamma", str(gamma))]
    )
    rows = []
    relatives: dict[str, list[float]] = {m: [] for m in plan.methods}
    for pat in patterns:
        results = run_power(plan.config(pat, gamma), args.workers, args.backend)
        rel = dict(relative_power(results))
        for res in results:
            rows.append(
                (plan.model, pat.label, plan.strength, gamma, res.method,
                 res.estimate, res.std_error, res.repetitions, plan.seed, rel[res.method])
            )
            relatives[res.method].append(rel[res.method])
    stem = plan.stem("power")
    _emit_table(args, stem, header, _TABLE_FIELDS + ("relative",), rows)
    if args.plot:
        xs = list(range(len(patterns)))
        ticks = [(float(i), patterns[i].label) for i in xs]
        series = [Series(m, xs, relatives[m]) for m in plan.methods]
        svg = render_line_chart(
            series, x_label="pattern", y_label="relative power",
            title=stem, x_ticks=ticks, y_min=0.0, y_max=1.05,
        )
        _emit_svg(args, f"{stem}.svg", svg)
    return 0


def _cmd_gamma_sweep(args) -> int:
    plan = _Plan(args, "gamma-sweep", DISPLAY_METHODS)
    if plan.preset is not None:
        gammas = list(plan.preset.gammas)
    else:
        _require(args, ("gammas",))
        gammas = _parse_int_spec(args.gammas, "gamma")
        if any(not 1 <= g <= 6 for g in gammas):
            raise _UsageError("every gamma must lie in 1..6")
    patterns = _plan_patterns(args, plan)
    header = plan.header(
        [("patterns", ",".join(p.label for p in patterns)),
         ("gammas", ",".join(str(g) for g in gammas))]
    )
    rows = []
    per_pattern: dict[str, dict[str, list[float]]] = {}
    for pat in patterns:
        sweep = gamma_sweep(plan.config(pat, gammas[0]), gammas, args.workers, args.backend)
        track = per_pattern.setdefault(pat.label, {m: [] for m in plan.methods})
        for row in sweep:
            rows.append(
                (plan.model, pat.label, plan.strength, row.gamma, row.method,
                 row.estimate, row.std_error, row.repetitions, plan.seed, row.relative)
            )
            track[row.method].append(row.relative)
    stem = plan.stem("gamma-sweep")
    _emit_table(args, stem, header, _TABLE_FIELDS + ("relative",), rows)
    if args.plot:
        for pat in patterns:
            series = [
                Series(m, [float(g) for g in gammas], per_pattern[pat.label][m])
                for m in plan.methods
            ]
            svg = render_line_chart(
                series, x_label="gamma", y_label="relative power",
                title=f"{stem} pattern {pat.label}",
                x_ticks=[(float(g), str(g)) for g in gammas], y_min=0.0, y_max=1.05,
            )
            _emit_svg(args, f"{stem}-{pat.label}.svg", svg)
    return 0


def _cmd_null_ecdf(args) -> int:
    plan = _Plan(args, "null-ecdf", DISPLAY_METHODS)
    gamma = _plan_gamma(args, plan)
    bases = _plan_bases(args, plan, allow_both=True)
    counts = _plan_counts(args, plan)
    header = plan.header(
        [("base", ",".join(bases)), ("conservative", ",".join(str(c) for c in counts)),
         ("gamma", str(gamma))]
    )
    rows = []
    for base_label in bases:
        pattern = EvidencePattern(base_label, BASES[base_label], plan.strength)
        for count in counts:
            try:
                results = run_null_ecdf(plan.config(pattern, gamma), count, args.workers, args.backend)
            except ValueError as exc:
                raise _UsageError(str(exc)) from None
            for res in results:
                rows.append(
                    (plan.model, base_label, plan.strength, gamma, res.method,
                     res.estimate, res.std_error, res.repetitions, plan.seed, count)
                )
    stem = plan.stem("null-ecdf")
    _emit_table(args, stem, header, _TABLE_FIELDS + ("conservative",), rows)
    return 0


def _cmd_ecdf_curve(args) -> int:
    plan = _Plan(args, "ecdf-curve", CURVE_METHODS)
    gamma = _plan_gamma(args, plan)
    bases = _plan_bases(args, plan, allow_both=False)
    counts = _plan_counts(args, plan)
    grid = _parse_grid(args.grid if args.grid is not None else _DEFAULT_GRID_SPEC)
    grid_text = args.grid if args.grid is not None else _DEFAULT_GRID_SPEC
    header = plan.header(
        [("base", bases[0]), ("conservative", ",".join(str(c) for c in counts)),
         ("gamma", str(gamma)), ("grid", grid_text)]
    )
    base_pattern = EvidencePattern(bases[0], BASES[bases[0]], plan.strength)
    rows = []
    curves_by_count: dict[int, dict[str, tuple[float, ...]]] = {}
    labels: dict[int, str] = {}
    for count in counts:
        try:
            modified = weaken_pattern(base_pattern, count)
            curves = run_ecdf_curve(plan.config(modified, gamma), grid, args.workers, args.backend)
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
        curves_by_count[count] = curves
        labels[count] = modified.label
        n = plan.reps
        for method in plan.methods:
            for t, est in zip(grid, curves[method]):
                se = math.sqrt(est * (1.0 - est) / n)
                rows.append(
                    (plan.model, modified.label, plan.strength, gamma, method,
                     est, se, n, plan.seed, t)
                )
    stem = plan.stem("ecdf-curve")
    _emit_table(args, stem, header, _TABLE_FIELDS + ("threshold",), rows)
    if args.plot:
        for count in counts:
            series = [
                Series(m, grid, list(curves_by_count[count][m])) for m in plan.methods
            ]
            svg = render_line_chart(
                series, x_label="threshold", y_label="empirical cdf",
                title=f"{stem} {labels[count]}", y_min=0.0, y_max=1.0,
            )
            _emit_svg(args, f"{stem}-c{count}.svg", svg)
    return 0


def _cmd_patterns(args) -> int:
    strength = args.r if args.r is not None else 1.0
    if not strength > 0.0 or math.isinf(strength):
        raise _UsageError(f"--r must be finite and positive, got {strength!r}")
    catalog = pattern_catalog(strength)
    header = [("command", "patterns"), ("r", repr(float(strength)))]
    fields = ("label", "theta1", "theta2", "theta3", "theta4", "theta5", "theta6", "dispersion")
    rows = [(p.label, *p.theta_bounds, p.dispersion) for p in catalog]
    _emit_table(args, "patterns", header, fields, rows)
    return 0


# ---------------------------------------------------------------- parser

def _add_output_flags(sub, *, plot: bool) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", default=None, help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    if plot:
        sub.add_argument("--plot", action="store_true", help="also write an SVG chart")


def _add_experiment_flags(sub, command: str) -> None:
    names = preset_names(command)
    sub.add_argument("--preset", choices=names, default=None,
                     help=f"named setting: {', '.join(names)}")
    sub.add_argument("--model", choices=("beta", "normal"), default=None)
    sub.add_argument("--r", type=float, default=None, help="signal strength factor")
    sub.add_argument("--methods", default=None, help="comma-separated method names")
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--reps", type=int, default=None, help="Monte Carlo repetitions")
    sub.add_argument("--full", action="store_true", help="use the preset's archival repetition count")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--backend", choices=("fast", "pure"), default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pconj",
        description="Replicability testing: p-value/e-value combination and Monte Carlo experiments.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("combine", help="combine p-values for a replicability target")
    sub.add_argument("--p", required=True, help="comma-separated p-values")
    sub.add_argument("--gamma", type=int, required=True)
    sub.add_argument("--method", choices=tuple(sorted(P_METHODS)), required=True)
    sub.set_defaults(func=_cmd_combine)

    sub = subs.add_parser("combine-e", help="merge e-values for a replicability target")
    sub.add_argument("--e", required=True, help="comma-separated e-values")
    sub.add_argument("--gamma", type=int, required=True)
    sub.add_argument("--rule", choices=("product", "arithmetic", "harmonic"), default="product")
    sub.add_argument("--to-p", action="store_true", help="print the calibrated p-value instead")
    sub.set_defaults(func=_cmd_combine_e)

    sub = subs.add_parser("power", help="rejection rate per pattern and method")
    _add_experiment_flags(sub, "power")
    sub.add_argument("--pattern", default=None, help="comma-separated pattern labels")
    sub.add_argument("--gamma", type=int, default=None)
    _add_output_flags(sub, plot=True)
    sub.set_defaults(func=_cmd_power, gammas=None, base=None, conservative=None, grid=None)

    sub = subs.add_parser("gamma-sweep", help="power across replicability targets")
    _add_experiment_flags(sub, "gamma-sweep")
    sub.add_argument("--pattern", default=None, help="comma-separated pattern labels")
    sub.add_argument("--gammas", default=None, help='targets, e.g. "1..5" or "1,3,5"')
    _add_output_flags(sub, plot=True)
    sub.set_defaults(func=_cmd_gamma_sweep, gamma=None, base=None, conservative=None, grid=None)

    sub = subs.add_parser("null-ecdf", help="rejection rate at alpha under weakened nulls")
    _add_experiment_flags(sub, "null-ecdf")
    sub.add_argument("--base", choices=("zeros", "spike", "both"), default=None)
    sub.add_argument("--conservative", default=None, help='replacement counts, e.g. "0..5"')
    sub.add_argument("--gamma", type=int, default=None)
    _add_output_flags(sub, plot=False)
    sub.set_defaults(func=_cmd_null_ecdf, pattern=None, gammas=None, grid=None)

    sub = subs.add_parser("ecdf-curve", help="empirical cdf of the combined p-value")
    _add_experiment_flags(sub, "ecdf-curve")
    sub.add_argument("--base", choices=("zeros", "spike"), default=None)
    sub.add_argument("--conservative", default=None, help='replacement counts, e.g. "1,4"')
    sub.add_argument("--gamma", type=int, default=None)
    sub.add_argument("--grid", default=None, help=f"threshold grid start:stop:step (default {_DEFAULT_GRID_SPEC})")
    _add_output_flags(sub, plot=True)
    sub.set_defaults(func=_cmd_ecdf_curve, pattern=None, gammas=None)

    sub = subs.add_parser("patterns", help="dump the signal-pattern catalog")
    sub.add_argument("--r", type=float, default=None, help="strength factor for the theta columns")
    _add_output_flags(sub, plot=False)
    sub.set_defaults(func=_cmd_patterns)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
