"""Command-line interface: ``fcpp {fit,simulate,study,dist}``.

Every subcommand accepts ``--config FILE`` with plain ``key=value`` lines
(keys are the long flag names, ``-`` or ``_`` both accepted); explicit flags
override the file, and the file overrides built-in defaults.

Exit codes: 0 success, 1 I/O error, 2 usage or configuration error, 3 input
parse error, 4 insufficient data, 5 optimisation failure, 6 degenerate sample.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSampleError,
    DomainError,
    InsufficientDataError,
    OptimizationError,
    ParseError,
)
from .estimators import ESTIMATORS, fit_estimator
from .mixture import FcppParams, ModelFamily, mixture_cdf
from .mlf import MlParams, ml_cdf, ml_pdf, ml_quantile
from .pot import EventSeries, extract_iets, threshold_from_fraction
from .simulate import ScenarioSpec, WaitingKind, build_series
from .study import paper_grid, run_study

log = logging.getLogger("fcpp")

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INSUFFICIENT = 4
EXIT_OPTIMIZATION = 5
EXIT_DEGENERATE = 6

_EXIT_FOR = (
    (ParseError, EXIT_PARSE),
    (InsufficientDataError, EXIT_INSUFFICIENT),
    (DegenerateSampleError, EXIT_DEGENERATE),
    (OptimizationError, EXIT_OPTIMIZATION),
    (DomainError, EXIT_USAGE),
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# event-series CSV


def read_event_csv(stream) -> EventSeries:
    """Parse ``time,magnitude[,segment]`` CSV into an :class:`EventSeries`."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input") from None
    header = [h.strip().lower() for h in header]
    if header not in (["time", "magnitude"], ["time", "magnitude", "segment"]):
        raise ParseError(f"expected header 'time,magnitude[,segment]', got {','.join(header)!r}")
    has_seg = len(header) == 3
    times, mags, segs = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            times.append(float(row[0]))
            mags.append(float(row[1]))
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric time or magnitude") from None
        if has_seg:
            segs.append(row[2].strip())
    if len(times) < 2:
        raise InsufficientDataError(f"input has {len(times)} event(s); need at least 2")
    try:
        return EventSeries(np.array(times), np.array(mags), np.array(segs) if has_seg else None)
    except DomainError as exc:
        raise ParseError(str(exc)) from None


def write_event_csv(series: EventSeries, stream) -> None:
    """Write an event series with 17 significant digits (lossless for doubles)."""
    w = csv.writer(stream, lineterminator="\n")
    has_seg = series.segments is not None
    w.writerow(["time", "magnitude", "segment"] if has_seg else ["time", "magnitude"])
    for i in range(len(series)):
        row = [f"{series.times[i]:.17g}", f"{series.magnitudes[i]:.17g}"]
        if has_seg:
            row.append(str(series.segments[i]))
        w.writerow(row)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Options shared by the subcommands, validated once."""

    input: str | None = None
    output: str | None = None
    frac: float = 0.02
    lower_bound: float = 0.1
    family: str = "fcpp"
    estimator: str = "cmmod"
    seed: int | None = None
    replicates: int = 100
    jobs: int = 1

    def __post_init__(self):
        if not 0.0 < self.frac < 1.0:
            raise UsageError(f"--frac must lie in (0, 1), got {self.frac}")
        if not 0.0 < self.lower_bound <= 0.5:
            raise UsageError(f"--lower-bound must lie in (0, 0.5], got {self.lower_bound}")
        if self.replicates < 1:
            raise UsageError("--replicates must be at least 1")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


def _config_of(args) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: getattr(args, k) for k in fields if getattr(args, k, None) is not None})


def read_config_file(path: str) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]):
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, raw in values.items():
        act = actions.get(key)
        if act is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for this subcommand")
        if isinstance(act, argparse._StoreTrueAction):
            val = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(act, argparse._AppendAction):
            val = [v.strip() for v in raw.split(",") if v.strip()]
        else:
            try:
                val = act.type(raw) if act.type else raw
            except (TypeError, ValueError):
                raise UsageError(f"config key {key!r}: invalid value {raw!r}") from None
        if act.choices is not None and not isinstance(val, list) and val not in act.choices:
            raise UsageError(f"config key {key!r}: {val!r} not in {sorted(act.choices)}")
        defaults[key] = val
    parser.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# output helpers


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(text: str, path):
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


# ---------------------------------------------------------------------------
# subcommands


def cmd_fit(args) -> int:
    cfg = _config_of(args)
    if cfg.input is None:
        raise UsageError("fit needs --input")
    if cfg.input == "-":
        series = read_event_csv(sys.stdin)
    else:
        with open(cfg.input, encoding="utf-8", newline="") as fh:
            series = read_event_csv(fh)
    u = threshold_from_fraction(series, cfg.frac)
    sample = extract_iets(series, u)
    fit = fit_estimator(sample, cfg.estimator, a=cfg.lower_bound, family=cfg.family)
    report = fit.to_dict()
    report["threshold"] = u
    _emit(json.dumps(report, indent=2) + "\n", cfg.output)
    return EXIT_OK


def parse_waiting(text: str) -> tuple[WaitingKind, float | None]:
    """``exp``, ``dirac``, ``pareto:1.5``, ``stable:0.7``, ``ml:0.8``, ``spareto:0.6``."""
    kind, _, param = text.partition(":")
    try:
        wk = WaitingKind(kind.strip().lower())
        return wk, (float(param) if param else None)
    except ValueError:
        raise UsageError(f"bad waiting-time spec {text!r}") from None


def parse_scenario(text: str, n: int, seed: int, frac: float) -> ScenarioSpec:
    """``KIND[:PARAM]@THETA``, e.g. ``ml:0.8@0.8`` or ``exp@0.6``."""
    wait, sep, theta = text.partition("@")
    if not sep:
        raise UsageError(f"bad scenario {text!r}; expected KIND[:PARAM]@THETA")
    kind, param = parse_waiting(wait)
    try:
        return ScenarioSpec(float(theta), kind, param, n=n, seed=seed, frac=frac)
    except ValueError as exc:
        raise UsageError(f"bad scenario {text!r}: {exc}") from None


def cmd_simulate(args) -> int:
    cfg = _config_of(args)
    if cfg.seed is None:
        raise UsageError("simulate needs --seed")
    kind, param = parse_waiting(args.waiting)
    spec = ScenarioSpec(args.theta, kind, param, n=args.n, seed=cfg.seed, frac=cfg.frac)
    series = build_series(spec, args.replicate)
    fh, close = _open_out(cfg.output)
    try:
        write_event_csv(series, fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = _config_of(args)
    if cfg.seed is None:
        raise UsageError("study needs --seed")
    grid = []
    if args.paper_grid:
        grid += paper_grid(n=args.n, seed=cfg.seed, frac=cfg.frac)
    grid += [parse_scenario(s, args.n, cfg.seed, cfg.frac) for s in (args.scenario or [])]
    if not grid:
        raise UsageError("study needs --scenario (repeatable) or --paper-grid")
    estimators = []
    for item in args.estimators or ["cmmod"]:
        estimators += [e.strip() for e in item.split(",") if e.strip()]
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise UsageError(f"unknown estimator(s) {bad}; choose from {ESTIMATORS}")
    result = run_study(
        grid,
        replicates=cfg.replicates,
        estimators=tuple(dict.fromkeys(estimators)),
        parallelism=cfg.jobs,
        a=cfg.lower_bound,
        timing=args.timing,
    )
    _emit(result.to_csv(), cfg.output)
    if args.json:
        _emit(result.to_json() + "\n", args.json)
    return EXIT_OK


def _parse_points(args) -> np.ndarray:
    if args.at:
        try:
            return np.array([float(v) for v in args.at.split(",")])
        except ValueError:
            raise UsageError(f"bad --at list {args.at!r}") from None
    if args.grid:
        try:
            lo, hi, num = args.grid.split(":")
            return np.linspace(float(lo), float(hi), int(num))
        except ValueError:
            raise UsageError(f"bad --grid {args.grid!r}; expected START:STOP:NUM") from None
    raise UsageError("dist needs --at or --grid")


def _mixture_value(p: FcppParams, function: str, x: np.ndarray) -> np.ndarray:
    if function == "cdf":
        return np.asarray(mixture_cdf(p, x), dtype=float)
    comp = p.component
    if function == "pdf":
        # density of the continuous part; the atom at 0 is reported by the cdf
        return p.theta * np.asarray(ml_pdf(comp, x), dtype=float)
    atom = 1.0 - p.theta
    out = np.zeros_like(x)
    cont = x > atom
    if cont.any():
        out[cont] = ml_quantile(comp, (x[cont] - atom) / p.theta)
    return out


def cmd_dist(args) -> int:
    x = _parse_points(args)
    if args.law == "ml":
        p = MlParams(args.beta, args.sigma)
        fn = {"cdf": ml_cdf, "pdf": ml_pdf, "quantile": ml_quantile}[args.function]
        y = np.atleast_1d(np.asarray(fn(p, x), dtype=float))
    else:
        y = _mixture_value(FcppParams(args.beta, args.theta, args.sigma), args.function, x)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", args.function])
    for xi, yi in zip(x, y):
        w.writerow([f"{xi:.17g}", f"{yi:.17g}"])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, *names: str):
    p.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    if "input" in names:
        p.add_argument("--input", "-i", help="event-series CSV (time,magnitude[,segment]); '-' for stdin")
    if "frac" in names:
        p.add_argument("--frac", type=float, help="fraction of largest magnitudes used as exceedances (0.02)")
    if "lower_bound" in names:
        p.add_argument("--lower-bound", type=float, help="lower bound a for beta and theta (0.1)")
    if "seed" in names:
        p.add_argument("--seed", type=int, help="base random seed")
    if "replicates" in names:
        p.add_argument("--replicates", type=int, help="Monte-Carlo replicates per scenario (100)")
    if "jobs" in names:
        p.add_argument("--jobs", type=int, help="worker processes (1)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="fcpp", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("fit", help="fit the IET mixture to an event series")
    _add_common(p, "input", "frac", "lower_bound")
    p.add_argument("--family", choices=[f.value for f in ModelFamily], help="model family (fcpp)")
    p.add_argument("--estimator", choices=ESTIMATORS, help="estimator (cmmod)")
    p.set_defaults(func=cmd_fit)
    subs["fit"] = p

    p = sub.add_parser("simulate", help="simulate an ARMAX event series")
    _add_common(p, "seed", "frac")
    p.add_argument("--theta", type=float, default=1.0, help="extremal index (1)")
    p.add_argument("--waiting", default="exp", help="exp, dirac, pareto:A, stable:B, ml:B or spareto:B (exp)")
    p.add_argument("--n", type=int, default=10_000, help="number of events (10000)")
    p.add_argument("--replicate", type=int, default=0, help="replicate index of the random streams (0)")
    p.set_defaults(func=cmd_simulate)
    subs["simulate"] = p

    p = sub.add_parser("study", help="run a Monte-Carlo study and write bias/RMSE tables")
    _add_common(p, "seed", "frac", "lower_bound", "replicates", "jobs")
    p.add_argument("--scenario", action="append", help="KIND[:PARAM]@THETA, e.g. ml:0.8@0.8; repeatable")
    p.add_argument("--paper-grid", action="store_true", help="add the full theta x waiting-time grid")
    p.add_argument("--estimator", dest="estimators", action="append", help="estimator(s), comma separated; repeatable")
    p.add_argument("--n", type=int, default=10_000, help="series length per replicate (10000)")
    p.add_argument("--json", metavar="FILE", help="also write the full result, including raw estimates, as JSON")
    p.add_argument("--timing", action="store_true", help="fill mean_seconds (makes output run-dependent)")
    p.set_defaults(func=cmd_study)
    subs["study"] = p

    p = sub.add_parser("dist", help="tabulate cdf, pdf or quantile of the ML law or the mixture")
    p.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    p.add_argument("--law", choices=["ml", "mixture"], default="mixture")
    p.add_argument("--function", choices=["cdf", "pdf", "quantile"], default="cdf")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--at", help="comma-separated evaluation points")
    p.add_argument("--grid", help="START:STOP:NUM evenly spaced points")
    p.set_defaults(func=cmd_dist)
    subs["dist"] = p
    return parser, subs


def main(argv=None) -> int:
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.config:
            _apply_config(subs[args.command], read_config_file(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"fcpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fcpp: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        for cls, code in _EXIT_FOR:
            if isinstance(exc, cls):
                print(f"fcpp: error: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
