"""Command-line entry point: ``hmtphase <subcommand> [options]``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
failures while running.
"""
from __future__ import annotations

import argparse
import sys

from .bounds import BoundParams, error_probability_bound, log_error_probability_bound
from .channel import LinkGeometry, PhasePair, channel_gain, peak_gain
from .estimator import (
    MeanEstimates, build_probe_set, default_steps, solve_noiseless, two_stage_estimate,
)
from .experiments import output
from .experiments.config import ConfigError, ExperimentConfig, load_config
from .experiments.runner import (
    ERROR_COLUMNS, PRESETS, RATE_COLUMNS, run_error_probability_sweep, run_rate_sweep,
)
from .experiments.surface import SURFACE_COLUMNS, render_gain_surface
from .signal import PilotSampler, RngStream, dbm_to_watts, expected_power, sample_nlos_perturbation

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return vals[0], vals[1]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hmtphase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--distance", type=float, help="user distance d0 in metres")

    p = sub.add_parser("solve", help="noiseless five-probe inversion")
    common(p)
    p.add_argument("--alpha", type=_pair, required=True)
    p.add_argument("--center", type=_pair, required=True)
    p.add_argument("--v", type=float)
    p.add_argument("--w", type=float)
    p.add_argument("--pilot-dbm", type=float, default=10.0)

    p = sub.add_parser("estimate", help="one noisy two-stage estimate")
    common(p)
    p.add_argument("--alpha", type=_pair)
    p.add_argument("--center", type=_pair, help="skip the centre search")
    p.add_argument("--pilots", type=int, required=True)
    p.add_argument("--pilot-dbm", type=float, default=10.0)
    p.add_argument("--v", type=float)
    p.add_argument("--w", type=float)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("bound", help="evaluate the error-probability bound")
    p.add_argument("--n", type=int, required=True, help="pilots per epoch")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lambda", dest="lambdas", type=_floats, required=True,
                   help="lambda_2..lambda_5 (or lambda_1..lambda_5)")

    for name, help_ in (("sweep-error", "error probability vs pilots"),
                        ("sweep-rate", "achievable rate vs pilot power")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--pilots", type=_ints)
        p.add_argument("--pilot-dbm", type=_floats)
        p.add_argument("--epsilons", type=_floats)
        p.add_argument("--distances", type=_floats)
        p.add_argument("--center-mode", choices=("stage0", "perturbed", "fixed"))
        p.add_argument("--nlos-paths", type=int)
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--svg", help="optional SVG line chart path")

    p = sub.add_parser("surface", help="|H| over the steering domain")
    common(p)
    p.add_argument("--alpha", type=_pair)
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    return parser


def _config(args, **overrides) -> ExperimentConfig:
    return load_config(args.config, **overrides)


def _link(cfg: ExperimentConfig, args) -> LinkGeometry:
    alpha = getattr(args, "alpha", None) or cfg.alpha
    distance = args.distance if args.distance is not None else cfg.distances[0]
    try:
        return LinkGeometry(distance, alpha[0], alpha[1], cfg.radiation_factor)
    except ValueError as exc:
        raise ConfigError("alpha", str(exc)) from None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_solve(args) -> str:
    cfg = _config(args)
    geom = cfg.geometry()
    link = _link(cfg, args)
    sigma2 = cfg.noise().sigma2
    dv, dw = default_steps(geom)
    try:
        probe_set = build_probe_set(PhasePair(*args.center), args.v or dv, args.w or dw, geom)
    except ValueError as exc:
        raise ConfigError("center/v/w", str(exc)) from None
    power = dbm_to_watts(args.pilot_dbm)
    mu = tuple(expected_power(channel_gain(geom, link, p), power, sigma2)
               for p in probe_set.probes)
    beta = solve_noiseless(MeanEstimates(mu, 1), probe_set, sigma2)
    return f"beta_hat = ({beta.beta1:.6f}, {beta.beta2:.6f})"


def cmd_estimate(args) -> str:
    cfg = _config(args, seed=args.seed)
    geom = cfg.geometry()
    link = _link(cfg, args)
    noise = cfg.noise()
    rng = RngStream(cfg.seed, 0)
    h_nlos = sample_nlos_perturbation(rng.child(2), noise, peak_gain(geom, link) ** 2)
    sampler = PilotSampler(geom, link, dbm_to_watts(args.pilot_dbm), noise.sigma2,
                           rng.child(4), h_nlos)
    center = PhasePair(*args.center) if args.center else None
    if args.pilots < 5:
        raise ConfigError("pilots", "need at least 5 pilots")
    res = two_stage_estimate(geom, sampler, args.pilots, noise.sigma2, args.v, args.w, center)
    flag = " (degenerate)" if res.degenerate else ""
    return (f"beta_hat = ({res.beta1_hat:.6f}, {res.beta2_hat:.6f}) "
            f"pilots_used = {res.pilots_used}{flag}")


def cmd_bound(args) -> str:
    try:
        params = BoundParams.from_all(args.lambdas, args.n, args.eps)
    except ValueError as exc:
        raise ConfigError("bound", str(exc)) from None
    return (f"bound = {error_probability_bound(params):.12g} "
            f"(raw log = {log_error_probability_bound(params):.12g})")


def _sweep_config(args) -> ExperimentConfig:
    base = PRESETS[args.preset] if args.preset else None
    return load_config(args.config, base=base, trials=args.trials, seed=args.seed,
                       workers=args.workers, pilots=args.pilots, pilot_dbm=args.pilot_dbm,
                       epsilons=args.epsilons, distances=args.distances,
                       center_mode=args.center_mode, nlos_paths=args.nlos_paths,
                       csv=args.out, svg=args.svg)


def cmd_sweep(args, kind: str) -> str:
    cfg = _sweep_config(args)
    if kind == "error":
        rows = run_error_probability_sweep(cfg)
        columns, chart = ERROR_COLUMNS, output.error_sweep_chart
        summary = (f"{len(rows)} sweep points, max error probability "
                   f"{max(r['error_probability'] for r in rows):.4g}")
    else:
        rows = run_rate_sweep(cfg)
        columns, chart = RATE_COLUMNS, output.rate_sweep_chart
        summary = f"{len(rows)} rate rows over methods {','.join(cfg.methods)}"
    _emit(output.to_csv(rows, columns), cfg.csv)
    if cfg.svg:
        _emit(chart(rows), cfg.svg)
    return summary + (f" -> {cfg.csv}" if cfg.csv else "")


def cmd_surface(args) -> str:
    cfg = _config(args)
    if args.resolution < 16:
        raise ConfigError("resolution", "must be >= 16")
    link = _link(cfg, args)
    surf = render_gain_surface(cfg.geometry(), link, args.resolution)
    _emit(output.to_csv(surf.rows(), SURFACE_COLUMNS), args.out)
    b1, b2 = surf.argmax_point()
    return f"argmax |H| = {surf.gain_abs.max():.6g} at ({b1:.6f}, {b2:.6f})"


COMMANDS = {
    "solve": cmd_solve,
    "estimate": cmd_estimate,
    "bound": cmd_bound,
    "sweep-error": lambda a: cmd_sweep(a, "error"),
    "sweep-rate": lambda a: cmd_sweep(a, "rate"),
    "surface": cmd_surface,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        summary = COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"hmtphase: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report anything else as a run failure
        print(f"hmtphase: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    # summaries go to stderr when CSV is streamed on stdout
    out = sys.stderr if getattr(args, "out", "x") is None else sys.stdout
    print(summary, file=out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
