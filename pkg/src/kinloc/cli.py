"""Command-line front end: estimate / sweep / verify.

Configuration is a flat JSON object (see _KEYS for the accepted keys); any
flag given on the command line overrides the corresponding file value.  All
numeric output is serialized with 17 significant digits and files are written
via a temp file + rename, so a finished file is always complete and reruns
with the same config and seed are byte-identical.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import model, montecarlo, oracle, svgplot
from .errors import ConfigError, KinlocError
from .estim import WeightRule, estimate_all
from .model import MeasurementSet, NoiseSpec, SensorArray, TargetState
from .montecarlo import (DEFAULT_SEED, DEFAULT_TRIALS, Scenario, default_scenario,
                         sweep_acceleration_experiment, sweep_velocity_experiment,
                         timing_report)

VELOCITY_GRID = (0.1, 0.3, 1.0, 3.0, 10.0)
ACCELERATION_GRID = (0.01, 0.03, 0.1, 0.3, 1.0)
CSV_HEADER = "sigma,rmse_pos,rmse_vel_ls,rmse_vel_wls,rmse_acc_ls,rmse_acc_wls,failures,t_ls_us,t_wls_us"

_WEIGHT_CHOICES = {
    "uniform": "uniform",
    "inverse-range": "inverse_range",
    "inverse-range-sq": "inverse_range_sq",
}
_EXPERIMENTS = ("velocity", "acceleration")
_FORMATS = ("text", "json")


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _as_int(key, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _as_float(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _as_choice(choices):
    def cast(key, value):
        if value not in choices:
            raise ConfigError(f"{key} must be one of {sorted(choices)}, got {value!r}")
        return value
    return cast


def _as_str(key, value):
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}")
    return value


def _as_bool(key, value):
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be true or false, got {value!r}")
    return value


def _as_pair(key, value):
    try:
        x, y = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a pair of numbers, got {value!r}") from exc
    return (x, y)


def _as_pair_list(key, value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key} must be a nonempty list of [x, y] pairs")
    return tuple(_as_pair(key, item) for item in value)


def _as_float_list(key, value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key} must be a nonempty list of numbers")
    return tuple(_as_float(key, item) for item in value)


def _as_box(key, value):
    pair = _as_pair_list(key, value)
    if len(pair) != 2:
        raise ConfigError(f"{key} must be [[xmin, ymin], [xmax, ymax]]")
    return pair


# accepted config keys and their validators; anything else is rejected
_KEYS = {
    "seed": lambda k, v: _as_int(k, v, minimum=0),
    "trials": lambda k, v: _as_int(k, v, minimum=1),
    "grid": _as_float_list,
    "weights": _as_choice(tuple(_WEIGHT_CHOICES)),
    "experiment": _as_choice(_EXPERIMENTS),
    "out": _as_str,
    "svg": _as_str,
    "format": _as_choice(_FORMATS),
    "threads": lambda k, v: _as_int(k, v, minimum=1),
    "timing": _as_bool,
    "sensors": _as_pair_list,
    "position_box": _as_box,
    "velocity_box": _as_box,
    "acceleration_box": _as_box,
    "sigma_range": _as_float,
    "sigma_range_rate": _as_float,
    "sigma_drr": _as_float,
    "position": _as_pair,
    "velocity": _as_pair,
    "acceleration": _as_pair,
    "ranges": _as_float_list,
    "range_rates": _as_float_list,
    "drrs": _as_float_list,
}

_DEFAULTS = {
    "seed": DEFAULT_SEED,
    "trials": DEFAULT_TRIALS,
    "weights": "inverse-range",
    "experiment": "velocity",
    "format": "text",
    "threads": 1,
    "timing": False,
    "sigma_range": 1.0,
    "sigma_range_rate": 1.0,
    "sigma_drr": 1.0,
}


def load_config(path: str | None, overrides: dict) -> dict:
    """Defaults, then the JSON config file, then non-None CLI overrides."""
    config = dict(_DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        unknown = sorted(set(raw) - set(_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in raw.items():
            config[key] = _KEYS[key](key, value)
    for key, value in overrides.items():
        if value is not None:
            config[key] = _KEYS[key](key, value)
    return config


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kinloc.", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _weight_rule(config) -> WeightRule:
    return WeightRule(mode=_WEIGHT_CHOICES[config["weights"]])


def _sensors(config) -> SensorArray:
    return SensorArray(config.get("sensors", montecarlo.DEFAULT_SENSOR_POSITIONS))


def _noise(config) -> NoiseSpec:
    return NoiseSpec(config["sigma_range"], config["sigma_range_rate"],
                     config["sigma_drr"])


def _render_estimate_text(result) -> str:
    pos = result.position
    lines = [
        f"position      {_g17(pos.position[0])} {_g17(pos.position[1])}"
        f"  residual={_g17(pos.residual_norm)} cond={_g17(pos.gram_condition)}",
    ]
    for name in ("velocity_ls", "velocity_wls", "accel_ls", "accel_wls"):
        est = getattr(result, name)
        lines.append(f"{name:<13} {_g17(est.value[0])} {_g17(est.value[1])}"
                     f"  cond={_g17(est.gram_condition)}")
    return "\n".join(lines) + "\n"


def _render_estimate_json(result) -> str:
    def vec(v):
        return f"[{_g17(v[0])}, {_g17(v[1])}]"

    return ("{\n"
            f'  "position": {vec(result.position.position)},\n'
            f'  "velocity_ls": {vec(result.velocity_ls.value)},\n'
            f'  "velocity_wls": {vec(result.velocity_wls.value)},\n'
            f'  "accel_ls": {vec(result.accel_ls.value)},\n'
            f'  "accel_wls": {vec(result.accel_wls.value)}\n'
            "}\n")


def cmd_estimate(config) -> int:
    sensors = _sensors(config)
    has_truth = config.get("position") is not None
    has_meas = any(config.get(k) is not None for k in ("ranges", "range_rates", "drrs"))
    if has_truth == has_meas:
        raise ConfigError("estimate needs either a truth state (position/velocity/"
                          "acceleration) or explicit measurements (ranges/range_rates/"
                          "drrs), not both and not neither")

    if has_truth:
        truth = TargetState(config["position"],
                            config.get("velocity", (0.0, 0.0)),
                            config.get("acceleration", (0.0, 0.0)))
        rng = np.random.default_rng(config["seed"])
        measurements = model.synthesize_measurements(truth, sensors, _noise(config), rng)
    else:
        missing = [k for k in ("ranges", "range_rates", "drrs") if config.get(k) is None]
        if missing:
            raise ConfigError(f"explicit measurements need all three lists, missing: "
                              f"{', '.join(missing)}")
        measurements = MeasurementSet(config["ranges"], config["range_rates"],
                                      config["drrs"], _noise(config))
        if len(measurements.ranges) != len(sensors):
            raise ConfigError(f"got {len(measurements.ranges)} measurements for "
                              f"{len(sensors)} sensors")

    result = estimate_all(measurements, sensors, _weight_rule(config))
    if config["format"] == "json":
        text = _render_estimate_json(result)
    else:
        text = _render_estimate_text(result)
    if config.get("out"):
        _atomic_write(config["out"], text)
    else:
        sys.stdout.write(text)
    return 0


def _sweep_csv(sweep, with_timing: bool) -> str:
    lines = [CSV_HEADER]
    for point in sweep.points:
        if with_timing:
            t = point.mean_stage_times
            t_ls = (t["position"] + t["velocity_ls"] + t["accel_ls"]) * 1e6
            t_wls = (t["position"] + t["velocity_wls"] + t["accel_wls"]) * 1e6
        else:
            # wall-clock times are never reproducible; only report them on request
            t_ls = t_wls = 0.0
        lines.append(",".join([
            _g17(point.sigma),
            _g17(point.rmse_position),
            _g17(point.rmse_velocity_ls),
            _g17(point.rmse_velocity_wls),
            _g17(point.rmse_accel_ls),
            _g17(point.rmse_accel_wls),
            str(point.failures),
            _g17(t_ls),
            _g17(t_wls),
        ]))
    return "\n".join(lines) + "\n"


def _base_scenario(config) -> Scenario:
    scenario = default_scenario(trials=config["trials"], seed=config["seed"],
                                noise=_noise(config), sensors=_sensors(config).positions)
    boxes = {}
    for key in ("position_box", "velocity_box", "acceleration_box"):
        if config.get(key) is not None:
            boxes[key] = config[key]
    if boxes:
        scenario = replace(scenario, **boxes)
    return scenario


def cmd_sweep(config) -> int:
    if not config.get("out"):
        raise ConfigError("sweep needs an output CSV path (--out)")
    base = _base_scenario(config)
    rule = _weight_rule(config)
    threads = config["threads"]
    if config["experiment"] == "acceleration":
        grid = config.get("grid") or ACCELERATION_GRID
        sweep = sweep_acceleration_experiment(base, grid, rule, threads=threads)
    else:
        grid = config.get("grid") or VELOCITY_GRID
        sweep = sweep_velocity_experiment(base, grid, rule, threads=threads)

    _atomic_write(config["out"], _sweep_csv(sweep, config["timing"]))
    if config.get("svg"):
        _atomic_write(config["svg"], svgplot.sweep_figure(sweep))

    report = timing_report(sweep)
    out = [f"wrote {config['out']}" + (f" and {config['svg']}" if config.get("svg") else "")]
    out.append("mean per-trial runtime (us):")
    for method in montecarlo.METHODS:
        out.append(f"  {method:<13} {report[method] * 1e6:.3f}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_verify(config) -> int:
    report = oracle.verification_suite(instances=config["trials"], seed=config["seed"],
                                       range_rate_fn=model.range_rate,
                                       range_accel_fn=model.range_accel)
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        sys.stdout.write(f"{check.name:<24} max deviation {check.max_deviation:.3e} "
                         f"(tolerance {check.tolerance:.0e})  {status}\n")
    if report.all_passed:
        sys.stdout.write("all checks passed\n")
        return 0
    sys.stdout.write("oracle disagreement detected\n")
    return 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--trials", type=int, metavar="K")
    common.add_argument("--grid", metavar="LIST", help="comma-separated noise levels")
    common.add_argument("--weights", choices=sorted(_WEIGHT_CHOICES))
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--svg", metavar="PATH")
    common.add_argument("--format", choices=_FORMATS)
    common.add_argument("--threads", type=int, metavar="T")
    common.add_argument("--timing", action="store_const", const=True, default=None,
                        help="report measured per-trial times in the CSV")

    parser = argparse.ArgumentParser(
        prog="kinloc",
        description="Closed-form position/velocity/acceleration estimation from "
                    "range, range-rate, and range-rate-derivative measurements.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common],
                   help="run the estimator pipeline on one measurement set")
    sweep = sub.add_parser("sweep", parents=[common],
                           help="Monte Carlo RMSE sweep over a noise grid")
    sweep.add_argument("--experiment", choices=_EXPERIMENTS)
    sub.add_parser("verify", parents=[common],
                   help="check analytic derivatives and solver against oracles")
    return parser


def _parse_grid_flag(text: str | None):
    if text is None:
        return None
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--grid must be a comma-separated number list: {text!r}") from exc


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = {
            "seed": args.seed,
            "trials": args.trials,
            "grid": _parse_grid_flag(args.grid),
            "weights": args.weights,
            "out": args.out,
            "svg": args.svg,
            "format": args.format,
            "threads": args.threads,
            "timing": args.timing,
        }
        if args.command == "sweep":
            overrides["experiment"] = args.experiment
        config = load_config(args.config, overrides)
        if args.command == "estimate":
            return cmd_estimate(config)
        if args.command == "sweep":
            return cmd_sweep(config)
        return cmd_verify(config)
    except (KinlocError, ValueError, OSError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
