"""Command-line front end for the sweep scenarios and the validation suite.

Exit codes: 0 on success, 1 for configuration problems (bad flags, bad config
file, unknown keys), 2 for numerical contract violations (e.g. no reversal
period in the search window, failed cross-validation).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .circuit import ModelParams, PeriodNotFound
from .experiments import SweepConfig, run_scenario, run_validation
from .spin import ContractViolation

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class ConfigError(Exception):
    """A configuration file or flag combination is invalid."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this CLI reserves 2 for numerical
    # failures, so flag problems are remapped to the config exit code.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


_COMMON_KEYS = {"out", "wp", "wa", "g", "interaction", "mode", "scenario"}
_SCENARIO_KEYS = {
    "trace_scan": {"n", "points", "gt_max"},
    "qfi_theta0": {"n_values", "theta0_points"},
    "qfi_t1": {"n_values", "gt1_points", "gt1_max"},
    "qfi_heatmap": {"n", "theta0_points", "gt1_points", "gt1_max"},
    "qfi_scaling": {"n_values", "beta"},
    "cfi_map": {"n", "gt1_points", "gt2_points", "gt_max", "theta_eval"},
    "xz_scaling": {"n_values", "ratios"},
    "deviation_scan": {"n_values", "deltas"},
    "dephasing_scan": {"n_values", "x_values"},
}
_INT_KEYS = {"n", "points", "theta0_points", "gt1_points", "gt2_points"}
_FLOAT_KEYS = {"wp", "wa", "g", "gt_max", "gt1_max", "beta", "theta_eval"}
_LIST_KEYS = {"n_values", "ratios", "deltas", "x_values"}

_QFI_SCENARIOS = {
    "theta0": "qfi_theta0",
    "t1": "qfi_t1",
    "heatmap": "qfi_heatmap",
    "scaling": "qfi_scaling",
}


def load_config(path: str) -> dict:
    """Parse a flat key=value config file ('#' starts a comment)."""
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _coerce(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _LIST_KEYS:
            items = [item.strip() for item in value.split(",") if item.strip()]
            if not items:
                raise ValueError("empty list")
            if key == "n_values":
                return [int(item) for item in items]
            return [float(item) for item in items]
        return value
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc


def _validate_keys(options: dict, scenario: str) -> None:
    allowed = _COMMON_KEYS | _SCENARIO_KEYS[scenario]
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) for {scenario}: {', '.join(unknown)}")


def _build_config(scenario: str, args: argparse.Namespace, file_options: dict) -> SweepConfig:
    options = dict(file_options)
    for key in ("out", "wp", "wa", "g", "interaction", "mode"):
        flag = getattr(args, key, None)
        if flag is not None:
            options[key] = flag
    if getattr(args, "n", None) is not None:
        # --n restricts multi-size scenarios to a single probe size.
        if "n" in _SCENARIO_KEYS[scenario]:
            options["n"] = args.n
        else:
            options["n_values"] = [args.n]
    _validate_keys(options, scenario)

    interaction = options.pop("interaction", "xz" if scenario == "xz_scaling" else "zz")
    if interaction not in ("zz", "xz"):
        raise ConfigError(f"interaction must be 'zz' or 'xz', got {interaction!r}")
    mode = options.pop("mode", "conjugate")
    mode_map = {"conjugate": "exact_conjugate", "period": "period"}
    if mode not in mode_map:
        raise ConfigError(f"mode must be 'period' or 'conjugate', got {mode!r}")
    params = ModelParams(
        omega_p=float(options.pop("wp", 3.0)),
        omega_a=float(options.pop("wa", 3.0)),
        g=float(options.pop("g", 1.0)),
        kind=interaction,
    )
    out_dir = options.pop("out", "results")
    return SweepConfig(
        scenario=scenario,
        params=params,
        out_dir=out_dir,
        mode=mode_map[mode],
        grids=options,
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--n", type=int, help="probe spin count for single-N scenarios")
    parser.add_argument("--wp", type=float, help="probe frequency in units of g (default 3)")
    parser.add_argument("--wa", type=float, help="ancilla frequency in units of g (default 3)")
    parser.add_argument("--g", type=float, help="coupling strength (default 1)")
    parser.add_argument("--interaction", choices=("zz", "xz"), help="coupling type")
    parser.add_argument(
        "--mode", choices=("period", "conjugate"), help="how the reversal leg is realized"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="echometry", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("trace-scan", "qfi-sweep", "cfi-map", "xz-scaling", "deviation", "dephasing"):
        p = sub.add_parser(command)
        _add_common(p)
        if command == "qfi-sweep":
            p.add_argument(
                "--scenario",
                choices=tuple(_QFI_SCENARIOS) + ("all",),
                default="all",
                help="which information sweep to run (default: all four)",
            )
    validate = sub.add_parser("validate", help="randomized oracle-equivalence suite")
    validate.add_argument("--instances", type=int, default=200)
    validate.add_argument("--seed", type=int, default=7)
    return parser


_COMMAND_SCENARIOS = {
    "trace-scan": ["trace_scan"],
    "cfi-map": ["cfi_map"],
    "xz-scaling": ["xz_scaling"],
    "deviation": ["deviation_scan"],
    "dephasing": ["dephasing_scan"],
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "validate":
            report = run_validation(instances=args.instances, seed=args.seed)
            for key, value in report.items():
                print(f"{key}={value}")
            return EXIT_OK if report["passed"] else EXIT_NUMERICAL

        file_options: dict = {}
        file_scenario = None
        if args.config:
            for key, value in load_config(args.config).items():
                if key == "scenario":
                    file_scenario = value
                else:
                    file_options[key] = _coerce(key, value)
        if file_scenario is not None and file_scenario not in _SCENARIO_KEYS:
            raise ConfigError(f"unknown scenario {file_scenario!r} in config file")

        if args.command == "qfi-sweep":
            names = (
                list(_QFI_SCENARIOS.values())
                if args.scenario == "all"
                else [_QFI_SCENARIOS[args.scenario]]
            )
            if file_scenario is not None:
                if file_scenario not in _QFI_SCENARIOS.values():
                    raise ConfigError(f"config scenario {file_scenario!r} is not a qfi sweep")
                names = [file_scenario]
        else:
            names = _COMMAND_SCENARIOS[args.command]
            if file_scenario is not None and file_scenario != names[0]:
                raise ConfigError(
                    f"config file is for scenario {file_scenario!r}, command runs {names[0]!r}"
                )
        for name in names:
            summary = run_scenario(_build_config(name, args, file_options))
            print(f"{name}: {summary['rows']} rows -> {summary['csv']}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractViolation, PeriodNotFound) as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
