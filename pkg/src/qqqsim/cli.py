"""Command-line interface: parameter derivation, protocol simulation and
parameter sweeps.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .circuit_model import derive_spin_model, load_circuit_json
from .dynamics import CollapseSet, trajectory_to_csv
from .errors import ConfigError, IntegrationError, QqqError
from .runner import parse_grid, run_config, sweep_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _manifest_path(out_path: str) -> str:
    return out_path + ".manifest.json"


def _write_manifest(command: str, input_path: str, outputs: list[str],
                    settings: dict, t_start: float, error: str | None) -> None:
    """One JSON record per run, written next to the primary output even
    when the run fails, so artifacts are traceable."""
    if not outputs:
        return
    manifest = {
        "command": command,
        "input": os.path.abspath(input_path),
        "outputs": [os.path.abspath(p) for p in outputs],
        "integrator": settings,
        "version": __version__,
        "duration_s": round(time.monotonic() - t_start, 3),
        "error": error,
    }
    try:
        with open(_manifest_path(outputs[0]), "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"warning: could not write manifest: {exc}", file=sys.stderr)


def _parse_collapse_flag(text: str):
    """default -> built-in T1/T2, none -> closed system, 'T1,T2' in us."""
    if text == "default":
        return CollapseSet()
    if text == "none":
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("--collapse expects 'default', 'none' or 'T1_us,T2_us'")
    try:
        t1, t2 = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"--collapse: bad number in {text!r}") from exc
    return CollapseSet(T1=t1 * 1e-6, T2=t2 * 1e-6)


def cmd_derive(args) -> int:
    cp = load_circuit_json(args.input)
    sp = derive_spin_model(cp)
    text = json.dumps(sp.to_json_dict(), indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    t_start = time.monotonic()
    outputs = [args.out] + ([args.report] if args.report else [])
    settings = {"carrier_mode": args.carrier or "config",
                "collapse": args.collapse}
    error = None
    try:
        with open(args.input) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.input}: top level must be a JSON object")
        collapse_override = "config" if args.collapse is None \
            else _parse_collapse_flag(args.collapse)
        result = run_config(cfg, base_dir=os.path.dirname(args.input) or ".",
                            carrier_override=args.carrier,
                            collapse_override=collapse_override,
                            want_report=bool(args.report))
        settings["carrier_mode"] = result.trajectory.metadata["carrier_mode"]
        trajectory_to_csv(result.trajectory, args.out)
        if args.report:
            with open(args.report, "w") as fh:
                json.dump(result.report.to_json_dict(), fh, indent=2)
                fh.write("\n")
        return EXIT_OK
    except json.JSONDecodeError as exc:
        error = f"{args.input}: not valid JSON ({exc})"
        raise ConfigError(error) from exc
    except QqqError as exc:
        error = str(exc)
        raise
    finally:
        _write_manifest("simulate", args.input, outputs, settings, t_start, error)


def cmd_sweep(args) -> int:
    t_start = time.monotonic()
    settings = {"param": args.param, "grid": args.grid}
    error = None
    try:
        with open(args.input) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.input}: top level must be a JSON object")
        grid = parse_grid(args.grid)
        sweep = sweep_config(cfg, args.param, grid,
                             base_dir=os.path.dirname(args.input) or ".")
        sweep.to_csv(args.out)
        for value, msg in sweep.errors.items():
            print(f"warning: point {args.param}={value:g} failed: {msg}",
                  file=sys.stderr)
        return EXIT_OK
    except json.JSONDecodeError as exc:
        error = f"{args.input}: not valid JSON ({exc})"
        raise ConfigError(error) from exc
    except QqqError as exc:
        error = str(exc)
        raise
    finally:
        _write_manifest("sweep", args.input, [args.out], settings, t_start, error)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qqqsim",
        description="Qubit-qutrit-qubit spin-model derivation and simulation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="circuit-element JSON to spin-model JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("simulate", help="run one protocol config")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--report", default=None, help="fidelity report JSON path")
    p.add_argument("--carrier", choices=("rwa", "cosine"), default=None,
                   help="override the config's carrier mode")
    p.add_argument("--collapse", default=None,
                   help="override collapse: default | none | T1_us,T2_us")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="repeat a protocol over a parameter grid")
    p.add_argument("input")
    p.add_argument("--param", required=True)
    p.add_argument("--grid", required=True, help="start:stop:count (pi allowed)")
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IntegrationError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QqqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
