"""Command-line front end.

Three subcommands, all driven by a JSON config file (schema documented
in the README):

* ``simulate`` -- run one experiment, write the trajectory CSV and the
  report JSON;
* ``verify``   -- run the full inequality suite and print a results
  table; exits 1 if any inequality is violated;
* ``sweep``    -- sweep chain lengths, write the per-length summary CSV
  and the exponential-fit JSON.

Exit codes: 0 success, 1 bound violation, 2 config error (the message
names the offending key), 3 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .harness import (
    ConfigError,
    ExperimentConfig,
    _check_keys,
    execute_experiment,
    sweep_chain_lengths,
)
from .models import DEFAULT_DIMENSION_CAP, DimensionCapError
from .serialize import canonical_json, config_hash, write_csv
from .verify import VerifyConfig, run_verification

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_CAP = 3

_CAP_ENV = "QEQLAB_DIM_CAP"


def _load_config(path: str, overrides) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(path, "config file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(path, "top level must be a JSON object")
    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "override must look like key=value")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, "override path crosses a non-object")
        node[parts[-1]] = parsed
    return raw


def _apply_cap_env(raw: dict):
    cap = os.environ.get(_CAP_ENV)
    if cap is not None:
        try:
            raw["dimension_cap"] = int(cap)
        except ValueError:
            raise ConfigError(_CAP_ENV, "environment override must be an integer") from None


def _write_manifest(outdir: Path, config_path: str, resolved: dict, timings: dict):
    manifest = {
        "config_path": str(config_path),
        "config_hash": config_hash(resolved),
        "artifact_version": __version__,
        "output_dir": str(outdir),
        "timings_seconds": timings,
    }
    (outdir / "manifest.json").write_text(canonical_json(manifest) + "\n")


def _outdir(raw: dict, args) -> Path:
    out = Path(args.out if args.out else raw.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    raw = _load_config(args.config, args.set)
    outdir = _outdir(raw, args)
    raw.pop("output_dir", None)
    _apply_cap_env(raw)
    config = ExperimentConfig.from_dict(raw)
    t0 = time.monotonic()
    report, system, trajectory = execute_experiment(config)
    t_run = time.monotonic() - t0

    label = config.label
    t1 = time.monotonic()
    trajectory_csv(outdir / f"trajectory_{label}.csv", system, trajectory)
    (outdir / f"report_{label}.json").write_text(canonical_json(report.to_json_dict()) + "\n")
    t_write = time.monotonic() - t1
    _write_manifest(outdir, args.config, config.resolved_dict(),
                    {"run": t_run, "write": t_write})
    print(f"simulate: wrote trajectory_{label}.csv and report_{label}.json to {outdir}")
    return EXIT_OK


def trajectory_csv(path, system, trajectory):
    """Emit the plot-data CSV.

    Columns are a public contract: time, the expectation value, the
    three entropies, and the equilibrium reference value of each.
    """
    eq = system.equilibrium
    header = ["t", "expectation", "shannon", "observational", "boltzmann",
              "expectation_eq", "shannon_eq", "observational_eq", "boltzmann_eq"]
    rows = []
    for k in range(len(trajectory.times)):
        rows.append([
            trajectory.times[k],
            None if trajectory.expectation is None else trajectory.expectation[k],
            trajectory.shannon[k],
            trajectory.observational[k],
            trajectory.boltzmann[k],
            eq.expectation,
            eq.shannon,
            eq.observational,
            eq.boltzmann,
        ])
    write_csv(path, header, rows)


def cmd_verify(args) -> int:
    raw = _load_config(args.config, args.set)
    outdir = _outdir(raw, args)
    raw.pop("output_dir", None)
    config = VerifyConfig.from_dict(raw)
    t0 = time.monotonic()
    reports = run_verification(config)
    t_run = time.monotonic() - t0

    widths = (46, 13, 13, 13, 11)
    print(f"{'inequality':<{widths[0]}}{'lhs':>{widths[1]}}{'rhs':>{widths[2]}}"
          f"{'margin':>{widths[3]}}{'status':>{widths[4]}}")
    violated = []
    for rep in reports:
        print(f"{_context_name(rep):<{widths[0]}}{rep.lhs:>{widths[1]}.4e}"
              f"{rep.rhs:>{widths[2]}.4e}{rep.margin:>{widths[3]}.4e}{rep.status:>{widths[4]}}")
        if not rep.holds:
            violated.append(rep)
    (outdir / "verify_report.json").write_text(
        canonical_json([rep.to_json_dict() for rep in reports]) + "\n")
    _write_manifest(outdir, args.config, {"verify": True, **raw}, {"run": t_run})
    if violated:
        print(f"{len(violated)} violated bound(s):")
        for rep in violated:
            print(f"  {rep.name}: lhs={rep.lhs!r} rhs={rep.rhs!r} parameters={rep.parameters!r}")
        return EXIT_VIOLATION
    print(f"all {len(reports)} checks hold")
    return EXIT_OK


def _context_name(report) -> str:
    system = report.parameters.get("system")
    T = report.parameters.get("T")
    name = report.name
    if system:
        name += f"[{system}"
        name += f", T={T:g}]" if T is not None else "]"
    elif T is not None:
        name += f"[T={T:g}]"
    return name


def cmd_sweep(args) -> int:
    raw = _load_config(args.config, args.set)
    outdir = _outdir(raw, args)
    raw.pop("output_dir", None)
    _apply_cap_env(raw)
    _check_keys("sweep", raw, {"label", "seed", "sites", "t_max", "late_window",
                               "axis", "dimension_cap", "exact_gap_limit"})
    try:
        sites = [int(n) for n in raw.get("sites", (5, 6, 7, 8, 9))]
        kwargs = {
            "seed": int(raw.get("seed", 0)),
            "t_max": float(raw.get("t_max", 100.0)),
            "late_window": tuple(float(t) for t in raw.get("late_window", (50.0, 80.0))),
            "axis": str(raw.get("axis", "z")),
            "dimension_cap": int(raw.get("dimension_cap", DEFAULT_DIMENSION_CAP)),
        }
        if "exact_gap_limit" in raw:
            kwargs["exact_gap_limit"] = int(raw["exact_gap_limit"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("sweep", str(exc)) from exc
    t0 = time.monotonic()
    sweep = sweep_chain_lengths(sites, **kwargs)
    t_run = time.monotonic() - t0

    header = ["sites", "outcomes", "d_eff", "delta", "late_abs_dev",
              "dim", "delta_alt_prefactor", "nu"]
    rows = [[row[key] for key in header] for row in sweep["rows"]]
    write_csv(outdir / "sweep_summary.csv", header, rows)
    fits = {
        "delta_fit": sweep["delta_fit"],
        "late_fit": sweep["late_fit"],
        "delta_inversions": sweep["delta_inversions"],
        "late_inversions": sweep["late_inversions"],
        "late_window": sweep["late_window"],
    }
    (outdir / "sweep_fits.json").write_text(canonical_json(fits) + "\n")
    _write_manifest(outdir, args.config, {"sweep": True, **raw}, {"run": t_run})
    print(f"sweep: wrote sweep_summary.csv and sweep_fits.json to {outdir}")
    print(f"delta fit: a={fits['delta_fit']['a']:.4g} b={fits['delta_fit']['b']:.4g}; "
          f"late-time fit: a={fits['late_fit']['a']:.4g} b={fits['late_fit']['b']:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qeqlab",
        description="Exact-diagonalization laboratory for observable-entropy "
                    "equilibration bounds.",
    )
    parser.add_argument("--version", action="version", version=f"qeqlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("simulate", cmd_simulate, "run one experiment and write trajectory/report files"),
        ("verify", cmd_verify, "run the full inequality suite"),
        ("sweep", cmd_sweep, "sweep chain lengths and fit the scaling curves"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("config", help="path to the JSON config file")
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (dotted path, JSON value)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionCapError as exc:
        print(f"dimension cap: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
