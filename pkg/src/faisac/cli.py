"""Experiment driver: config ingestion, sweeps, beampattern export.

Subcommands::

    faisac run <config.json>        one solve, full trace serialized
    faisac sweep <spec.json>        parameter sweep to CSV (+ per-row solutions)
    faisac beampattern <solution.json>   angle grid CSV from a saved solution

Config units: watts or dBm for powers (field suffix picks the unit), meters
for lengths, degrees for angles. Output CSV is UTF-8 with '.' decimals and
12 significant digits; the first line is a schema comment.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import PsoOptions, fpa_solve, pso_solve
from .epg import EpgOptions
from .model import Scenario, beampattern, build_channels, probing_power, sum_rate
from .pda import PdaOptions
from .solver import BsumOptions, InfeasibleScenario, Solution, bsum_solve

__all__ = [
    "ConfigError",
    "SweepSpec",
    "load_scenario",
    "load_solver_options",
    "run_single",
    "run_sweep",
    "export_beampattern",
    "emit_csv",
    "parse_csv",
    "solution_to_dict",
    "main",
]

SWEEP_SCHEMA = "faisac-sweep-v1"
BEAMPATTERN_SCHEMA = "faisac-beampattern-v1"
RUN_SCHEMA = "faisac-run-v1"

SWEEP_COLUMNS = [
    "method",
    "parameter",
    "value",
    "repetition",
    "seed",
    "sum_rate",
    "probing",
    "power",
    "wall_ms",
    "iterations",
    "feasible",
    "solution_file",
]


class ConfigError(ValueError):
    """Config validation failure; the message names the offending field."""


def dbm_to_watts(x):
    return 10.0 ** (x / 10.0) * 1e-3


def db_to_linear(x):
    return 10.0 ** (x / 10.0)


def _get_power(cfg, base, required=True, default=None):
    """Read a power field given as either <base>_w or <base>_dbm."""
    w_key, dbm_key = f"{base}_w", f"{base}_dbm"
    if w_key in cfg and dbm_key in cfg:
        raise ConfigError(f"give only one of '{w_key}' and '{dbm_key}'")
    if w_key in cfg:
        return _as_number(cfg, w_key)
    if dbm_key in cfg:
        return dbm_to_watts(_as_number(cfg, dbm_key))
    if required and default is None:
        raise ConfigError(f"missing required field '{w_key}' (or '{dbm_key}')")
    return default


def _as_number(cfg, key):
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"field '{key}' must be a number")
    return float(val)


def _as_int(cfg, key):
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"field '{key}' must be an integer")
    return val


def load_scenario(cfg) -> Scenario:
    """Build a validated Scenario from a config dict (degrees/dB at the edge)."""
    for key in ("antennas", "wavelength_m", "user_angles_deg", "probe_angle_deg"):
        if key not in cfg:
            raise ConfigError(f"missing required field '{key}'")
    angles = cfg["user_angles_deg"]
    if not isinstance(angles, list) or not angles:
        raise ConfigError("field 'user_angles_deg' must be a nonempty list")
    lam = _as_number(cfg, "wavelength_m")
    aperture = _as_number(cfg, "aperture_m") if "aperture_m" in cfg else 10.0 * lam
    spacing = _as_number(cfg, "min_spacing_m") if "min_spacing_m" in cfg else lam / 2.0
    if "reference_gain" in cfg and "reference_gain_db" in cfg:
        raise ConfigError("give only one of 'reference_gain' and 'reference_gain_db'")
    if "reference_gain_db" in cfg:
        g0 = db_to_linear(_as_number(cfg, "reference_gain_db"))
    elif "reference_gain" in cfg:
        g0 = _as_number(cfg, "reference_gain")
    else:
        g0 = db_to_linear(-40.0)
    distances = cfg.get("user_distances_m", 100.0)
    if isinstance(distances, list):
        dist = np.asarray([float(x) for x in distances])
    else:
        dist = np.full(len(angles), float(distances))
    try:
        return Scenario(
            M=_as_int(cfg, "antennas"),
            lam=lam,
            D=aperture,
            D0=spacing,
            theta_users=np.deg2rad(np.asarray([float(a) for a in angles])),
            theta_probe=math.radians(_as_number(cfg, "probe_angle_deg")),
            sigma2=_get_power(cfg, "noise", default=dbm_to_watts(-80.0)),
            Pmax=_get_power(cfg, "power_budget", default=1.0),
            Pt=_get_power(cfg, "probe_power", default=0.0),
            g0=g0,
            alpha=_as_number(cfg, "path_loss_exponent") if "path_loss_exponent" in cfg else 2.8,
            d_users=dist,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load_solver_options(cfg, seed=None) -> BsumOptions:
    """Solver options from the optional 'solver' section of a config."""
    sol = cfg.get("solver", {})
    if not isinstance(sol, dict):
        raise ConfigError("field 'solver' must be an object")
    known = {"max_outer", "outer_tol", "patience", "enable_apv", "init_jitter",
             "multistart", "pda", "epg", "seed"}
    for key in sol:
        if key not in known:
            raise ConfigError(f"unknown solver field '{key}'")
    try:
        kwargs = dict(
            max_outer=sol.get("max_outer", 100),
            outer_tol=sol.get("outer_tol", 1e-5),
            patience=sol.get("patience", 3),
            enable_apv=sol.get("enable_apv", True),
            init_jitter=sol.get("init_jitter", 0.0),
            seed=seed if seed is not None else sol.get("seed", 0),
            pda=PdaOptions(**sol.get("pda", {})),
            epg=EpgOptions(**sol.get("epg", {})),
        )
        if "multistart" in sol:
            kwargs["multistart"] = tuple(sol["multistart"])
        opts = BsumOptions(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver options: {exc}") from exc
    return opts


def load_pso_options(cfg, seed=None) -> PsoOptions:
    pso = cfg.get("pso", {})
    if not isinstance(pso, dict):
        raise ConfigError("field 'pso' must be an object")
    try:
        opts = PsoOptions(**pso)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pso options: {exc}") from exc
    if seed is not None:
        opts.seed = seed
    return opts


def _scenario_to_dict(s: Scenario):
    return {
        "antennas": s.M,
        "wavelength_m": s.lam,
        "aperture_m": s.D,
        "min_spacing_m": s.D0,
        "user_angles_deg": list(np.rad2deg(s.theta_users)),
        "probe_angle_deg": math.degrees(s.theta_probe),
        "noise_w": s.sigma2,
        "power_budget_w": s.Pmax,
        "probe_power_w": s.Pt,
        "reference_gain": s.g0,
        "path_loss_exponent": s.alpha,
        "user_distances_m": list(s.d_users),
    }


def solution_to_dict(sol: Solution, scen: Scenario, method, seed):
    return {
        "schema": RUN_SCHEMA,
        "method": method,
        "seed": seed,
        "scenario": _scenario_to_dict(scen),
        "feasible": bool(sol.feasible),
        "converged": bool(sol.converged),
        "probe_constraint_active": scen.Pt > 0,
        "iterations": sol.iterations,
        "sum_rate": sol.sum_rate,
        "probing": sol.probing,
        "power": sol.power,
        "wall_s": sol.wall_s,
        "t": list(sol.t),
        "W": {"re": sol.W.real.tolist(), "im": sol.W.imag.tolist()},
        "trace": sol.trace,
    }


def solution_from_dict(rec):
    scen = load_scenario(rec["scenario"])
    W = np.asarray(rec["W"]["re"]) + 1j * np.asarray(rec["W"]["im"])
    t = np.asarray(rec["t"], dtype=float)
    return rec, scen, W, t


def _solve(method, scen, opts, seed):
    if method == "bsum":
        return bsum_solve(scen, opts)
    if method == "fpa":
        return fpa_solve(scen, opts)
    if method == "pso":
        return pso_solve(scen, PsoOptions(seed=seed), opts)
    raise ConfigError(f"unknown method '{method}' (expected bsum, fpa, or pso)")


def run_single(config_path, out_path=None, seed=None, fmt="json"):
    """One solve from a config file. Returns (record, exit_code)."""
    cfg = _load_json(config_path)
    scen = load_scenario(cfg)
    method = cfg.get("method", "bsum")
    seed = seed if seed is not None else cfg.get("seed", 0)
    opts = load_solver_options(cfg, seed=seed)
    try:
        sol = _solve(method, scen, opts, seed)
    except InfeasibleScenario as exc:
        record = {
            "schema": RUN_SCHEMA,
            "method": method,
            "seed": seed,
            "scenario": _scenario_to_dict(scen),
            "error": {
                "kind": "infeasible_scenario",
                "message": str(exc),
                "probing_threshold_w": exc.Pt,
                "matched_beam_ceiling_w": exc.ceiling,
            },
        }
        _write_record(record, out_path, fmt)
        return record, 1
    record = solution_to_dict(sol, scen, method, seed)
    _write_record(record, out_path, fmt)
    return record, 0 if sol.feasible else 1


def _write_record(record, out_path, fmt):
    if fmt == "csv" and "trace" in record:
        cols = ["cycle", "F", "sum_rate", "probing", "power", "wall_s"]
        rows = [{c: r[c] for c in cols} for r in record["trace"]]
        text = emit_csv(rows, cols, RUN_SCHEMA)
    else:
        text = json.dumps(record, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


@dataclass
class SweepSpec:
    """One sweep: a base scenario config, a parameter, values, methods."""

    base: dict
    parameter: str
    values: list
    methods: list
    repetitions: int = 1
    seed_base: int = 0
    out: str = "sweep.csv"

    def __post_init__(self):
        if self.parameter not in ("Pt", "M", "Pmax"):
            raise ConfigError("field 'parameter' must be one of Pt, M, Pmax")
        if not self.values:
            raise ConfigError("field 'values' must be nonempty")
        if not self.methods:
            raise ConfigError("field 'methods' must be nonempty")
        for m in self.methods:
            if m not in ("bsum", "fpa", "pso"):
                raise ConfigError(f"unknown method '{m}' in 'methods'")
        if self.repetitions < 1:
            raise ConfigError("field 'repetitions' must be >= 1")

    @classmethod
    def from_dict(cls, d):
        for key in ("base", "parameter", "values", "methods"):
            if key not in d:
                raise ConfigError(f"missing required field '{key}'")
        return cls(
            base=d["base"],
            parameter=d["parameter"],
            values=list(d["values"]),
            methods=list(d["methods"]),
            repetitions=d.get("repetitions", 1),
            seed_base=d.get("seed_base", 0),
            out=d.get("out", "sweep.csv"),
        )


def _apply_parameter(cfg, parameter, value):
    cfg = dict(cfg)
    if parameter == "Pt":
        cfg.pop("probe_power_dbm", None)
        cfg["probe_power_w"] = float(value)
    elif parameter == "Pmax":
        cfg.pop("power_budget_dbm", None)
        cfg["power_budget_w"] = float(value)
    else:
        cfg["antennas"] = int(value)
    return cfg


def _sweep_point(args):
    cfg, parameter, value, method, rep, seed, sol_path = args
    t0 = time.perf_counter()
    row = {
        "method": method,
        "parameter": parameter,
        "value": value,
        "repetition": rep,
        "seed": seed,
        "sum_rate": float("nan"),
        "probing": float("nan"),
        "power": float("nan"),
        "wall_ms": float("nan"),
        "iterations": 0,
        "feasible": False,
        "solution_file": "",
    }
    try:
        scen = load_scenario(cfg)
        opts = load_solver_options(cfg, seed=seed)
        sol = _solve(method, scen, opts, seed)
    except (ConfigError, InfeasibleScenario, ValueError):
        # per-point failure (bad derived scenario, layout does not fit, ...)
        row["wall_ms"] = (time.perf_counter() - t0) * 1e3
        return row
    row.update(
        sum_rate=sol.sum_rate,
        probing=sol.probing,
        power=sol.power,
        wall_ms=sol.wall_s * 1e3,
        iterations=sol.iterations,
        feasible=bool(sol.feasible),
    )
    if sol_path is not None:
        rec = solution_to_dict(sol, scen, method, seed)
        Path(sol_path).write_text(json.dumps(rec), encoding="utf-8")
        row["solution_file"] = Path(sol_path).name
    return row


def run_sweep(spec: SweepSpec, out_path=None, workers=1, save_solutions=True):
    """Run every (method, value, repetition) point; returns (rows, exit_code).

    Rows are emitted in deterministic spec order regardless of worker
    completion order; failed points stay in the table with feasible=false.
    """
    out = Path(out_path or spec.out)
    sol_dir = None
    if save_solutions:
        sol_dir = out.with_name(out.stem + "_solutions")
        sol_dir.mkdir(parents=True, exist_ok=True)
    tasks = []
    idx = 0
    for value in spec.values:
        cfg = _apply_parameter(spec.base, spec.parameter, value)
        for method in spec.methods:
            for rep in range(spec.repetitions):
                sol_path = None if sol_dir is None else sol_dir / f"row_{idx:04d}.json"
                tasks.append(
                    (cfg, spec.parameter, value, method, rep, spec.seed_base + rep, sol_path)
                )
                idx += 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(emit_csv(rows, SWEEP_COLUMNS, SWEEP_SCHEMA) + "\n", encoding="utf-8")
    return rows, 0 if all(r["feasible"] for r in rows) else 1


def export_beampattern(solution_path, out_path=None, start_deg=0.0, stop_deg=180.0,
                       step_deg=0.5):
    """Evaluate the saved solution's beampattern on an angle grid; CSV out."""
    rec, scen, W, t = solution_from_dict(_load_json(solution_path))
    grid_deg = np.arange(start_deg, stop_deg + 0.5 * step_deg, step_deg)
    powers = beampattern(W, t, scen.lam, np.deg2rad(grid_deg))
    rows = [
        {"angle_deg": float(a), "probing_w": float(p)}
        for a, p in zip(grid_deg, powers)
    ]
    text = emit_csv(rows, ["angle_deg", "probing_w"], BEAMPATTERN_SCHEMA)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return rows


def recompute_metrics(rec):
    """Metrics recomputed from the serialized (W, t) of a solution record."""
    _, scen, W, t = solution_from_dict(rec)
    ch = build_channels(scen, t)
    return {
        "sum_rate": sum_rate(ch, W, scen.sigma2),
        "probing": probing_power(W, t, scen.theta_probe, scen.lam),
        "power": float(np.sum(np.abs(W) ** 2)),
    }


def _fmt_value(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{x:.12g}"
    return str(x)


def emit_csv(rows, columns, schema):
    lines = [f"# schema: {schema}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_value(row[c]) for c in columns))
    return "\n".join(lines)


def _parse_value(s):
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def parse_csv(text):
    """Inverse of :func:`emit_csv`; returns (schema, columns, rows)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or not lines[0].startswith("# schema: "):
        raise ValueError("missing schema comment line")
    schema = lines[0][len("# schema: "):]
    columns = lines[1].split(",")
    rows = []
    for ln in lines[2:]:
        parts = ln.split(",")
        if len(parts) != len(columns):
            raise ValueError(f"row has {len(parts)} fields, expected {len(columns)}")
        rows.append({c: _parse_value(p) for c, p in zip(columns, parts)})
    return schema, columns, rows


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="faisac",
        description="Joint beamformer and antenna-position optimization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one configured instance")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--format", choices=("csv", "json"), default="json")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p_sweep.add_argument("spec")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--no-solutions", action="store_true",
                         help="skip per-row solution JSON files")

    p_beam = sub.add_parser("beampattern", help="export a beampattern CSV")
    p_beam.add_argument("solution")
    p_beam.add_argument("--out", default=None)
    p_beam.add_argument("--start-deg", type=float, default=0.0)
    p_beam.add_argument("--stop-deg", type=float, default=180.0)
    p_beam.add_argument("--step-deg", type=float, default=0.5)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            _, code = run_single(args.config, args.out, args.seed, args.format)
            return code
        if args.command == "sweep":
            spec = SweepSpec.from_dict(_load_json(args.spec))
            if args.seed is not None:
                spec.seed_base = args.seed
            _, code = run_sweep(spec, args.out, args.workers,
                                save_solutions=not args.no_solutions)
            return code
        if args.command == "beampattern":
            export_beampattern(args.solution, args.out, args.start_deg,
                               args.stop_deg, args.step_deg)
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
