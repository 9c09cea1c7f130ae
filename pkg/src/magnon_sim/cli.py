"""
Command-line entry point: ``magnon-sim <command> [--preset NAME] [--config PATH] [--set key=value ...]``.

Configs are nested JSON objects mirroring :class:`RunConfig`; ``--set``
takes dotted keys such as ``params.kappa=0.002`` or ``grid.axis1.count=11``.
Frequencies are cyclic GHz throughout.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import numpy as np

from .dynamics import (
    LyapunovResidualError,
    NotHurwitzError,
    PropagationConfig,
    PropagationError,
    compare_models,
    evolve_model,
)
from .gaussian import CAVITY, MAGNON_1, MAGNON_2, UnphysicalStateError
from .models import TWO_PI, Model, ParameterError, PhysicalParams, derive_params, rwa_validity
from .sweep import Axis, GridSpec, SweepConsistencyError, default_jobs, ratio_sweep, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMPARE_THRESHOLD = 0.10


class ConfigError(ValueError):
    pass


@dataclass
class AxisConfig:
    name: str = "Delta_1"
    min: float = -1.0
    max: float = 1.0
    count: int = 51


@dataclass
class GridConfig:
    axis1: AxisConfig = field(default_factory=AxisConfig)
    axis2: Optional[AxisConfig] = field(default_factory=lambda: AxisConfig("Delta_2"))
    # cyclic-GHz values for the keys not on an axis
    fixed: dict = field(default_factory=lambda: {"g1": 0.001, "g2": 0.001})


@dataclass
class PropagationSettings:
    t_end: float = 8000.0
    dt: Optional[float] = None
    record_interval: Optional[float] = 1.0
    steady_detect_tol: Optional[float] = 1e-8
    method: str = "rk4"
    entanglement: bool = False


@dataclass
class RatioSweepConfig:
    g2_values: list = field(default_factory=lambda: [0.01, 0.03, 0.05])
    kappa_values: list = field(default_factory=lambda: [0.005])
    ratios: AxisConfig = field(default_factory=lambda: AxisConfig("g1_over_g2", 0.0, 0.99, 100))
    fixed: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    """Everything one command needs.  Parameter defaults are the driven reference point with 1 MHz decays."""

    params: dict = field(default_factory=lambda: dataclasses.asdict(PhysicalParams()))
    model: str = "rwa"
    task: str = "both"
    pair: str = "full-rwa"
    grid: GridConfig = field(default_factory=GridConfig)
    propagation: PropagationSettings = field(default_factory=PropagationSettings)
    ratio_sweep: RatioSweepConfig = field(default_factory=RatioSweepConfig)
    output: Optional[str] = None
    format: str = "csv"
    jobs: Optional[int] = None


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if not path and key not in out:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, where + ".")
        else:
            out[key] = value
    return out


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_dotted(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    if parts[0] not in cfg:
        raise ConfigError(f"unknown config key {key!r}")
    node = cfg
    for part in parts[:-1]:
        if node.get(part) is None:
            node[part] = {}
        if not isinstance(node[part], dict):
            raise ConfigError(f"cannot set {key!r}: {part!r} is not a section")
        node = node[part]
    node[parts[-1]] = _parse_value(raw)


def load_preset(name: str) -> dict:
    try:
        text = resources.files("magnon_sim.presets").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown preset {name!r}") from None
    return json.loads(text)


def _axis(d: Optional[dict]) -> Optional[AxisConfig]:
    return None if d is None else AxisConfig(**d)


def build_config(preset: Optional[str], path: Optional[str], sets: list[str]) -> RunConfig:
    raw = dataclasses.asdict(RunConfig())
    try:
        if preset:
            raw = _merge(raw, load_preset(preset))
        if path:
            with open(path, encoding="utf-8") as fh:
                raw = _merge(raw, json.load(fh))
        for s in sets:
            _set_dotted(raw, s)
        grid = raw["grid"]
        rs = raw["ratio_sweep"]
        cfg = RunConfig(
            params=raw["params"],
            model=raw["model"],
            task=raw["task"],
            pair=raw["pair"],
            grid=GridConfig(_axis(grid["axis1"]), _axis(grid.get("axis2")), dict(grid.get("fixed") or {})),
            propagation=PropagationSettings(**raw["propagation"]),
            ratio_sweep=RatioSweepConfig(rs["g2_values"], rs["kappa_values"], _axis(rs["ratios"]), dict(rs.get("fixed") or {})),
            output=raw["output"],
            format=raw["format"],
            jobs=raw["jobs"],
        )
    except (OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from None
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    return cfg


def physical_params(cfg: RunConfig) -> PhysicalParams:
    try:
        return PhysicalParams(**cfg.params)
    except TypeError as exc:
        raise ConfigError(f"params: {exc}") from None


# --- output -----------------------------------------------------------------


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else "%.17g" % value
    return str(value)


def _json_value(value: Any) -> Any:
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    return value


def render(cfg: RunConfig, columns: list[str], rows: list[list[Any]], summary: list[str]) -> str:
    header = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    if cfg.format == "json":
        doc = {
            "config": dataclasses.asdict(cfg),
            "columns": columns,
            "rows": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
            "summary": summary,
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# config {header}\n")
    for line in summary:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------


def cmd_params(cfg: RunConfig) -> int:
    p = physical_params(cfg)
    d = derive_params(p)
    rows = [["xi", d.xi, d.xi]]
    for name in ("g1", "g2", "varpi", "Delta_1", "Delta_2", "Omega_1", "Omega_2", "G", "J_eff", "Gamma_eff"):
        value = getattr(d, name)
        rows.append([name, None if value is None else value / TWO_PI, value])
    rows.append(["r_squeeze", d.r_squeeze, d.r_squeeze])
    rows.append(["rwa_validity", rwa_validity(p), rwa_validity(p)])
    text = render(cfg, ["quantity", "cyclic_GHz", "angular_rad_per_ns"], rows, [])
    emit(cfg, text)
    return EXIT_OK


def _grid_spec(cfg: RunConfig, task: str) -> GridSpec:
    g = cfg.grid
    return GridSpec(
        axis1=Axis(**dataclasses.asdict(g.axis1)),
        axis2=None if g.axis2 is None else Axis(**dataclasses.asdict(g.axis2)),
        fixed=g.fixed,
        model=Model(cfg.model),
        task=task,
    )


def _axis_columns(spec: GridSpec) -> list[str]:
    return [ax.name for ax in spec.axes]


def cmd_stability_map(cfg: RunConfig) -> int:
    spec = _grid_spec(cfg, "stability")
    res = run_sweep(spec, cfg.jobs)
    rows = [list(r.coords) + [r.stable, r.margin] for r in res.rows]
    n_stable = sum(bool(r.stable) for r in res.rows)
    emit(cfg, render(cfg, _axis_columns(spec) + ["stable", "margin"], rows, [f"stable cells {n_stable}/{len(rows)}"]))
    return EXIT_OK


def cmd_ent_map(cfg: RunConfig) -> int:
    spec = _grid_spec(cfg, "both")
    res = run_sweep(spec, cfg.jobs)
    rows = [list(r.coords) + [r.stable, r.e_cm1, r.e_cm2, r.e_m1m2, r.error] for r in res.rows]
    e = res.column("e_m1m2")
    summary = []
    if not np.all(np.isnan(e)):
        k = int(np.nanargmax(e))
        summary.append(f"max E_m1_m2 {e[k]:.6f} at {dict(zip(_axis_columns(spec), res.rows[k].coords))}")
    errors = [r for r in res.rows if r.error]
    for r in errors:
        print(f"cell {r.coords}: {r.error}", file=sys.stderr)
    cols = _axis_columns(spec) + ["stable", "E_c_m1", "E_c_m2", "E_m1_m2", "error"]
    emit(cfg, render(cfg, cols, rows, summary))
    return EXIT_OK


def _propagation(cfg: RunConfig) -> PropagationConfig:
    s = cfg.propagation
    return PropagationConfig(
        t_end=s.t_end,
        dt=s.dt,
        record_interval=s.record_interval,
        steady_detect_tol=s.steady_detect_tol,
        method=s.method,
    )


def _pop_names(model: Model) -> list[str]:
    return ["n_m1", "n_m2"] if model is Model.EFFECTIVE else ["n_cavity", "n_m1", "n_m2"]


def _en_columns(traj, model: Model) -> tuple[list[str], list[np.ndarray]]:
    if model is Model.EFFECTIVE:
        return ["E_m1_m2"], [traj.log_negativity(0, 1)]
    pairs = [("E_c_m1", CAVITY, MAGNON_1), ("E_c_m2", CAVITY, MAGNON_2), ("E_m1_m2", MAGNON_1, MAGNON_2)]
    return [n for n, _, _ in pairs], [traj.log_negativity(i, j) for _, i, j in pairs]


def cmd_evolve(cfg: RunConfig) -> int:
    p = physical_params(cfg)
    model = Model(cfg.model)
    traj = evolve_model(p, model, _propagation(cfg))
    cols = ["t_ns"] + _pop_names(model)
    data = [traj.times] + list(traj.populations().T)
    if cfg.propagation.entanglement:
        names, values = _en_columns(traj, model)
        cols += names
        data += values
    rows = [list(r) for r in zip(*data)]
    summary = [f"converged {int(traj.converged)} at t = {traj.times[-1]:.6g} ns, dt = {traj.dt}"]
    emit(cfg, render(cfg, cols, rows, summary))
    return EXIT_OK


def cmd_compare(cfg: RunConfig, check: bool) -> int:
    p = physical_params(cfg)
    cmp = compare_models(p, _propagation(cfg), cfg.pair)
    model_a, model_b = (Model(x) for x in cmp.pair.split("_vs_"))
    cols = ["t_ns"] + [f"{n}_{model_a.value}" for n in cmp.observables] + [f"{n}_{model_b.value}" for n in cmp.observables]
    rows = [[t, *a, *b] for t, a, b in zip(cmp.times, cmp.reference_values, cmp.approximate_values)]
    converged = cmp.reference.converged and cmp.approximate.converged
    summary = [
        f"sup_divergence {cmp.sup_divergence:.6g}",
        "steady_rel_diff " + " ".join(f"{n}={v:.6g}" for n, v in zip(cmp.observables, cmp.steady_rel_diff)),
        f"converged {int(converged)}",
    ]
    emit(cfg, render(cfg, cols, rows, summary))
    if check:
        metric = float(np.max(cmp.steady_rel_diff)) if cmp.pair == "full_vs_rwa" else cmp.sup_divergence
        if not converged or metric >= COMPARE_THRESHOLD:
            print(f"compare check failed: metric {metric:.4g} (threshold {COMPARE_THRESHOLD}), converged {converged}", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_ratio_sweep(cfg: RunConfig) -> int:
    rs = cfg.ratio_sweep
    curves = ratio_sweep(rs.g2_values, Axis(**dataclasses.asdict(rs.ratios)), rs.kappa_values, rs.fixed, cfg.jobs)
    rows = []
    summary = []
    for k, c in enumerate(curves):
        for ratio, e in zip(c.ratios, c.e_m1m2):
            rows.append([k, c.g2, c.kappa, ratio, e])
        summary.append(f"curve {k} g2={c.g2:g} kappa={c.kappa:g}: argmax ratio {c.argmax_ratio:.6g}, max E {c.max_e:.6g}, failed cells {c.errors}")
    emit(cfg, render(cfg, ["curve_id", "g2", "kappa", "ratio", "E_m1_m2"], rows, summary))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--preset", help="bundled preset, e.g. fig2 or fig7b")
    common.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE", help="override a dotted config key")
    common.add_argument("--output", help="write the table here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--jobs", type=int, help="worker processes (default $MAGNON_SIM_JOBS or all cores)")

    parser = argparse.ArgumentParser(prog="magnon-sim", description="Gaussian dynamics and entanglement of a driven cavity-magnon system")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="derived parameters")
    sub.add_parser("stability-map", parents=[common], help="stability over a parameter grid")
    sub.add_parser("ent-map", parents=[common], help="steady-state entanglement over a parameter grid")
    sub.add_parser("evolve", parents=[common], help="covariance dynamics from the vacuum")
    cmp = sub.add_parser("compare", parents=[common], help="dynamics of two models side by side")
    cmp.add_argument("--pair", choices=["full-rwa", "rwa-effective"])
    cmp.add_argument("--check", action="store_true", help=f"exit 3 unless the models agree within {COMPARE_THRESHOLD:.0%}")
    sub.add_parser("ratio-sweep", parents=[common], help="magnon entanglement against g1/g2")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args.preset, args.config, args.sets)
        if args.output:
            cfg.output = args.output
        if args.format:
            cfg.format = args.format
        if args.jobs is not None:
            cfg.jobs = args.jobs
        if cfg.jobs is None:
            cfg.jobs = default_jobs()
        if getattr(args, "pair", None):
            cfg.pair = args.pair
        cfg.model = Model(cfg.model).value
        if args.command == "params":
            return cmd_params(cfg)
        if args.command == "stability-map":
            return cmd_stability_map(cfg)
        if args.command == "ent-map":
            return cmd_ent_map(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "compare":
            return cmd_compare(cfg, args.check)
        return cmd_ratio_sweep(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad enum values or field validation from the dataclasses
        if isinstance(exc, (UnphysicalStateError, NotHurwitzError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PropagationError, LyapunovResidualError, SweepConsistencyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
