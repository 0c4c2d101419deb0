"""Command-line front end.

    inertial-kuramoto simulate   --config run.toml --out results/
    inertial-kuramoto check      --config run.toml --which thm2|thm3|n3
    inertial-kuramoto sweep      --config sweep.toml --format csv
    inertial-kuramoto montecarlo --config mc.toml --seed 7

Configs are flat TOML documents; vectors are arrays. Unknown keys are
rejected. Exit codes: 0 success, 1 a hypothesis or verdict failed,
2 the configuration is invalid, 3 the integration failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .integrator import IntegrationError, IntegratorConfig, Trajectory, integrate
from .metrics import (
    detect_frequency_sync,
    detect_phase_sync,
    diameter,
    diameter_rate_series,
    energy_ledger,
    max_diameter,
)
from .model import ConfigurationError, DomainError, ModelParams, PhaseState
from .scenarios import CounterexampleConfig, EnsembleSpec, run_counterexample, run_n3_montecarlo
from .theory import (
    OBJECTIVES,
    HypothesisViolation,
    Thm2Params,
    check_n3,
    check_thm2,
    check_thm3,
    feasible_search,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTEGRATION = 0, 1, 2, 3

MODEL_KEYS = {"m", "K", "omega", "N"}
INIT_KEYS = {"theta0", "dtheta0", "phase_range", "velocity_range", "scenario", "eps", "a"}
INTEGRATOR_KEYS = {"method", "dt", "rel_tol", "abs_tol", "t_end", "sample_every"}
SYNC_KEYS = {"eps_freq", "eps_phase", "window"}
CONDITION_KEYS = {"M", "alpha", "beta", "mu", "lambda"}

SWEEP_KEYS = {"objective", "objectives", "resolution", "lambda_span"}
ENSEMBLE_KEYS = {"count", "omega_range", "horizon"}
# One vocabulary for every command, so a single file can drive several of
# them; keys a command does not use are ignored, anything else is an error.
ALLOWED = (
    MODEL_KEYS | INIT_KEYS | INTEGRATOR_KEYS | SYNC_KEYS | CONDITION_KEYS | SWEEP_KEYS | ENSEMBLE_KEYS | {"seed"}
)
COMMANDS = ("simulate", "check", "sweep", "montecarlo")

TRAJECTORY_COLUMNS = ("t", "theta", "dtheta", "D", "Ddot", "E_N")


class ConfigError(Exception):
    """Raised for anything that should end the process with exit status 2."""


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    unknown = sorted(set(cfg) - ALLOWED)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in cfg.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; {key!r} is a table")
    return cfg


def _num(cfg: dict, key: str, default: Any = None, required: bool = False) -> Any:
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {value!r}")
    return value


def _vec(cfg: dict, key: str, length: int | None = None) -> np.ndarray | None:
    if key not in cfg:
        return None
    value = cfg[key]
    if not isinstance(value, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        raise ConfigError(f"{key!r} must be an array of numbers")
    if length is not None and len(value) != length:
        raise ConfigError(f"{key!r} must have {length} entries, got {len(value)}")
    return np.array(value, dtype=np.float64)


def _interval(cfg: dict, key: str) -> tuple[float, float] | None:
    v = _vec(cfg, key, 2)
    return None if v is None else (float(v[0]), float(v[1]))


def model_from(cfg: dict) -> ModelParams:
    omega = _vec(cfg, "omega")
    if omega is None:
        raise ConfigError("missing required key 'omega'")
    n = _num(cfg, "N")
    if n is not None and n != omega.size:
        raise ConfigError(f"N={n} does not match the {omega.size} entries of omega")
    return ModelParams(m=_num(cfg, "m", required=True), K=_num(cfg, "K", required=True), omega=omega)


def _seed(cfg: dict, override: int | None) -> int:
    seed = override if override is not None else cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


def initial_from(cfg: dict, model: ModelParams, seed: int) -> PhaseState:
    """Explicit ``theta0``/``dtheta0`` or a seeded uniform draw over ``phase_range``/``velocity_range``."""
    explicit = "theta0" in cfg or "dtheta0" in cfg
    random = "phase_range" in cfg or "velocity_range" in cfg
    if explicit and random:
        raise ConfigError("give either theta0/dtheta0 or phase_range/velocity_range, not both")
    if explicit:
        theta = _vec(cfg, "theta0", model.N)
        dtheta = _vec(cfg, "dtheta0", model.N)
        if theta is None:
            raise ConfigError("missing required key 'theta0'")
        return PhaseState(0.0, theta, np.zeros(model.N) if dtheta is None else dtheta)
    if random:
        rng = np.random.default_rng(seed)
        pr = _interval(cfg, "phase_range") or (-math.pi, math.pi)
        vr = _interval(cfg, "velocity_range") or (0.0, 0.0)
        return PhaseState(0.0, rng.uniform(*pr, size=model.N), rng.uniform(*vr, size=model.N))
    raise ConfigError("no initial condition: give theta0/dtheta0, phase_range/velocity_range, or a scenario")


def integrator_from(cfg: dict, t_end: float | None = None) -> IntegratorConfig:
    method = cfg.get("method", "rk4")
    if not isinstance(method, str):
        raise ConfigError("'method' must be a string")
    return IntegratorConfig(
        t_end=t_end if t_end is not None else _num(cfg, "t_end", required=True),
        method=method,
        dt=_num(cfg, "dt"),
        rel_tol=_num(cfg, "rel_tol", 1e-9),
        abs_tol=_num(cfg, "abs_tol", 1e-11),
        sample_every=_num(cfg, "sample_every", 1),
    )


# --------------------------------------------------------------------------
# trajectory files
# --------------------------------------------------------------------------


def trajectory_header(N: int) -> str:
    cols = ["t"]
    cols += [f"theta_{i}" for i in range(1, N + 1)]
    cols += [f"dtheta_{i}" for i in range(1, N + 1)]
    cols += ["D", "Ddot", "E_N"]
    return ",".join(cols)


def trajectory_table(traj: Trajectory) -> np.ndarray:
    D = diameter(traj.theta)
    Ddot = diameter_rate_series(traj.theta, traj.dtheta)
    E = np.sum(traj.dtheta**2, axis=1)
    return np.column_stack([traj.t, traj.theta, traj.dtheta, D, Ddot, E])


def write_trajectory_csv(traj: Trajectory, path: str | Path, seed: int) -> None:
    table = trajectory_table(traj)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# seed={seed}\n")
        fh.write(trajectory_header(traj.params.N) + "\n")
        # repr-style 17 significant digits, '.' decimal point regardless of locale
        for row in table:
            fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


def read_trajectory_csv(path: str | Path) -> dict[str, Any]:
    """Parse a trajectory CSV back into arrays keyed by column group."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    meta = {}
    while lines and lines[0].startswith("#"):
        key, _, value = lines.pop(0)[1:].strip().partition("=")
        meta[key] = value
    header = lines[0].split(",")
    N = (len(header) - 4) // 2
    if header != trajectory_header(N).split(","):
        raise ValueError(f"unexpected trajectory header: {lines[0]}")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=np.float64)
    data = data.reshape(-1, len(header))
    return {
        "meta": meta,
        "t": data[:, 0],
        "theta": data[:, 1 : 1 + N],
        "dtheta": data[:, 1 + N : 1 + 2 * N],
        "D": data[:, 1 + 2 * N],
        "Ddot": data[:, 2 + 2 * N],
        "E_N": data[:, 3 + 2 * N],
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _sync_summary(traj: Trajectory, cfg: dict) -> dict:
    window = _num(cfg, "window")
    if len(traj) < 2:
        return {}
    f = detect_frequency_sync(traj, _num(cfg, "eps_freq", 1e-6), window)
    p = detect_phase_sync(traj, _num(cfg, "eps_phase", 1e-6), window)
    return {
        "frequency_sync": f.synchronized,
        "frequency_residual": f.residual,
        "phase_sync": p.synchronized,
        "phase_residual": p.residual,
        "sync_window": f.window,
    }


def cmd_simulate(cfg: dict, out: Path, seed: int, fmt: str) -> int:
    scenario = cfg.get("scenario")
    extra: dict[str, Any] = {}
    if scenario is not None:
        if scenario != "counterexample":
            raise ConfigError(f"unknown scenario {scenario!r}")
        clash = sorted(k for k in ("theta0", "dtheta0", "phase_range", "velocity_range", "omega") if k in cfg)
        if clash:
            raise ConfigError(f"scenario counterexample fixes the initial data; drop {', '.join(clash)}")
        eps = _vec(cfg, "eps", 3)
        ce = CounterexampleConfig(
            eps=tuple(eps) if eps is not None else (0.1, 0.2, 0.3),
            a=_num(cfg, "a", 100.0),
            m=_num(cfg, "m", 1.0),
            K=_num(cfg, "K", 1.0),
            T=_num(cfg, "t_end", 3.0),
        )
        report = run_counterexample(ce, dt=_num(cfg, "dt"))
        traj = report.trajectory
        extra["counterexample"] = report.to_dict()
    else:
        for key in ("eps", "a"):
            if key in cfg:
                raise ConfigError(f"{key!r} only applies to scenario = \"counterexample\"")
        model = model_from(cfg)
        initial = initial_from(cfg, model, seed)
        traj = integrate(initial, model, integrator_from(cfg))
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        table = trajectory_table(traj)
        _write_json(out / "trajectory.json", {
            "seed": seed,
            "columns": trajectory_header(traj.params.N).split(","),
            "rows": table.tolist(),
        })
    else:
        write_trajectory_csv(traj, out / "trajectory.csv", seed)
    ledger = energy_ledger(traj) if len(traj) >= 2 else None
    summary = {
        "seed": seed,
        "N": traj.params.N,
        "m": traj.params.m,
        "K": traj.params.K,
        "method": traj.method,
        "steps": traj.steps,
        "samples": len(traj),
        "t_end": float(traj.t[-1]),
        "collisions": len(traj.collisions),
        "max_diameter": max_diameter(traj),
        "energy_residual_max": ledger.max_abs_residual if ledger else 0.0,
        "eps_int": traj.eps_int,
        **_sync_summary(traj, cfg),
        **extra,
    }
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _thm_params(cfg: dict, which: str, N: int) -> Thm2Params:
    return Thm2Params(
        M=_num(cfg, "M", N if which == "thm3" else None, required=which == "thm2"),
        alpha=_num(cfg, "alpha", required=True),
        beta=_num(cfg, "beta", required=True),
        mu=_num(cfg, "mu", float("nan"), required=which == "thm2"),
        lam=_num(cfg, "lambda", required=True),
    )


def cmd_check(cfg: dict, out: Path | None, seed: int, which: str) -> int:
    model = model_from(cfg)
    if which == "n3":
        if model.N != 3:
            raise ConfigError(f"--which n3 needs N = 3, got N = {model.N}")
        report = check_n3(model)
    else:
        initial = initial_from(cfg, model, seed)
        p = _thm_params(cfg, which, model.N)
        report = (check_thm2 if which == "thm2" else check_thm3)(model, initial, p)
    payload = {"seed": seed, **report.to_dict()}
    text = json.dumps(payload, indent=2)
    print(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"check_{which}.json").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_sweep(cfg: dict, out: Path | None, seed: int, fmt: str) -> int:
    N = _num(cfg, "N", required=True)
    M = _num(cfg, "M", N)
    objectives = cfg.get("objectives", [cfg.get("objective", "mu_max")])
    if isinstance(objectives, str):
        objectives = [objectives]
    bad = [o for o in objectives if o not in OBJECTIVES]
    if bad:
        raise ConfigError(f"unknown objectives {bad}; expected any of {list(OBJECTIVES)}")
    if not (isinstance(N, int) and isinstance(M, int)):
        raise ConfigError("N and M must be integers")
    results = [
        feasible_search(N, M, o, resolution=_num(cfg, "resolution", 5), lam_span=_num(cfg, "lambda_span", 10.0))
        for o in objectives
    ]
    rows = [r.to_dict() for r in results]
    if fmt == "csv":
        cols = ["objective", "feasible", "alpha", "beta", "lam", "mu", "value"]
        lines = [",".join(cols)] + [
            ",".join("" if row[c] is None else (format(row[c], ".17g") if isinstance(row[c], float) else str(row[c]))
                     for c in cols)
            for row in rows
        ]
        text = f"# seed={seed}\n" + "\n".join(lines)
    else:
        text = json.dumps({"seed": seed, "results": rows}, indent=2)
    print(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"sweep.{fmt}").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if all(r.feasible for r in results) else EXIT_FAIL


def cmd_montecarlo(cfg: dict, out: Path | None, seed: int) -> int:
    model = model_from(cfg)
    if model.N != 3:
        raise ConfigError(f"montecarlo needs N = 3, got N = {model.N}")
    count = _num(cfg, "count", 100)
    if not isinstance(count, int):
        raise ConfigError("'count' must be an integer")
    spec = EnsembleSpec(
        model=model,
        count=count,
        seed=seed,
        phase_range=_interval(cfg, "phase_range") or (-50 * math.pi, 50 * math.pi),
        velocity_range=_interval(cfg, "velocity_range"),
        omega_range=_interval(cfg, "omega_range"),
        horizon=_num(cfg, "horizon"),
        eps=_num(cfg, "eps_freq", 1e-5),
        dt=_num(cfg, "dt"),
        sample_every=_num(cfg, "sample_every", 10),
    )
    try:
        summary = run_n3_montecarlo(spec)
    except HypothesisViolation as exc:
        payload = {"seed": seed, "refused": str(exc)}
        if exc.report is not None:
            payload["check"] = exc.report.to_dict()
        print(json.dumps(payload, indent=2))
        return EXIT_FAIL
    payload = {"seed": seed, **summary.to_dict()}
    text = json.dumps(payload, indent=2)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "montecarlo.json").write_text(text + "\n", encoding="utf-8")
    brief = {k: v for k, v in payload.items() if k != "records"}
    print(json.dumps(brief, indent=2))
    return EXIT_OK if summary.all_synchronized else EXIT_FAIL


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inertial-kuramoto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat TOML config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="64-bit seed overriding the config")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "check":
            p.add_argument("--which", choices=("thm2", "thm3", "n3"), required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out) if args.out else None
    try:
        cfg = load_config(args.config)
        seed = _seed(cfg, args.seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, out or Path("."), seed, args.format or "csv")
        if args.command == "check":
            return cmd_check(cfg, out, seed, args.which)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, seed, args.format or "json")
        return cmd_montecarlo(cfg, out, seed)
    except (ConfigError, ConfigurationError, DomainError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
