"""Packaged experiments.

* the four-oscillator construction whose diameter grows without bound in
  the initial speed even though D(Theta(0)) and its rate are fixed;
* showcase runs of the majority-sector sufficient conditions (frequency and phase sync);
* Monte-Carlo check of unconditional frequency sync for three oscillators.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .integrator import IntegratorConfig, Trajectory, default_dt, integrate
from .metrics import (
    detect_frequency_sync,
    detect_phase_sync,
    diameter,
    diameter_rate,
    max_diameter,
)
from .model import ConfigurationError, FloatArray, ModelParams, PhaseState
from .theory import (
    ConditionReport,
    HypothesisViolation,
    N3Constants,
    Thm2Params,
    check_n3,
    check_thm2,
    check_thm3,
    mu_max,
    n3_constants_for,
    trap_time,
)

# --------------------------------------------------------------------------
# diameter-growth counterexample
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleConfig:
    eps: tuple[float, float, float] = (0.1, 0.2, 0.3)
    a: float = 100.0
    m: float = 1.0
    K: float = 1.0
    T: float = 3.0

    def __post_init__(self) -> None:
        e1, e2, e3 = self.eps
        if not 0 < e1 < e2 < e3 < math.pi / 6:
            raise ConfigurationError(f"need 0 < eps1 < eps2 < eps3 < pi/6, got {self.eps}")
        if not self.a >= 0:
            raise ConfigurationError(f"initial speed a must be >= 0, got {self.a}")
        if not (self.m > 0 and self.K > 0 and self.T > 0):
            raise ConfigurationError("m, K and T must be positive")


def build_counterexample(cfg: CounterexampleConfig) -> tuple[ModelParams, PhaseState]:
    """Zero natural frequencies; the middle pair starts moving apart at speed ``a`` each."""
    e1, e2, e3 = cfg.eps
    params = ModelParams(m=cfg.m, K=cfg.K, omega=np.zeros(4))
    state = PhaseState(0.0, [0.0, e1, e2, e3], [0.0, -cfg.a, cfg.a, 0.0])
    return params, state


def counterexample_lower_bound(cfg: CounterexampleConfig, t: FloatArray | float) -> FloatArray:
    """eps2 - eps1 + 2 a m (1 - exp(-t/m)) - 2 K t, a lower bound on theta_3 - theta_2."""
    e1, e2, _ = cfg.eps
    t = np.asarray(t, dtype=np.float64)
    return e2 - e1 + 2.0 * cfg.a * cfg.m * -np.expm1(-t / cfg.m) - 2.0 * cfg.K * t


@dataclass(frozen=True)
class CounterexampleReport:
    cfg: CounterexampleConfig
    initial_diameter: float
    initial_rate: float
    max_diameter: float
    lower_bound_T: float
    t: FloatArray = field(repr=False)
    gap: FloatArray = field(repr=False)
    lower_bound: FloatArray = field(repr=False)
    bound_holds: bool
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "eps": list(self.cfg.eps),
            "a": self.cfg.a,
            "m": self.cfg.m,
            "K": self.cfg.K,
            "T": self.cfg.T,
            "initial_diameter": self.initial_diameter,
            "initial_rate": self.initial_rate,
            "max_diameter": self.max_diameter,
            "lower_bound_T": self.lower_bound_T,
            "bound_holds": self.bound_holds,
        }


def counterexample_dt(cfg: CounterexampleConfig, params: ModelParams) -> float:
    # relative speed 2a rotates sin(theta_3 - theta_2); keep that to ~0.05 rad per step
    return min(default_dt(params), 0.025 / max(cfg.a, 1e-300))


def run_counterexample(cfg: CounterexampleConfig, dt: float | None = None) -> CounterexampleReport:
    params, state = build_counterexample(cfg)
    step = counterexample_dt(cfg, params) if dt is None else dt
    traj = integrate(state, params, IntegratorConfig(t_end=cfg.T, dt=step))
    gap = traj.theta[:, 2] - traj.theta[:, 1]
    lb = counterexample_lower_bound(cfg, traj.t)
    return CounterexampleReport(
        cfg=cfg,
        initial_diameter=diameter(state.theta),
        initial_rate=diameter_rate(state),
        max_diameter=max_diameter(traj),
        lower_bound_T=float(counterexample_lower_bound(cfg, cfg.T)),
        t=traj.t,
        gap=gap,
        lower_bound=lb,
        bound_holds=bool(np.all(gap >= lb - traj.eps_int)),
        trajectory=traj,
    )


# --------------------------------------------------------------------------
# majority-sector showcases
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ShowcaseReport:
    check: ConditionReport
    trap_time: float
    max_sector_diameter: float
    max_sector_diameter_after_trap: float
    sector_always: bool
    sector_after_trap: bool
    sync: bool
    residual: float
    collisions: int
    eps_int: float
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "check": self.check.to_dict(),
            "trap_time": self.trap_time,
            "max_sector_diameter": self.max_sector_diameter,
            "max_sector_diameter_after_trap": self.max_sector_diameter_after_trap,
            "sector_always": self.sector_always,
            "sector_after_trap": self.sector_after_trap,
            "sync": self.sync,
            "residual": self.residual,
            "collisions": self.collisions,
            "eps_int": self.eps_int,
        }


def _showcase(report, p, model, initial, horizon, eps, config, phase):
    if not report.ok:
        names = ", ".join(r.hypothesis for r in report.failing())
        raise HypothesisViolation(f"hypotheses fail: {names}", report)
    cfg = config or IntegratorConfig(t_end=horizon, dt=model.m / 20, sample_every=10)
    cfg = replace(cfg, t_end=initial.t + horizon)
    traj = integrate(initial, model, cfg)
    t_trap = trap_time(p, model.m, model.K)
    slack = traj.eps_int
    M = p.M
    d_all = max_diameter(traj, M)
    d_late = max_diameter(traj, M, after=initial.t + t_trap)
    if phase:
        verdict = detect_phase_sync(traj, eps)
        resid = verdict.residual
    else:
        verdict = detect_frequency_sync(traj, eps)
        resid = float(np.max(np.abs(traj.dtheta[-1] - model.omega_mean)))
    return ShowcaseReport(
        check=report,
        trap_time=t_trap,
        max_sector_diameter=d_all,
        max_sector_diameter_after_trap=d_late,
        sector_always=d_all <= math.pi - p.alpha + slack,
        sector_after_trap=bool(np.isnan(d_late) or d_late <= math.pi - p.alpha - p.beta + slack),
        sync=verdict.synchronized,
        residual=resid,
        collisions=len(traj.collisions),
        eps_int=slack,
        trajectory=traj,
    )


def run_thm2_showcase(
    p: Thm2Params,
    model: ModelParams,
    initial: PhaseState,
    horizon: float = 100.0,
    eps: float = 1e-6,
    config: IntegratorConfig | None = None,
) -> ShowcaseReport:
    """Check the majority-sector hypotheses, integrate, and test their conclusions.

    Refuses with :class:`HypothesisViolation` (carrying the report) when a
    hypothesis fails. ``residual`` is max_i |dtheta_i(t_end) - omega_mean|.
    """
    return _showcase(check_thm2(model, initial, p), p, model, initial, horizon, eps, config, False)


def run_thm3_showcase(
    p: Thm2Params,
    model: ModelParams,
    initial: PhaseState,
    horizon: float = 100.0,
    eps: float = 1e-6,
    config: IntegratorConfig | None = None,
) -> ShowcaseReport:
    """Identical-oscillator variant: the verdict is phase synchronization."""
    mu = mu_max(p.alpha, p.beta, model.N, model.N)
    full = replace(p, M=model.N, mu=mu)
    return _showcase(check_thm3(model, initial, p), full, model, initial, horizon, eps, config, True)


# --------------------------------------------------------------------------
# three-oscillator Monte Carlo
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """Random initial data for repeated runs of one model.

    Phases and velocities are drawn uniformly from their ranges. When
    ``omega_range`` is given, each run draws its own natural frequencies and
    recentres them to mean zero; otherwise ``model.omega`` is used. The
    default velocity range is [-50 K, 50 K].
    """

    model: ModelParams
    count: int = 100
    seed: int = 0
    phase_range: tuple[float, float] = (-50 * math.pi, 50 * math.pi)
    velocity_range: tuple[float, float] | None = None
    omega_range: tuple[float, float] | None = None
    horizon: float | None = None
    eps: float = 1e-5
    sample_every: int = 10
    dt: float | None = None

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ConfigurationError("count must be >= 0")
        for name in ("phase_range", "velocity_range", "omega_range"):
            rng = getattr(self, name)
            if rng is not None and not (np.all(np.isfinite(rng)) and rng[0] <= rng[1]):
                raise ConfigurationError(f"{name} must be a finite interval, got {rng}")

    @property
    def velocities(self) -> tuple[float, float]:
        if self.velocity_range is not None:
            return self.velocity_range
        return (-50.0 * self.model.K, 50.0 * self.model.K)


@dataclass(frozen=True)
class RunRecord:
    index: int
    synchronized: bool
    residual: float
    max_diameter: float
    diameter_bound: float
    within_bound: bool
    horizon: float
    collisions: int


@dataclass(frozen=True)
class MonteCarloSummary:
    runs: int
    successes: int
    max_diameter: float
    worst_residual: float
    all_within_bound: bool
    records: list[RunRecord] = field(repr=False)

    @property
    def all_synchronized(self) -> bool:
        return self.successes == self.runs

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "successes": self.successes,
            "max_diameter": self.max_diameter,
            "worst_residual": self.worst_residual,
            "all_within_bound": self.all_within_bound,
            "records": [r.__dict__ for r in self.records],
        }


def n3_horizon(model: ModelParams, consts: N3Constants) -> float:
    return max(200.0 / model.K, 20.0 * (consts.T1 + 2.0 * consts.gamma))


def draw_initial(spec: EnsembleSpec, rng: np.random.Generator) -> tuple[ModelParams, PhaseState]:
    N = spec.model.N
    theta = rng.uniform(*spec.phase_range, size=N)
    dtheta = rng.uniform(*spec.velocities, size=N)
    model = spec.model
    if spec.omega_range is not None:
        omega = rng.uniform(*spec.omega_range, size=N)
        model = model.with_omega(omega - omega.mean())
    return model, PhaseState(0.0, theta, dtheta)


def _one_run(spec: EnsembleSpec, index: int, seq: np.random.SeedSequence) -> RunRecord:
    model, initial = draw_initial(spec, np.random.default_rng(seq))
    report = check_n3(model)
    if not report.ok:
        names = ", ".join(r.hypothesis for r in report.failing())
        raise HypothesisViolation(f"run {index}: hypotheses fail: {names}", report)
    consts = n3_constants_for(model, initial)
    horizon = spec.horizon if spec.horizon is not None else n3_horizon(model, consts)
    cfg = IntegratorConfig(t_end=horizon, dt=spec.dt, sample_every=spec.sample_every)
    traj = integrate(initial, model, cfg)
    verdict = detect_frequency_sync(traj, spec.eps)
    dmax = max_diameter(traj)
    return RunRecord(
        index=index,
        synchronized=verdict.synchronized,
        residual=verdict.residual,
        max_diameter=dmax,
        diameter_bound=consts.diameter_bound,
        within_bound=dmax <= consts.diameter_bound,
        horizon=horizon,
        collisions=len(traj.collisions),
    )


def run_n3_montecarlo(spec: EnsembleSpec, workers: int = 1) -> MonteCarloSummary:
    """Integrate ``spec.count`` random initial conditions and test frequency sync on each.

    Each run draws from its own child of ``SeedSequence(spec.seed)``, so the
    outcome does not depend on ``workers`` or on scheduling order.
    """
    if spec.model.N != 3:
        raise ConfigurationError(f"the three-oscillator ensemble needs N = 3, got {spec.model.N}")
    if spec.omega_range is None:
        report = check_n3(spec.model)
        if not report.ok:
            names = ", ".join(r.hypothesis for r in report.failing())
            raise HypothesisViolation(f"hypotheses fail: {names}", report)
    seqs = np.random.SeedSequence(spec.seed).spawn(spec.count)
    if workers > 1 and spec.count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda a: _one_run(spec, *a), enumerate(seqs)))
    else:
        records = [_one_run(spec, k, s) for k, s in enumerate(seqs)]
    if not records:
        return MonteCarloSummary(0, 0, float("nan"), float("nan"), True, [])
    return MonteCarloSummary(
        runs=len(records),
        successes=sum(r.synchronized for r in records),
        max_diameter=max(r.max_diameter for r in records),
        worst_residual=max(r.residual for r in records),
        all_within_bound=all(r.within_bound for r in records),
        records=records,
    )
