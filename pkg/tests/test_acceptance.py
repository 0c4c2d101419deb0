"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line, which is repeated in the
"acceptance criteria" section of the pytest terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from inertial_kuramoto import (
    CounterexampleConfig,
    EnsembleSpec,
    IntegratorConfig,
    ModelParams,
    PhaseState,
    Thm2Params,
    check_thm2,
    coupling_asymmetry_forms,
    default_dt,
    effective_step,
    energy_ledger,
    extrapolated_ledger,
    integrate,
    lemma1_envelope,
    mean_phase_exact,
    mk_bound3,
    n3_constants,
    reference_integrate,
    run_counterexample,
    run_n3_montecarlo,
    run_thm2_showcase,
    run_thm3_showcase,
    to_reduced,
)
from inertial_kuramoto.model import reduced_params
from inertial_kuramoto.scenarios import counterexample_lower_bound

pytestmark = pytest.mark.acceptance


def _random_instances(count, seed=1):
    """Instances for the envelope and mean-phase criteria."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        N = int(rng.integers(2, 7))
        params = ModelParams(
            m=float(rng.uniform(0.01, 1.0)),
            K=float(rng.uniform(0.5, 5.0)),
            omega=rng.uniform(-1.0, 1.0, N),
        )
        state = PhaseState(0.0, rng.uniform(-math.pi, math.pi, N), rng.uniform(-10.0, 10.0, N))
        yield params, state


def _half_default(params, horizon):
    # Half the default step keeps the accumulated local error under 1e-5 on
    # the stiffest instances (m = 0.01, K = 5).
    return IntegratorConfig(t_end=horizon, dt=default_dt(params) / 2)


def test_criterion_1_velocity_envelope():
    start = time.perf_counter()
    worst_excess, worst_eps = -np.inf, 0.0
    for params, state in _random_instances(200):
        traj = integrate(state, params, _half_default(params, 20.0))
        eps = traj.eps_int
        worst_eps = max(worst_eps, eps)
        i, j = np.triu_indices(params.N, 1)
        gap = np.abs(traj.dtheta[:, i] - traj.dtheta[:, j])
        bound = lemma1_envelope(
            np.abs(state.dtheta[i] - state.dtheta[j]),
            np.abs(params.omega[i] - params.omega[j]),
            params.K,
            params.m,
            traj.t[:, None],
        )
        worst_excess = max(worst_excess, float(np.max(gap - bound - eps)))
    elapsed = time.perf_counter() - start
    ok = worst_excess <= 0 and worst_eps <= 1e-5 and elapsed <= 60
    record_criterion(
        1, "velocity-difference envelope", ok,
        f"max(gap - bound - eps_int)={worst_excess:.3e}, max eps_int={worst_eps:.2e}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_2_mean_phase_closed_form():
    worst = 0.0
    for params, state in _random_instances(200):
        reduced = to_reduced(state, params)
        rparams = reduced_params(params)
        traj = integrate(reduced.as_phase_state(), rparams, _half_default(rparams, 20.0))
        phase, velocity = mean_phase_exact(
            float(np.mean(reduced.theta)), float(np.mean(reduced.dtheta)), rparams, traj.t
        )
        worst = max(
            worst,
            float(np.max(np.abs(traj.theta.mean(axis=1) - phase))),
            float(np.max(np.abs(traj.dtheta.mean(axis=1) - velocity))),
        )
    ok = worst <= 1e-7
    record_criterion(2, "mean-phase closed form", ok, f"sup-norm error={worst:.3e} (limit 1e-7)")
    assert ok


def test_criterion_3_energy_identity():
    rng = np.random.default_rng(3)
    worst_res, worst_ratio, worst_H, worst_tel = 0.0, np.inf, -np.inf, 0.0
    for _ in range(20):
        params = ModelParams(
            m=float(rng.uniform(0.05, 1.0)), K=float(rng.uniform(0.5, 2.0)), omega=rng.uniform(-0.5, 0.5, 4)
        )
        state = PhaseState(0.0, rng.uniform(-math.pi, math.pi, 4), rng.uniform(-0.5, 0.5, 4))
        cfg = IntegratorConfig(t_end=20.0)
        h = effective_step(0.0, params, cfg)
        coarse = energy_ledger(integrate(state, params, cfg))
        fine = energy_ledger(integrate(state, params, IntegratorConfig(t_end=20.0, dt=h / 2)))
        worst_res = max(worst_res, coarse.max_abs_residual)
        worst_ratio = min(worst_ratio, coarse.max_abs_residual / fine.max_abs_residual)
        worst_H = max(worst_H, coarse.sup_abs_int_H - coarse.coupling_bound, fine.sup_abs_int_H - fine.coupling_bound)
        worst_tel = max(worst_tel, extrapolated_ledger(coarse, fine).telescoping_error)
    ok = worst_res <= 1e-4 and worst_ratio >= 3.5 and worst_H <= 1e-6 and worst_tel <= 1e-6
    record_criterion(
        3, "energy identity", ok,
        f"max|R|={worst_res:.2e}, min halving ratio={worst_ratio:.3f}, "
        f"max(|int H|-(N-1)K)={worst_H:.3e}, telescoping gap={worst_tel:.2e}",
    )
    assert ok


SECTOR_PARAMS = Thm2Params(M=5, alpha=math.pi / 2, beta=0.1, mu=0.45595, lam=2.5)
SECTOR_START = PhaseState(0.0, np.linspace(0.0, 1.45, 5), np.zeros(5))


def test_criterion_4_sector_trapping_and_frequency_sync():
    model = ModelParams(m=0.0018, K=1.0, omega=[-0.2, -0.1, 0.0, 0.1, 0.2])
    assert check_thm2(model, SECTOR_START, SECTOR_PARAMS).ok
    start = time.perf_counter()
    rep = run_thm2_showcase(SECTOR_PARAMS, model, SECTOR_START, horizon=100.0, eps=1e-6)
    elapsed = time.perf_counter() - start
    p = SECTOR_PARAMS
    ok = (
        rep.max_sector_diameter <= math.pi - p.alpha
        and rep.max_sector_diameter_after_trap <= math.pi - p.alpha - p.beta
        and rep.residual < 1e-6
        and elapsed <= 120
    )
    record_criterion(
        4, "sector trapping + frequency sync", ok,
        f"max D={rep.max_sector_diameter:.4f} (<= {math.pi - p.alpha:.4f}), "
        f"after trap t={rep.trap_time:.3f}: {rep.max_sector_diameter_after_trap:.4f} "
        f"(<= {math.pi - p.alpha - p.beta:.4f}), residual={rep.residual:.1e}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_5_identical_phase_sync():
    model = ModelParams(m=0.0018, K=1.0, omega=np.zeros(5))
    rep = run_thm3_showcase(SECTOR_PARAMS, model, SECTOR_START, horizon=100.0, eps=1e-6)
    ok = rep.sync
    record_criterion(5, "identical oscillators phase sync", ok, f"phase residual={rep.residual:.2e} (eps 1e-6)")
    assert ok


def test_criterion_6_three_oscillators_unconditional():
    c = n3_constants(1.0)
    constants_ok = (
        f"{c.g:.4g}" == f"{0.050955:.4g}"
        and f"{c.lambda3:.4g}" == f"{0.045859:.4g}"
        and f"{mk_bound3():.4g}" == f"{0.031898:.4g}"
    )
    spec = EnsembleSpec(
        model=ModelParams(m=0.03, K=1.0, omega=[0.02, 0.0, -0.02]),
        count=100,
        seed=6,
        phase_range=(-50 * math.pi, 50 * math.pi),
        velocity_range=(-50.0, 50.0),
        horizon=200.0,
        eps=1e-5,
    )
    start = time.perf_counter()
    summary = run_n3_montecarlo(spec)
    elapsed = time.perf_counter() - start
    ok = constants_ok and summary.successes == 100 and summary.all_within_bound and elapsed <= 600
    record_criterion(
        6, "three-oscillator constants + Monte Carlo", ok,
        f"g={c.g:.6f}, lambda3={c.lambda3:.6f}, mk_bound3={mk_bound3():.6f}; "
        f"{summary.successes}/{summary.runs} synchronized, all within 4n pi + alpha3: "
        f"{summary.all_within_bound}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_7_counterexample():
    maxima, margins = [], []
    for a in (10.0, 100.0, 1000.0):
        cfg = CounterexampleConfig(eps=(0.1, 0.2, 0.3), a=a, m=1.0, K=1.0, T=3.0)
        rep = run_counterexample(cfg)
        maxima.append(rep.max_diameter)
        margins.append(rep.max_diameter - float(counterexample_lower_bound(cfg, cfg.T)))
    ok = min(margins) > 0 and maxima[0] < maxima[1] < maxima[2]
    record_criterion(
        7, "counterexample growth", ok,
        "max D=" + ", ".join(f"{d:.2f}" for d in maxima) + "; margin over bound=" + ", ".join(f"{x:.2f}" for x in margins),
    )
    assert ok


def test_criterion_8_integrator_order():
    params = ModelParams(m=0.5, K=1.0, omega=[0.3, -0.1, -0.2])
    state = PhaseState(0.0, [0.0, 1.0, 2.5], [0.5, -0.4, 0.2])
    T = 5.0
    ref = reference_integrate(state, params, T).final
    errors = []
    for dt in (0.2, 0.1, 0.05):
        fin = integrate(state, params, IntegratorConfig(t_end=T, dt=dt)).final
        errors.append(np.max(np.abs(np.concatenate([fin.theta - ref.theta, fin.dtheta - ref.dtheta]))))
    orders = [math.log2(errors[k] / errors[k + 1]) for k in range(2)]
    ok = all(abs(p - 4.0) <= 0.5 for p in orders)
    record_criterion(8, "integrator order", ok, "observed orders " + ", ".join(f"{p:.3f}" for p in orders))
    assert ok


def test_criterion_9_trigonometric_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(10_000):
        N = int(rng.integers(2, 9))
        theta = rng.uniform(-10 * math.pi, 10 * math.pi, N)
        i, j = rng.choice(N, 2, replace=False)
        direct, factored = coupling_asymmetry_forms(theta, int(i), int(j))
        worst = max(worst, abs(direct - factored))
    ok = worst <= 1e-12
    record_criterion(9, "coupling asymmetry identity", ok, f"max |direct - factored|={worst:.2e} over 1e4 states")
    assert ok
