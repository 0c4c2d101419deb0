"""Time integration of the inertial Kuramoto system.

The second-order system is integrated as a first-order system of dimension
2N. Two methods are available:

``"rk4"``
    Fixed-step classical Runge-Kutta. Each step also takes two half steps
    to obtain a Richardson estimate of the local error; the full step is the
    one that is kept, so the scheme is plain RK4 at step ``dt``.
``"dp45"``
    Adaptive Dormand-Prince 4(5) embedded pair with local extrapolation.

The hot loops are compiled with numba. The coupling is evaluated through
``sin(a - b) = sin a cos b - cos a sin b`` so each right-hand side costs
O(N) trig calls instead of O(N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .model import ConfigurationError, FloatArray, ModelParams, PhaseState

METHODS = ("rk4", "dp45")


class IntegrationError(RuntimeError):
    """The integration produced a non-finite state or could not make progress."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


class OracleError(RuntimeError):
    """The reference integration did not converge within its step budget."""


def default_dt(params: ModelParams) -> float:
    """Base step that resolves both the relaxation scale m and the coupling scale 1/K."""
    return min(params.m / 20.0, 1.0 / (20.0 * params.K), 0.01)


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    method: str = "rk4"
    dt: float | None = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    sample_every: int = 1
    estimate_error: bool = True

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigurationError(f"t_end must be finite and >= 0, got {self.t_end}")
        if self.dt is not None and not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigurationError("tolerances must be > 0")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ConfigurationError(f"sample_every must be a positive integer, got {self.sample_every}")

    def step_for(self, params: ModelParams) -> float:
        return default_dt(params) if self.dt is None else float(self.dt)


class Collision(NamedTuple):
    """Sign change of theta_i - theta_j between samples at ``t_lo`` and ``t_hi``."""

    i: int
    j: int
    t_lo: float
    t_hi: float


def find_collisions(t: FloatArray, theta: FloatArray) -> list[Collision]:
    n = theta.shape[1]
    if n < 2 or t.size < 2:
        return []
    iu, ju = np.triu_indices(n, k=1)
    d = theta[:, iu] - theta[:, ju]
    before, after = d[:-1], d[1:]
    crossed = (before * after < 0) | ((after == 0) & (before != 0))
    k, p = np.nonzero(crossed)
    return [
        Collision(int(iu[q]), int(ju[q]), float(t[s]), float(t[s + 1]))
        for s, q in zip(k.tolist(), p.tolist())
    ]


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one integration plus integrator metadata.

    ``theta`` and ``dtheta`` have shape ``(n_samples, N)``.
    ``error_sum`` accumulates the per-step local error estimates and
    ``eps_int`` (ten times that sum) is the slack used when checking
    analytic envelopes against the computed solution.
    """

    t: FloatArray
    theta: FloatArray
    dtheta: FloatArray
    params: ModelParams
    method: str
    steps: int
    rejected: int = 0
    max_local_error: float = float("nan")
    error_sum: float = float("nan")
    collisions: list[Collision] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.t.size)

    def __getitem__(self, k: int) -> PhaseState:
        return PhaseState(self.t[k], self.theta[k], self.dtheta[k])

    @property
    def samples(self) -> list[PhaseState]:
        return [self[k] for k in range(len(self))]

    @property
    def initial(self) -> PhaseState:
        return self[0]

    @property
    def final(self) -> PhaseState:
        return self[-1]

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def eps_int(self) -> float:
        return 10.0 * self.error_sum


# --------------------------------------------------------------------------
# compiled kernels
# --------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _rhs(theta, v, omega, m, K, dth, dv, sn, cs):
    n = theta.shape[0]
    s_sum = 0.0
    c_sum = 0.0
    for i in range(n):
        sn[i] = math.sin(theta[i])
        cs[i] = math.cos(theta[i])
        s_sum += sn[i]
        c_sum += cs[i]
    kn = K / n
    for i in range(n):
        dth[i] = v[i]
        dv[i] = (omega[i] - v[i] + kn * (cs[i] * s_sum - sn[i] * c_sum)) / m


@numba.njit(cache=True, nogil=True)
def _rk4_step(theta, v, h, omega, m, K, out_th, out_v, w):
    # w rows: k1..k4 for theta and v, stage state, trig scratch
    n = theta.shape[0]
    k1t, k1v, k2t, k2v, k3t, k3v, k4t, k4v = w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7]
    yt, yv, sn, cs = w[8], w[9], w[10], w[11]
    _rhs(theta, v, omega, m, K, k1t, k1v, sn, cs)
    for i in range(n):
        yt[i] = theta[i] + 0.5 * h * k1t[i]
        yv[i] = v[i] + 0.5 * h * k1v[i]
    _rhs(yt, yv, omega, m, K, k2t, k2v, sn, cs)
    for i in range(n):
        yt[i] = theta[i] + 0.5 * h * k2t[i]
        yv[i] = v[i] + 0.5 * h * k2v[i]
    _rhs(yt, yv, omega, m, K, k3t, k3v, sn, cs)
    for i in range(n):
        yt[i] = theta[i] + h * k3t[i]
        yv[i] = v[i] + h * k3v[i]
    _rhs(yt, yv, omega, m, K, k4t, k4v, sn, cs)
    for i in range(n):
        out_th[i] = theta[i] + h / 6.0 * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i])
        out_v[i] = v[i] + h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])


@numba.njit(cache=True, nogil=True)
def _all_finite(a, b):
    for i in range(a.shape[0]):
        if not (math.isfinite(a[i]) and math.isfinite(b[i])):
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(theta0, v0, omega, m, K, t0, h, n_steps, stride, estimate):
    n = theta0.shape[0]
    n_samples = n_steps // stride + 1
    if n_steps % stride != 0:
        n_samples += 1
    ts = np.empty(n_samples)
    ths = np.empty((n_samples, n))
    vs = np.empty((n_samples, n))
    w = np.empty((12, n))
    th = theta0.copy()
    v = v0.copy()
    nth = np.empty(n)
    nv = np.empty(n)
    ht = np.empty(n)
    hv = np.empty(n)
    h2t = np.empty(n)
    h2v = np.empty(n)
    ts[0] = t0
    ths[0] = th
    vs[0] = v
    rec = 1
    err_sum = 0.0
    err_max = 0.0
    for k in range(1, n_steps + 1):
        _rk4_step(th, v, h, omega, m, K, nth, nv, w)
        if estimate:
            _rk4_step(th, v, 0.5 * h, omega, m, K, ht, hv, w)
            _rk4_step(ht, hv, 0.5 * h, omega, m, K, h2t, h2v, w)
            e = 0.0
            for i in range(n):
                e = max(e, abs(h2t[i] - nth[i]), abs(h2v[i] - nv[i]))
            e *= 16.0 / 15.0
            err_sum += e
            if e > err_max:
                err_max = e
        if not _all_finite(nth, nv):
            return ts[:rec], ths[:rec], vs[:rec], err_sum, err_max, k
        th, nth = nth, th
        v, nv = nv, v
        if k % stride == 0 or k == n_steps:
            ts[rec] = t0 + k * h
            ths[rec] = th
            vs[rec] = v
            rec += 1
    return ts[:rec], ths[:rec], vs[:rec], err_sum, err_max, -1


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


@numba.njit(cache=True, nogil=True)
def _grow(a, rows):
    out = np.empty((rows,) + a.shape[1:])
    out[: a.shape[0]] = a
    return out


@numba.njit(cache=True, nogil=True)
def _dp45_kernel(theta0, v0, omega, m, K, t0, t_end, h0, h_min, rtol, atol, stride, A, B, E):
    n = theta0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ths = np.empty((cap, n))
    vs = np.empty((cap, n))
    kt = np.empty((7, n))
    kv = np.empty((7, n))
    yt = np.empty(n)
    yv = np.empty(n)
    sn = np.empty(n)
    cs = np.empty(n)
    th = theta0.copy()
    v = v0.copy()
    ts[0] = t0
    ths[0] = th
    vs[0] = v
    rec = 1
    t = t0
    h = h0
    accepted = 0
    rejected = 0
    err_sum = 0.0
    err_max = 0.0
    _rhs(th, v, omega, m, K, kt[0], kv[0], sn, cs)
    while t < t_end:
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for s in range(1, 7):
            for i in range(n):
                at = 0.0
                av = 0.0
                for j in range(s):
                    at += A[s, j] * kt[j, i]
                    av += A[s, j] * kv[j, i]
                yt[i] = th[i] + h * at
                yv[i] = v[i] + h * av
            _rhs(yt, yv, omega, m, K, kt[s], kv[s], sn, cs)
        # yt, yv now hold the 5th-order solution (FSAL: row 6 of A equals B)
        ratio = 0.0
        e_abs = 0.0
        for i in range(n):
            et = 0.0
            ev = 0.0
            for j in range(7):
                et += E[j] * kt[j, i]
                ev += E[j] * kv[j, i]
            et = abs(h * et)
            ev = abs(h * ev)
            e_abs = max(e_abs, et, ev)
            st = atol + rtol * max(abs(th[i]), abs(yt[i]))
            sv = atol + rtol * max(abs(v[i]), abs(yv[i]))
            ratio = max(ratio, et / st, ev / sv)
        if not (math.isfinite(ratio) and _all_finite(yt, yv)):
            return ts[:rec], ths[:rec], vs[:rec], accepted, rejected, err_sum, err_max, t, 1
        if ratio <= 1.0:
            t = t_end if last else t + h
            for i in range(n):
                th[i] = yt[i]
                v[i] = yv[i]
                kt[0, i] = kt[6, i]
                kv[0, i] = kv[6, i]
            accepted += 1
            err_sum += e_abs
            err_max = max(err_max, e_abs)
            if accepted % stride == 0 or t >= t_end:
                if rec == ts.shape[0]:
                    ts = np.concatenate((ts, np.empty(rec)))
                    ths = _grow(ths, 2 * rec)
                    vs = _grow(vs, 2 * rec)
                ts[rec] = t
                ths[rec] = th
                vs[rec] = v
                rec += 1
            fac = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            h = h * fac
        else:
            rejected += 1
            if h <= h_min:
                return ts[:rec], ths[:rec], vs[:rec], accepted, rejected, err_sum, err_max, t, 2
            h = max(h_min, h * max(0.2, 0.9 * ratio ** -0.25))
    return ts[:rec], ths[:rec], vs[:rec], accepted, rejected, err_sum, err_max, t, 0


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def _validate(initial: PhaseState, params: ModelParams, t_end: float) -> None:
    if initial.N != params.N:
        raise ConfigurationError(
            f"initial state has {initial.N} oscillators but params describe {params.N}"
        )
    if t_end < initial.t:
        raise ConfigurationError(f"t_end={t_end} precedes the initial time {initial.t}")


def _fixed_grid(t0: float, t_end: float, dt: float) -> tuple[int, float]:
    span = t_end - t0
    if span == 0:
        return 0, dt
    n = max(1, math.ceil(span / dt * (1 - 1e-12)))
    return n, span / n


def effective_step(t0: float, params: ModelParams, config: IntegratorConfig) -> float:
    """Uniform step the fixed-step method actually takes (the base step shrunk to divide the span)."""
    return _fixed_grid(t0, config.t_end, config.step_for(params))[1]


def _run_rk4(initial, params, t_end, dt, stride, estimate):
    n_steps, h = _fixed_grid(initial.t, t_end, dt)
    ts, ths, vs, err_sum, err_max, bad = _rk4_kernel(
        initial.theta, initial.dtheta, params.omega, params.m, params.K,
        initial.t, h, n_steps, stride, estimate,
    )
    if bad >= 0:
        raise IntegrationError("non-finite state", initial.t + bad * h)
    if not estimate:
        err_sum = err_max = float("nan")
    return ts, ths, vs, n_steps, 0, err_max, err_sum


def integrate(initial: PhaseState, params: ModelParams, config: IntegratorConfig) -> Trajectory:
    """Integrate from ``initial`` up to ``config.t_end`` and record samples.

    Every ``config.sample_every``-th step is recorded, and the final state
    always is. Collisions are bracketed between adjacent recorded samples.
    """
    _validate(initial, params, config.t_end)
    dt = config.step_for(params)
    stride = int(config.sample_every)
    if config.method == "rk4":
        ts, ths, vs, steps, rejected, err_max, err_sum = _run_rk4(
            initial, params, config.t_end, dt, stride, config.estimate_error
        )
    else:
        h_min = params.m * 1e-4
        ts, ths, vs, steps, rejected, err_sum, err_max, t_fail, status = _dp45_kernel(
            initial.theta, initial.dtheta, params.omega, params.m, params.K,
            initial.t, config.t_end, dt, h_min, config.rel_tol, config.abs_tol, stride,
            _DP_A, _DP_B, _DP_E,
        )
        if status == 1:
            raise IntegrationError("non-finite state", float(t_fail))
        if status == 2:
            raise IntegrationError(f"step size fell to the floor {h_min:g}", float(t_fail))
    return Trajectory(
        t=ts,
        theta=ths,
        dtheta=vs,
        params=params,
        method=config.method,
        steps=int(steps),
        rejected=int(rejected),
        max_local_error=float(err_max),
        error_sum=float(err_sum),
        collisions=find_collisions(ts, ths),
    )


def reference_integrate(
    initial: PhaseState,
    params: ModelParams,
    t_end: float,
    tol: float = 1e-10,
    max_steps: int = 50_000_000,
) -> Trajectory:
    """Brute-force oracle: RK4 with the step halved until results converge.

    Starting from the default step, the step is halved until two successive
    refinements agree to ``tol`` in sup-norm over every sample. The returned
    trajectory uses the finest step but is sampled on the starting grid, so
    its sample times coincide with those of :func:`integrate` at default
    settings.
    """
    _validate(initial, params, t_end)
    n0, _ = _fixed_grid(initial.t, t_end, default_dt(params))
    if n0 == 0:
        return integrate(initial, params, IntegratorConfig(t_end=t_end, estimate_error=False))
    span = t_end - initial.t
    level = 0
    prev = _run_rk4(initial, params, t_end, span / n0, 1, False)
    used = n0
    while True:
        level += 1
        n = n0 * 2**level
        used += n
        if used > max_steps:
            raise OracleError(f"no convergence to {tol:g} within {max_steps} steps")
        cur = _run_rk4(initial, params, t_end, span / n, 2**level, False)
        diff = max(np.max(np.abs(cur[1] - prev[1])), np.max(np.abs(cur[2] - prev[2])))
        if diff <= tol:
            break
        prev = cur
    ts, ths, vs = cur[0], cur[1], cur[2]
    return Trajectory(
        t=ts, theta=ths, dtheta=vs, params=params, method="rk4-reference",
        steps=n, max_local_error=float(diff), error_sum=float(diff),
        collisions=find_collisions(ts, ths),
    )
