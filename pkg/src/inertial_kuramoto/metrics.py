"""Diagnostics on states and trajectories.

Diameters are taken over unwrapped phases. Representation sets collect the
index pairs that realize the diameter to within a tolerance band; the
diameter rate is the largest velocity difference over that set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from .integrator import Trajectory
from .model import DomainError, FloatArray, PhaseState


def _phases(x: PhaseState | ArrayLike) -> FloatArray:
    if isinstance(x, PhaseState):
        return x.theta
    return np.asarray(x, dtype=np.float64)


def diameter(theta: PhaseState | ArrayLike) -> float | FloatArray:
    """max_i theta_i - min_i theta_i, along the last axis."""
    theta = _phases(theta)
    if theta.ndim == 0 or theta.shape[-1] == 0:
        raise DomainError("diameter of an empty vector")
    d = np.max(theta, axis=-1) - np.min(theta, axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def subset_diameter(theta: PhaseState | ArrayLike, M: int) -> float | FloatArray:
    """Diameter of the first ``M`` components."""
    theta = _phases(theta)
    n = theta.shape[-1]
    if not 1 <= M <= n:
        raise DomainError(f"M must lie in [1, {n}], got {M}")
    return diameter(theta[..., :M])


def velocity_diameter(state: PhaseState | ArrayLike, M: int | None = None) -> float | FloatArray:
    """Spread of the velocities, optionally over the first ``M`` oscillators."""
    v = state.dtheta if isinstance(state, PhaseState) else np.asarray(state, dtype=np.float64)
    if M is None:
        return diameter(v)
    return subset_diameter(v, M)


def default_rep_tol(d: float) -> float:
    return 1e-9 * max(1.0, d)


@dataclass(frozen=True)
class RepresentationSet:
    value: float
    pairs: list[tuple[int, int]]


def representation_set(theta: PhaseState | ArrayLike, rep_tol: float | None = None) -> RepresentationSet:
    """Ordered pairs ``(i, j)``, ``i != j``, with ``theta_i - theta_j`` within ``rep_tol`` of the diameter."""
    theta = np.asarray(_phases(theta), dtype=np.float64)
    if theta.ndim != 1 or theta.size == 0:
        raise DomainError("representation_set needs a nonempty 1-D phase vector")
    d = diameter(theta)
    tol = default_rep_tol(d) if rep_tol is None else rep_tol
    n = theta.size
    if n < 2:
        return RepresentationSet(d, [])
    hi = np.flatnonzero(theta >= np.max(theta) - tol)
    lo = np.flatnonzero(theta <= np.min(theta) + tol)
    pairs = [
        (int(i), int(j))
        for i in hi
        for j in lo
        if i != j and d - (theta[i] - theta[j]) <= tol
    ]
    imax, imin = int(np.argmax(theta)), int(np.argmin(theta))
    if imax == imin:
        imin = 1 if imax == 0 else 0
    if (imax, imin) not in pairs:
        pairs.insert(0, (imax, imin))
    return RepresentationSet(d, pairs)


def diameter_rate(state: PhaseState, rep_tol: float | None = None) -> float:
    """One-sided rate of change of the diameter.

    The maximum of ``dtheta_i - dtheta_j`` over every pair in the
    representation set, which is the right derivative of D(Theta(t)) also
    at collision instants.
    """
    if state.N < 2:
        raise DomainError("diameter_rate needs at least two oscillators")
    rep = representation_set(state.theta, rep_tol)
    v = state.dtheta
    return float(max(v[i] - v[j] for i, j in rep.pairs))


def diameter_rate_series(theta: FloatArray, dtheta: FloatArray, rep_tol: float | None = None) -> FloatArray:
    """:func:`diameter_rate` for every row of ``(n_samples, N)`` arrays.

    A single oscillator has an identically zero diameter, so its rate is 0.
    """
    theta = np.atleast_2d(theta)
    dtheta = np.atleast_2d(dtheta)
    n = theta.shape[1]
    if n < 2:
        return np.zeros(theta.shape[0])
    out = np.empty(theta.shape[0])
    off = ~np.eye(n, dtype=bool)
    for lo in range(0, theta.shape[0], 4096):
        th, v = theta[lo : lo + 4096], dtheta[lo : lo + 4096]
        d = np.max(th, axis=1) - np.min(th, axis=1)
        tol = 1e-9 * np.maximum(1.0, d) if rep_tol is None else np.full_like(d, rep_tol)
        gap = th[:, :, None] - th[:, None, :]
        rep = (d[:, None, None] - gap <= tol[:, None, None]) & off
        rate = np.where(rep, v[:, :, None] - v[:, None, :], -np.inf)
        out[lo : lo + 4096] = rate.max(axis=(1, 2))
    return out


def coupling_asymmetry_forms(theta: PhaseState | ArrayLike, i: int, j: int) -> tuple[float, float]:
    """Both algebraic forms of the velocity-difference forcing F for the pair (i, j).

    Direct: (1/N) sum_k [sin(theta_k - theta_i) - sin(theta_k - theta_j)].
    Factored: -(2/N) sin((theta_i - theta_j)/2) sum_k cos(theta_k - (theta_i + theta_j)/2).
    """
    theta = np.asarray(_phases(theta), dtype=np.float64)
    if i == j:
        raise DomainError("coupling_asymmetry needs i != j")
    n = theta.size
    ti, tj = theta[i], theta[j]
    direct = float(np.sum(np.sin(theta - ti) - np.sin(theta - tj)) / n)
    factored = float(-2.0 / n * np.sin(0.5 * (ti - tj)) * np.sum(np.cos(theta - 0.5 * (ti + tj))))
    return direct, factored


def coupling_asymmetry(theta: PhaseState | ArrayLike, i: int, j: int, tol: float = 1e-12) -> float:
    direct, factored = coupling_asymmetry_forms(theta, i, j)
    if abs(direct - factored) > tol:
        raise ArithmeticError(
            f"coupling asymmetry forms disagree: {direct!r} vs {factored!r}"
        )
    return direct


def _cumtrapz(f: FloatArray, t: FloatArray) -> FloatArray:
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def coupling_power(theta: FloatArray, dtheta: FloatArray, K: float) -> FloatArray:
    """H_N = (K/N) sum_{i,j} sin(theta_j - theta_i) dtheta_i, per sample."""
    n = theta.shape[-1]
    s, c = np.sin(theta), np.cos(theta)
    S = s.sum(axis=-1, keepdims=True)
    C = c.sum(axis=-1, keepdims=True)
    forcing = K / n * (c * S - s * C)
    return np.sum(forcing * dtheta, axis=-1)


def coupling_potential(theta: FloatArray, K: float) -> FloatArray:
    """Phi = (K/N) sum_{i<j} cos(theta_j - theta_i), whose time derivative is H_N."""
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.shape[-1]
    iu, ju = np.triu_indices(n, k=1)
    return K / n * np.sum(np.cos(theta[..., ju] - theta[..., iu]), axis=-1)


@dataclass(frozen=True)
class EnergyLedger:
    """Energy functionals sampled along a trajectory.

    ``residual`` is the defect of the integrated energy balance
    (m/2) E(t) + int E = (m/2) E(0) + int Lambda + int H, with all time
    integrals taken by the trapezoidal rule on the recorded samples.
    """

    t: FloatArray
    E: FloatArray
    Lambda: FloatArray
    H: FloatArray
    int_E: FloatArray
    int_Lambda: FloatArray
    int_H: FloatArray
    Phi: FloatArray
    residual: FloatArray
    K: float
    N: int

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def telescoping_error(self) -> float:
        """Largest gap between int_0^t H and Phi(t) - Phi(0)."""
        return float(np.max(np.abs(self.int_H - (self.Phi - self.Phi[0]))))

    @property
    def sup_abs_int_H(self) -> float:
        return float(np.max(np.abs(self.int_H)))

    @property
    def coupling_bound(self) -> float:
        return (self.N - 1) * self.K


def energy_ledger(trajectory: Trajectory) -> EnergyLedger:
    if len(trajectory) < 2:
        raise DomainError("energy_ledger needs at least two samples")
    p = trajectory.params
    t, th, v = trajectory.t, trajectory.theta, trajectory.dtheta
    E = np.sum(v * v, axis=1)
    Lam = v @ p.omega
    H = coupling_power(th, v, p.K)
    int_E, int_L, int_H = _cumtrapz(E, t), _cumtrapz(Lam, t), _cumtrapz(H, t)
    residual = 0.5 * p.m * (E - E[0]) + int_E - int_L - int_H
    return EnergyLedger(
        t=t, E=E, Lambda=Lam, H=H, int_E=int_E, int_Lambda=int_L, int_H=int_H,
        Phi=coupling_potential(th, p.K), residual=residual, K=p.K, N=p.N,
    )


def extrapolated_ledger(coarse: EnergyLedger, fine: EnergyLedger) -> EnergyLedger:
    """Richardson-combine trapezoidal ledgers taken at steps h and h/2.

    ``fine`` must be sampled at every point of ``coarse`` plus the midpoints.
    The O(h^2) quadrature error cancels, leaving the integrals accurate to
    the time integrator's order.
    """
    if fine.t.size != 2 * coarse.t.size - 1 or not np.allclose(
        fine.t[::2], coarse.t, rtol=0, atol=1e-12 * max(1.0, abs(coarse.t[-1]))
    ):
        raise DomainError("fine ledger must sample every coarse time and the midpoints")

    def rich(a: FloatArray, b: FloatArray) -> FloatArray:
        return (4.0 * b[::2] - a) / 3.0

    return replace(
        coarse,
        int_E=rich(coarse.int_E, fine.int_E),
        int_Lambda=rich(coarse.int_Lambda, fine.int_Lambda),
        int_H=rich(coarse.int_H, fine.int_H),
        residual=rich(coarse.residual, fine.residual),
    )


def wrap_phase(x: ArrayLike) -> FloatArray:
    """Map to the half-open interval (-pi, pi]; an exact -pi maps to +pi."""
    x = np.asarray(x, dtype=np.float64)
    return np.pi - np.mod(np.pi - x, 2.0 * np.pi)


@dataclass(frozen=True)
class SyncVerdict:
    synchronized: bool
    residual: float
    window: float


def default_window(trajectory: Trajectory) -> float:
    span = trajectory.span
    return min(span, max(0.1 * span, 5.0 / trajectory.params.K))


def _tail(trajectory: Trajectory, window: float | None) -> tuple[np.ndarray, float]:
    w = default_window(trajectory) if window is None else float(window)
    if w < 0 or w > trajectory.span * (1 + 1e-12):
        raise DomainError(f"window {w} exceeds the trajectory span {trajectory.span}")
    mask = trajectory.t >= trajectory.t[-1] - w
    return mask, w


def detect_frequency_sync(trajectory: Trajectory, eps: float, window: float | None = None) -> SyncVerdict:
    """All velocities within ``eps`` of the mean natural frequency over the final window."""
    mask, w = _tail(trajectory, window)
    resid = float(np.max(np.abs(trajectory.dtheta[mask] - trajectory.params.omega_mean)))
    return SyncVerdict(resid <= eps, resid, w)


def detect_phase_sync(trajectory: Trajectory, eps: float, window: float | None = None) -> SyncVerdict:
    """All pairwise phase differences within ``eps`` of a multiple of 2*pi over the final window."""
    mask, w = _tail(trajectory, window)
    th = trajectory.theta[mask]
    n = th.shape[1]
    if n < 2:
        return SyncVerdict(True, 0.0, w)
    iu, ju = np.triu_indices(n, k=1)
    resid = float(np.max(np.abs(wrap_phase(th[:, iu] - th[:, ju]))))
    return SyncVerdict(resid <= eps, resid, w)


def max_diameter(trajectory: Trajectory, M: int | None = None, after: float | None = None) -> float:
    """Largest sampled diameter, of the first ``M`` phases, at times strictly after ``after``."""
    th = trajectory.theta if M is None else trajectory.theta[:, :M]
    if after is not None:
        th = th[trajectory.t > after]
        if th.shape[0] == 0:
            return float("nan")
    return float(np.max(diameter(th)))
