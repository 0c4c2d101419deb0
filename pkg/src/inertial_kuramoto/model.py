"""Inertial Kuramoto model: parameters, states and vector fields.

The second-order system is

    m * theta_i'' + theta_i' = omega_i + (K/N) * sum_j sin(theta_j - theta_i)

Phases are kept unwrapped on the real line. Reduction modulo 2*pi only
happens inside the synchronization detectors in :mod:`.metrics`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]


class ConfigurationError(ValueError):
    """Inconsistent parameters or state dimensions."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


def _as_vector(values: ArrayLike, name: str) -> FloatArray:
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Inertia ``m``, coupling ``K`` and natural frequencies ``omega``.

    ``N`` is inferred from ``omega`` and ``omega_mean`` is cached at
    construction so every consumer sees the same value.
    """

    m: float
    K: float
    omega: FloatArray
    omega_mean: float = field(init=False)

    def __post_init__(self) -> None:
        omega = _as_vector(self.omega, "omega")
        if omega.size < 1:
            raise ConfigurationError("need at least one oscillator")
        if not np.all(np.isfinite(omega)):
            raise ConfigurationError("natural frequencies must be finite")
        if not (np.isfinite(self.m) and self.m > 0):
            raise ConfigurationError(f"inertia m must be > 0, got {self.m}")
        if not (np.isfinite(self.K) and self.K > 0):
            raise ConfigurationError(f"coupling K must be > 0, got {self.K}")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega_mean", float(np.mean(omega)))

    @property
    def N(self) -> int:
        return int(self.omega.size)

    @property
    def omega_spread(self) -> float:
        """D(Omega), the max-min spread of natural frequencies."""
        return float(np.max(self.omega) - np.min(self.omega))

    def with_omega(self, omega: ArrayLike) -> ModelParams:
        return ModelParams(m=self.m, K=self.K, omega=omega)


@dataclass(frozen=True)
class PhaseState:
    """Unwrapped phases ``theta`` and velocities ``dtheta`` at time ``t``."""

    t: float
    theta: FloatArray
    dtheta: FloatArray

    def __post_init__(self) -> None:
        theta = _as_vector(self.theta, "theta")
        dtheta = _as_vector(self.dtheta, "dtheta")
        if theta.shape != dtheta.shape:
            raise ConfigurationError(
                f"theta has {theta.size} entries but dtheta has {dtheta.size}"
            )
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(dtheta))):
            raise ConfigurationError("state must be finite")
        if not np.isfinite(self.t):
            raise ConfigurationError("time must be finite")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "dtheta", dtheta)

    @property
    def N(self) -> int:
        return int(self.theta.size)


@dataclass(frozen=True)
class ReducedState:
    """State in the co-rotating frame where the natural frequencies have mean zero.

    ``theta = theta_orig - omega_mean * t``, ``dtheta = dtheta_orig - omega_mean``
    and ``omega = omega_orig - omega_mean``.
    """

    t: float
    theta: FloatArray
    dtheta: FloatArray
    omega: FloatArray

    def as_phase_state(self) -> PhaseState:
        return PhaseState(self.t, self.theta, self.dtheta)


def _check_dims(state: PhaseState, params: ModelParams) -> None:
    if state.N != params.N:
        raise ConfigurationError(
            f"state has {state.N} oscillators but params describe {params.N}"
        )


def coupling(theta: ArrayLike, K: float) -> FloatArray:
    """Pairwise coupling term (K/N) * sum_j sin(theta_j - theta_i) for every i."""
    theta = np.asarray(theta, dtype=np.float64)
    diff = theta[..., np.newaxis, :] - theta[..., :, np.newaxis]
    return K / theta.shape[-1] * np.sin(diff).sum(axis=-1)


def vector_field(state: PhaseState, params: ModelParams) -> tuple[FloatArray, FloatArray]:
    """Right-hand side of the second-order system written as a first-order one.

    Returns ``(dtheta, ddtheta)`` where ``dtheta`` echoes the state velocities.
    """
    _check_dims(state, params)
    ddtheta = (params.omega - state.dtheta + coupling(state.theta, params.K)) / params.m
    return state.dtheta.copy(), ddtheta


def first_order_vector_field(state: PhaseState, params: ModelParams) -> FloatArray:
    """Classical first-order Kuramoto field, the m -> 0 reference model."""
    _check_dims(state, params)
    return params.omega + coupling(state.theta, params.K)


def reduced_params(params: ModelParams) -> ModelParams:
    """Same model with natural frequencies recentred to mean zero."""
    return params.with_omega(params.omega - params.omega_mean)


def to_reduced(state: PhaseState, params: ModelParams) -> ReducedState:
    """Change to the frame rotating with the mean natural frequency.

    Pairwise phase and velocity differences are unchanged.
    """
    _check_dims(state, params)
    w = params.omega_mean
    return ReducedState(
        t=state.t,
        theta=state.theta - w * state.t,
        dtheta=state.dtheta - w,
        omega=params.omega - w,
    )


def from_reduced(reduced: ReducedState, params: ModelParams) -> PhaseState:
    w = params.omega_mean
    return PhaseState(reduced.t, reduced.theta + w * reduced.t, reduced.dtheta + w)


def mean_phase_exact(
    theta0_mean: float,
    dtheta0_mean: float,
    params: ModelParams,
    t: ArrayLike,
) -> tuple[FloatArray, FloatArray]:
    """Closed-form mean phase and mean velocity.

    The coupling sums to zero over oscillators, so the mean obeys
    ``m * theta'' + theta' = omega_mean``. With mean-zero frequencies this is
    ``theta(t) = theta(0) + m * dtheta(0) * (1 - exp(-t/m))``; a nonzero mean
    frequency adds the drift ``omega_mean * t`` on top.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("mean_phase_exact needs t >= 0")
    m, w = params.m, params.omega_mean
    decay = np.exp(-t / m)
    theta = theta0_mean + w * t + m * (dtheta0_mean - w) * -np.expm1(-t / m)
    dtheta = w + (dtheta0_mean - w) * decay
    return theta, dtheta
