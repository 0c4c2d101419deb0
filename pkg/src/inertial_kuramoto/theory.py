"""Closed-form constants and sufficient-condition checks.

Covers the relative-velocity envelopes, the admissible parameter region for
sector trapping (majority subset of size M, sector angles alpha and beta,
margins mu and lambda), the trapping time, the constants of the
unconditional three-oscillator result, and a grid search over the
admissible region.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike

from .metrics import diameter, subset_diameter, velocity_diameter
from .model import DomainError, FloatArray, ModelParams, PhaseState

ALPHA3 = 2.0 * math.pi / 5.0


class HypothesisViolation(ValueError):
    """A hypothesis needed by a bound or a scenario does not hold."""

    def __init__(self, message: str, report: ConditionReport | None = None):
        super().__init__(message)
        self.report = report


# --------------------------------------------------------------------------
# envelopes
# --------------------------------------------------------------------------


def _decay(t: ArrayLike, m: float) -> FloatArray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("envelopes are defined for t >= 0")
    return np.exp(-t / m)


def lemma1_envelope(dv0: ArrayLike, domega: ArrayLike, K: float, m: float, t: ArrayLike) -> FloatArray:
    """Upper bound on |dtheta_i(t) - dtheta_j(t)| from the initial gap ``dv0`` and ``|omega_i - omega_j|``."""
    e = _decay(t, m)
    return np.abs(dv0) * e + (np.abs(domega) + 2.0 * K) * (1.0 - e)


def velocity_envelope(v0: ArrayLike, omega_i: ArrayLike, K: float, m: float, t: ArrayLike) -> FloatArray:
    """Upper bound on |dtheta_i(t)|."""
    e = _decay(t, m)
    return np.abs(v0) * e + (np.abs(omega_i) + K) * (1.0 - e)


def acceleration_envelope(v0: ArrayLike, omega_i: ArrayLike, K: float, m: float, t: ArrayLike) -> FloatArray:
    """Upper bound on m |ddtheta_i(t)|."""
    return velocity_envelope(v0, omega_i, K, m, t) + np.abs(omega_i) + K


# --------------------------------------------------------------------------
# admissible region
# --------------------------------------------------------------------------


def _check_angles(alpha: float, beta: float) -> None:
    if not (0 <= beta < alpha and 2 * beta + alpha < math.pi):
        raise DomainError(
            f"need 0 <= beta < alpha and 2*beta + alpha < pi, got alpha={alpha}, beta={beta}"
        )


def mu_max(alpha: float, beta: float, M: int, N: int) -> float:
    """Largest admissible coupling margin mu for a majority of M out of N.

    May be <= 0, in which case no admissible mu exists. ``beta = 0`` is
    accepted as the closure of the region so limits can be evaluated.
    """
    _check_angles(alpha, beta)
    if not 1 <= M <= N:
        raise DomainError(f"need 1 <= M <= N, got M={M}, N={N}")
    r = M / N
    return (
        r * math.sin(alpha / 2 - beta / 4) * math.cos(alpha / 2 + 5 * beta / 8)
        - (1 - r) * math.cos(alpha / 2 - beta / 8)
    )


def mk_bound(lam: float, mu: float, beta: float) -> float:
    """Admissible upper bound on the product m*K.

    beta / (4 (lam + mu + 2) ln((lam + 2 mu + 2) / mu)).
    """
    if not mu > 0:
        raise DomainError(f"mk_bound needs mu > 0, got {mu}")
    if beta < 0:
        raise DomainError(f"mk_bound needs beta >= 0, got {beta}")
    return beta / (4.0 * (lam + mu + 2.0) * math.log((lam + 2.0 * mu + 2.0) / mu))


def tau(lam: float, mu: float, beta: float, K: float) -> float:
    """Time over which the majority diameter cannot move by more than beta/4."""
    if not K > 0:
        raise DomainError(f"tau needs K > 0, got {K}")
    return beta / (4.0 * (lam + mu + 2.0) * K)


@dataclass(frozen=True)
class Thm2Params:
    M: int
    alpha: float
    beta: float
    mu: float
    lam: float


def trap_denominator(p: Thm2Params, m: float, K: float) -> float:
    """mu - (lam + 2 mu + 2) exp(-tau/m); positive strictly inside the mK bound, zero on it."""
    return p.mu - (p.lam + 2.0 * p.mu + 2.0) * math.exp(-tau(p.lam, p.mu, p.beta, K) / m)


def trap_time(p: Thm2Params, m: float, K: float) -> float:
    """Time after which the majority sits in the narrower sector of width pi - alpha - beta."""
    den = trap_denominator(p, m, K)
    if not den > 0:
        raise HypothesisViolation(
            f"trapping rate {den:.6g} is not positive; m*K={m * K:.6g} is too large"
        )
    return tau(p.lam, p.mu, p.beta, K) + p.beta / (K * den)


# --------------------------------------------------------------------------
# condition reports
# --------------------------------------------------------------------------


def _sig(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


@dataclass(frozen=True)
class Condition:
    hypothesis: str
    lhs: float | None
    rhs: float | None
    verdict: bool


@dataclass(frozen=True)
class ConditionReport:
    check: str
    rows: tuple[Condition, ...]

    @property
    def ok(self) -> bool:
        return all(r.verdict for r in self.rows)

    def row(self, hypothesis: str) -> Condition:
        for r in self.rows:
            if r.hypothesis == hypothesis:
                return r
        raise KeyError(hypothesis)

    def failing(self) -> list[Condition]:
        return [r for r in self.rows if not r.verdict]

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "rows": [
                {"hypothesis": r.hypothesis, "lhs": _sig(r.lhs), "rhs": _sig(r.rhs), "verdict": r.verdict}
                for r in self.rows
            ],
            "verdict": self.ok,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _cmp(name: str, lhs: float | None, rhs: float | None, op: str) -> Condition:
    if lhs is None or rhs is None:
        return Condition(name, lhs, rhs, False)
    verdict = {
        "<": lhs < rhs,
        "<=": lhs <= rhs,
        ">": lhs > rhs,
        "==": lhs == rhs,
    }[op]
    return Condition(name, float(lhs), float(rhs), bool(verdict))


def _angle_rows(alpha: float, beta: float) -> list[Condition]:
    return [
        _cmp("beta > 0", beta, 0.0, ">"),
        _cmp("beta < alpha", beta, alpha, "<"),
        _cmp("2 beta + alpha < pi", 2 * beta + alpha, math.pi, "<"),
    ]


def _safe(fn, *args) -> float | None:
    try:
        return fn(*args)
    except DomainError:
        return None


def _sector_rows(
    model: ModelParams, initial: PhaseState, M: int, alpha: float, beta: float, mu: float, lam: float
) -> list[Condition]:
    bound = _safe(mk_bound, lam, mu, beta) if beta > 0 else None
    mm = min(max(M, 1), model.N)
    return [
        _cmp("lambda > mu + 2", lam, mu + 2.0, ">"),
        _cmp("mK", model.m * model.K, bound, "<="),
        _cmp("D(Theta_M(0)) <= pi - alpha - beta", subset_diameter(initial.theta, mm),
             math.pi - alpha - beta, "<="),
        _cmp("D(dTheta_M(0)) < lambda K", velocity_diameter(initial, mm), lam * model.K, "<"),
    ]


def check_thm2(model: ModelParams, initial: PhaseState, p: Thm2Params) -> ConditionReport:
    """Hypotheses guaranteeing frequency synchronization from a majority sector."""
    N = model.N
    mmax = _safe(mu_max, p.alpha, p.beta, p.M, N) if 1 <= p.M <= N else None
    rows = [
        _cmp("M > N/2", p.M, N / 2, ">"),
        _cmp("M <= N", p.M, N, "<="),
        *_angle_rows(p.alpha, p.beta),
        _cmp("mu > 0", p.mu, 0.0, ">"),
        _cmp("mu <= mu_max", p.mu, mmax, "<="),
        _cmp("D(Omega) < mu K", model.omega_spread, p.mu * model.K, "<"),
    ]
    sector = _sector_rows(model, initial, p.M, p.alpha, p.beta, p.mu, p.lam)
    return ConditionReport("thm2", tuple(rows[:7] + sector[:2] + rows[7:] + sector[2:]))


def check_thm3(model: ModelParams, initial: PhaseState, p: Thm2Params) -> ConditionReport:
    """Hypotheses guaranteeing phase synchronization of identical oscillators.

    Uses the whole ensemble (M = N) and sets mu from the angles; ``p.M`` and
    ``p.mu`` are ignored.
    """
    N = model.N
    mu = _safe(mu_max, p.alpha, p.beta, N, N)
    rows = _angle_rows(p.alpha, p.beta)
    if mu is None:
        rows.append(Condition("mu > 0", None, 0.0, False))
        mu = float("nan")
    else:
        rows.append(_cmp("mu > 0", mu, 0.0, ">"))
    sector = _sector_rows(model, initial, N, p.alpha, p.beta, mu, p.lam) if math.isfinite(mu) else [
        Condition("lambda > mu + 2", p.lam, None, False),
        Condition("mK", model.m * model.K, None, False),
        _cmp("D(Theta_M(0)) <= pi - alpha - beta", diameter(initial.theta), math.pi - p.alpha - p.beta, "<="),
        _cmp("D(dTheta_M(0)) < lambda K", velocity_diameter(initial), p.lam * model.K, "<"),
    ]
    rows += sector[:2] + [_cmp("D(Omega) = 0", model.omega_spread, 0.0, "==")] + sector[2:]
    return ConditionReport("thm3", tuple(rows))


# --------------------------------------------------------------------------
# three oscillators
# --------------------------------------------------------------------------


def n3_g(alpha3: float = ALPHA3) -> float:
    return math.sin(alpha3 / 16.0) * math.cos(11.0 * alpha3 / 16.0)


@dataclass(frozen=True)
class N3Constants:
    alpha3: float
    g: float
    lambda3: float
    mk_bound3: float
    gamma: float
    T1: float
    n: int

    @property
    def diameter_bound(self) -> float:
        """4 n pi + alpha3, the ceiling on D(Theta(t)) for all t."""
        return 4.0 * self.n * math.pi + self.alpha3


def mk_bound3() -> float:
    g = n3_g()
    return ALPHA3 / (4.0 * (g + 2.0) * math.log((4.0 * g + 6.0) / g))


def n3_constants(
    K: float,
    initial_velocity_diameter: float = 0.0,
    initial_diameter: float = 0.0,
    domega: float = 0.0,
    m: float | None = None,
) -> N3Constants:
    """Constants of the three-oscillator argument.

    ``T1`` is the infimum of times t with
    ``D(dTheta(0)) exp(-t/m) < g K / 10`` (zero if it already holds at t=0),
    solved in closed form; it needs ``m`` whenever the initial velocity
    spread is nonzero. ``n`` is the smallest positive integer with
    ``(4 n pi + alpha3 - D(Theta(0))) / (D(dTheta(0)) + D(Omega) + 2K) > T1 + 2 gamma``.
    """
    if not K > 0:
        raise DomainError(f"n3_constants needs K > 0, got {K}")
    g = n3_g()
    gamma = ALPHA3 / (4.0 * (g + 2.0) * K)
    target = 0.1 * g * K
    if initial_velocity_diameter < target:
        T1 = 0.0
    else:
        if m is None or not m > 0:
            raise DomainError("T1 needs the inertia m > 0 when the initial velocity spread is nonzero")
        T1 = m * math.log(initial_velocity_diameter / target)
    speed = initial_velocity_diameter + domega + 2.0 * K
    need = (T1 + 2.0 * gamma) * speed + initial_diameter - ALPHA3
    n = max(1, math.floor(need / (4.0 * math.pi)))
    while (4.0 * n * math.pi + ALPHA3 - initial_diameter) / speed <= T1 + 2.0 * gamma:
        n += 1
    while n > 1 and (4.0 * (n - 1) * math.pi + ALPHA3 - initial_diameter) / speed > T1 + 2.0 * gamma:
        n -= 1
    return N3Constants(
        alpha3=ALPHA3, g=g, lambda3=0.9 * g, mk_bound3=mk_bound3(), gamma=gamma, T1=T1, n=n,
    )


def n3_constants_for(model: ModelParams, initial: PhaseState) -> N3Constants:
    return n3_constants(
        model.K,
        initial_velocity_diameter=velocity_diameter(initial),
        initial_diameter=diameter(initial.theta),
        domega=model.omega_spread,
        m=model.m,
    )


def n3_final_sign(mK: float, K: float = 1.0) -> float:
    """(2 + 4g/3) exp(-gamma/m) - g/3; nonpositive whenever mK <= mk_bound3, zero on the bound."""
    g = n3_g()
    m = mK / K
    gamma = ALPHA3 / (4.0 * (g + 2.0) * K)
    return (2.0 + 4.0 * g / 3.0) * math.exp(-gamma / m) - g / 3.0


def check_n3(model: ModelParams) -> ConditionReport:
    """Parameter-only hypotheses of unconditional synchronization for N = 3."""
    if model.N != 3:
        raise DomainError(f"check_n3 applies to N = 3 only, got N = {model.N}")
    c = n3_constants(model.K)
    return ConditionReport(
        "n3",
        (
            _cmp("mK", model.m * model.K, c.mk_bound3, "<="),
            _cmp("D(Omega) < lambda3 K", model.omega_spread, c.lambda3 * model.K, "<"),
        ),
    )


# --------------------------------------------------------------------------
# feasibility search
# --------------------------------------------------------------------------

OBJECTIVES = ("mu_max", "mk_bound", "domega")


@dataclass(frozen=True)
class SearchResult:
    objective: str
    feasible: bool
    value: float
    params: Thm2Params | None
    N: int
    resolution: int

    def to_dict(self) -> dict:
        out = {
            "objective": self.objective,
            "feasible": self.feasible,
            "value": _sig(self.value),
            "N": self.N,
            "resolution": self.resolution,
        }
        out.update(asdict(self.params) if self.params else {"M": None, "alpha": None, "beta": None, "mu": None, "lam": None})
        return out


def _mu_max_grid(alpha: FloatArray, beta: FloatArray, r: float) -> FloatArray:
    return (
        r * np.sin(alpha / 2 - beta / 4) * np.cos(alpha / 2 + 5 * beta / 8)
        - (1 - r) * np.cos(alpha / 2 - beta / 8)
    )


def _angles(u: FloatArray, v: FloatArray) -> tuple[FloatArray, FloatArray]:
    # unit square -> {0 < beta < alpha, 2 beta + alpha < pi}
    alpha = math.pi * u
    beta = v * np.minimum(alpha, (math.pi - alpha) / 2)
    return alpha, beta


def _evaluate(objective, u, v, w, x, r, lam_span):
    """Objective on a tensor grid of unit coordinates; -inf where infeasible."""
    U, V, W, X = np.meshgrid(u, v, w, x, indexing="ij")
    alpha, beta = _angles(U, V)
    mm = _mu_max_grid(alpha, beta, r)
    mu = W * mm
    lam = mu + 2.0 + lam_span * X
    with np.errstate(divide="ignore", invalid="ignore"):
        if objective in ("mu_max", "domega"):
            val = mm.copy()
        else:
            val = beta / (4.0 * (lam + mu + 2.0) * np.log((lam + 2.0 * mu + 2.0) / mu))
    ok = (mm > 0) & (beta > 0) & (beta < alpha) & (2 * beta + alpha < math.pi)
    val = np.where(ok, val, -np.inf)
    return val, (alpha, beta, mu, lam)


def _interior(level: int) -> FloatArray:
    k = 2**level
    return np.arange(1, k) / k


def feasible_search(
    N: int,
    M: int,
    objective: str = "mu_max",
    resolution: int = 5,
    lam_span: float = 10.0,
    refine_steps: int = 4,
) -> SearchResult:
    """Grid-plus-refinement search of the admissible (alpha, beta, mu, lambda) region.

    Objectives: ``"mu_max"`` (largest coupling margin), ``"mk_bound"``
    (largest admissible m*K) and ``"domega"`` (largest admissible
    D(Omega)/K, whose supremum is the largest mu). Grids at level ``k`` use
    the interior dyadic points ``i / 2**k``; every level up to
    ``resolution`` is evaluated and refined, and the best value over all
    levels is kept, so raising ``resolution`` never lowers the result. Ties
    go to the smallest alpha, then the smallest beta.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}, expected one of {OBJECTIVES}")
    if N < 1 or M < 1:
        raise DomainError("N and M must be positive")
    r = M / N
    best_val, best = -np.inf, None
    if 2 * M <= N or M > N:
        return SearchResult(objective, False, float("nan"), None, N, resolution)
    mu_axis = objective == "mk_bound"
    for level in range(1, resolution + 1):
        u = v = _interior(level)
        k = 2 ** min(level, 5)
        w = np.arange(1, k + 1) / k if mu_axis else np.array([1.0])
        x = np.arange(1, k + 1) / k
        val, coords = _evaluate(objective, u, v, w, x, r, lam_span)
        idx = np.unravel_index(np.argmax(val), val.shape)
        if not np.isfinite(val[idx]):
            continue
        cu, cv, cw, cx = u[idx[0]], v[idx[1]], w[idx[2]], x[idx[3]]
        h = 1.0 / 2**level
        cand_val = val[idx]
        cand = tuple(c[idx] for c in coords)
        # local zoom: shrink a box around the incumbent
        for _ in range(refine_steps):
            h /= 4
            zu = np.clip(cu + h * np.arange(-4, 5), h, 1 - h)
            zv = np.clip(cv + h * np.arange(-4, 5), h, 1 - h)
            zw = np.clip(cw + h * np.arange(-4, 5), h, 1.0) if mu_axis else w
            zx = np.clip(cx + h * np.arange(-4, 5), h, 1.0)
            zval, zco = _evaluate(objective, zu, zv, zw, zx, r, lam_span)
            zi = np.unravel_index(np.argmax(zval), zval.shape)
            if zval[zi] > cand_val:
                cand_val = zval[zi]
                cand = tuple(c[zi] for c in zco)
                cu, cv, cw, cx = zu[zi[0]], zv[zi[1]], zw[zi[2]], zx[zi[3]]
        if cand_val > best_val:
            best_val, best = cand_val, cand
    if best is None:
        return SearchResult(objective, False, float("nan"), None, N, resolution)
    alpha, beta, mu, lam = (float(c) for c in best)
    return SearchResult(objective, True, float(best_val), Thm2Params(M, alpha, beta, mu, lam), N, resolution)
