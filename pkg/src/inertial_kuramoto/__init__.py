"""Simulation and verification tools for second-order (inertial) Kuramoto ensembles.

The model is ``m theta_i'' + theta_i' = omega_i + (K/N) sum_j sin(theta_j - theta_i)``
with unwrapped phases. The package integrates it, measures diameters, energy
and synchronization, evaluates the sufficient conditions for phase locking,
and runs reproducible scenarios around them.
"""

from .integrator import (
    Collision,
    IntegrationError,
    IntegratorConfig,
    OracleError,
    Trajectory,
    default_dt,
    effective_step,
    integrate,
    reference_integrate,
)
from .metrics import (
    EnergyLedger,
    RepresentationSet,
    SyncVerdict,
    coupling_asymmetry,
    coupling_asymmetry_forms,
    detect_frequency_sync,
    detect_phase_sync,
    diameter,
    diameter_rate,
    diameter_rate_series,
    energy_ledger,
    extrapolated_ledger,
    max_diameter,
    representation_set,
    subset_diameter,
    velocity_diameter,
    wrap_phase,
)
from .model import (
    ConfigurationError,
    DomainError,
    ModelParams,
    PhaseState,
    ReducedState,
    coupling,
    from_reduced,
    mean_phase_exact,
    to_reduced,
    vector_field,
)
from .scenarios import (
    CounterexampleConfig,
    EnsembleSpec,
    MonteCarloSummary,
    run_counterexample,
    run_n3_montecarlo,
    run_thm2_showcase,
    run_thm3_showcase,
)
from .theory import (
    ALPHA3,
    ConditionReport,
    HypothesisViolation,
    N3Constants,
    Thm2Params,
    check_n3,
    check_thm2,
    check_thm3,
    feasible_search,
    lemma1_envelope,
    mk_bound,
    mk_bound3,
    mu_max,
    n3_constants,
    tau,
    trap_time,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
