"""Bookkeeping of the energy identity along a trajectory.

The residual of the integrated identity comes from the trapezoidal
quadrature alone, so it falls fourfold when the step is halved; combining
the two grids (Richardson) removes the leading term.
"""

from inertial_kuramoto import (
    IntegratorConfig,
    ModelParams,
    PhaseState,
    effective_step,
    energy_ledger,
    extrapolated_ledger,
    integrate,
)

params = ModelParams(m=0.3, K=1.5, omega=[0.4, -0.1, 0.2, -0.5])
start = PhaseState(0.0, [0.0, 2.0, -1.0, 2.8], [0.5, -0.5, 0.2, 0.0])
cfg = IntegratorConfig(t_end=20.0)
h = effective_step(0.0, params, cfg)
coarse = energy_ledger(integrate(start, params, cfg))
fine = energy_ledger(integrate(start, params, IntegratorConfig(t_end=20.0, dt=h / 2)))
best = extrapolated_ledger(coarse, fine)

print(f"{'grid':<12} {'max |R|':>10} {'telescoping gap':>16}")
for name, led in (("h", coarse), ("h/2", fine), ("extrapolated", best)):
    print(f"{name:<12} {led.max_abs_residual:10.2e} {led.telescoping_error:16.2e}")
print(f"\nsup |int H| = {coarse.sup_abs_int_H:.4f}  <=  (N-1)K = {coarse.coupling_bound:.4f}")
print(f"E_N = {coarse.E[0]:.3f} at t = 0 and {coarse.E[-1]:.2e} at t = 20 (velocities lock to mean(omega) = 0)")
