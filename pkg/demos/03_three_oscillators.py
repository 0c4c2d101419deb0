"""Three oscillators synchronize from any start once the inertia is small.

Prints the closed-form constants, then runs a small random ensemble with
phases spread over fifty turns and velocities up to 50 K.
"""

from inertial_kuramoto import EnsembleSpec, ModelParams, check_n3, mk_bound3, n3_constants, run_n3_montecarlo

c = n3_constants(1.0)
print(f"g = {c.g:.6f}   lambda3 = {c.lambda3:.6f}   mK bound = {mk_bound3():.6f}   gamma = {c.gamma:.5f}")

model = ModelParams(m=0.03, K=1.0, omega=[0.02, 0.0, -0.02])
print("check:", "pass" if check_n3(model).ok else "fail")

summary = run_n3_montecarlo(EnsembleSpec(model=model, count=10, seed=1))
print(f"{summary.successes}/{summary.runs} runs locked; worst residual {summary.worst_residual:.1e}")
for r in summary.records:
    print(f"  run {r.index}: max spread {r.max_diameter:8.2f} <= {r.diameter_bound:8.2f}  horizon {r.horizon:.0f}")
