"""Initial diameter and its rate do not control the future diameter.

Four identical oscillators start with diameter 0.3 and zero diameter rate,
yet a velocity kick of size a to the middle pair drives the spread to
roughly 2a. The measured maximum is compared with the analytic lower bound.
"""

from inertial_kuramoto import CounterexampleConfig, run_counterexample
from inertial_kuramoto.scenarios import counterexample_lower_bound

print(f"{'a':>6} {'D(0)':>6} {'rate(0)':>8} {'max D':>10} {'lower bound':>12}")
for a in (10.0, 100.0, 1000.0):
    cfg = CounterexampleConfig(a=a)
    rep = run_counterexample(cfg)
    bound = float(counterexample_lower_bound(cfg, cfg.T))
    print(f"{a:6.0f} {rep.initial_diameter:6.2f} {rep.initial_rate:8.2f} {rep.max_diameter:10.2f} {bound:12.2f}")
