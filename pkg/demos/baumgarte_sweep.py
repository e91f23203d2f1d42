"""Baumgarte-stabilised rate continuity on a bar with a cold right end.

The bar [0, 2] is insulated on the left and held at zero on the right; it
starts at one and is split into two 10-element halves. With gamma = 0.1 the
admissible Baumgarte parameter is at most 2.5. Past that bound the
constraint drift is amplified every step.

Run: python demos/baumgarte_sweep.py
"""
from dualschur.experiments import ExperimentConfig, run

info = run(ExperimentConfig("baumgarte", t_end=0.0)).summary
print("largest subdomain frequencies:", ", ".join(f"{w:.2f}" for w in info["omega_max"]))
print(f"alpha bound at gamma = 0.1: {info['alpha_max']}")
print("critical steps (alpha = 1):", ", ".join(f"{d:.4e}" for d in info["baumgarte_critical_dt"]))
print()
print("gamma  alpha  verdict      max drift    max |state|")
for gamma, alpha in ((0.1, 1.0), (0.1, 2.6), (0.5, 2.6), (0.5, 10.0)):
    s = run(ExperimentConfig("baumgarte", gamma=gamma, alpha=alpha, dt=1e-3, t_end=2.0)).summary
    print(f"{gamma:5}  {alpha:5}  {s['verdict']:<11}  {s['max_drift_d_inf']:.3e}  {s['max_state']:.3e}")
