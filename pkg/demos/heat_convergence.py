"""Spatial convergence of the decomposed heat problem.

An insulated bar (or square) of side 2 starts from a cosine profile. At
t = 0.01 with dt = 1e-5 the time error is negligible, so halving h should
cut the L2 temperature error by about four.

Run: python demos/heat_convergence.py [--dims 2]
"""
import argparse

from dualschur.experiments import ExperimentConfig, run

ap = argparse.ArgumentParser()
ap.add_argument("--dims", type=int, default=1, choices=(1, 2))
args = ap.parse_args()

for method, gamma in (("d", 0.75), ("modified-d", 0.25), ("modified-d", 0.75)):
    table = run(ExperimentConfig("converge", dims=args.dims, method=method, gamma=gamma))
    print(f"{args.dims}D {method:<10} gamma = {gamma}")
    print("  elements      h          L2 error    rate")
    for row in table.rows:
        n, h, _, ed, _, rate, _ = row
        print(f"  {n:8d}  {h:9.5f}  {ed:12.4e}  {rate:6.3f}")
