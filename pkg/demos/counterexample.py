"""Bounded weighted values do not imply bounded integer values for gamma <= 1/2.

Given s^(n+gamma) = (1 - gamma) s^(n) + gamma s^(n+1), the integer sequence
is recovered by s^(n+1) = (s^(n+gamma) - (1 - gamma) s^(n)) / gamma. The
recursion multiplies errors by -(1 - gamma)/gamma, which is at least one in
magnitude once gamma <= 1/2.

Run: python demos/counterexample.py
"""
import numpy as np

from dualschur import counterexample_sequence, proposition_bounded_reconstruction

s, w = counterexample_sequence(0.5, 5)
print("gamma = 1/2   s      :", s.astype(int).tolist())
print("              s_(n+g):", w.astype(int).tolist())

for gamma in (0.25, 0.4):
    s, _ = counterexample_sequence(gamma, 30)
    print(f"gamma = {gamma}  growth |s30/s29| = {abs(s[-1] / s[-2]):.6f}"
          f"  (expected {(1 - gamma) / gamma:.6f})")

rng = np.random.default_rng(0)
worst = max(np.abs(proposition_bounded_reconstruction(rng.uniform(-1, 1, 10_000), 0.0, 0.75)).max()
            for _ in range(20))
print(f"gamma = 0.75  random |weighted| <= 1 gives max |s| = {worst:.4f} (bound 2)")
