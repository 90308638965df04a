"""Coverage as APs densify, with and without spatial multiplexing.

Run: python demos/01_coverage_vs_density.py
"""

import math

import numpy as np

from mmwave_densify import coverage_probability, default_params, density_threshold

tau = 10.0  # 10 dB

# Sparse networks are power limited: a user is covered as soon as one AP is in LOS.
# Dense networks are interference limited: more LOS APs means more interferers.
psis = np.arange(0.5, 10.01, 0.5)
print("psi   " + "  ".join(f"k={k:<5d}" for k in (1, 4, 12)) + "  1-e^-psi")
for psi in psis:
    row = [coverage_probability(tau, default_params(psi=float(psi), k=k)) for k in (1, 4, 12)]
    print(f"{psi:4.1f}  " + "  ".join(f"{c:.4f} " for c in row) + f"  {1 - math.exp(-psi):.4f}")

# Serving k users at once turns k sectors of every AP into main-lobe interferers,
# so the coverage peak moves to sparser deployments as k grows.
print()
for k in (1, 4, 12):
    print(f"coverage-maximizing psi at 10 dB, k={k}: {density_threshold(tau, k, default_params()):.2f}")

# Two closed-form limits: every LOS user is covered as tau -> 0, and only users
# with a single LOS AP (no interferer at all) are covered as tau -> infinity.
p = default_params(psi=4.0, k=12)
print()
print(f"tau -> 0  : {coverage_probability(1e-12, p):.10f}  vs 1 - e^-4  = {1 - math.exp(-4):.10f}")
print(f"tau = 1e6 : {coverage_probability(1e6, p):.10f}  vs 4 e^-4    = {4 * math.exp(-4):.10f}")
