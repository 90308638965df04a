"""The analytic coverage against a direct simulation of the network.

Run: python demos/05_monte_carlo_check.py
"""

import numpy as np

from mmwave_densify import McConfig, coverage_probability, default_params, simulate_coverage

# The analytic formula replaces the gamma fading CCDF by Alzer's exponential sum.
# Simulating with true gamma fading shows the size of that step; simulating with
# the distribution whose CCDF is exactly the Alzer sum isolates everything else.
taus_db = np.array([0, 5, 10, 15])
taus = 10 ** (taus_db / 10)
print("psi  k   tau_dB  analytic  MC gamma  MC alzer")
for psi in (1.0, 4.0, 10.0):
    for k in (1, 12):
        p = default_params(psi=psi, k=k)
        a = coverage_probability(taus, p)
        g = simulate_coverage(taus, p, McConfig(trials=50_000, seed=1))
        z = simulate_coverage(taus, p, McConfig(trials=50_000, seed=1, fading="alzer"))
        for t, ai, gi, zi in zip(taus_db, a, g, z):
            print(f"{psi:4.1f} {k:2d}  {t:5d}   {ai:.4f}    {gi.mean:.4f}    {zi.mean:.4f}")
