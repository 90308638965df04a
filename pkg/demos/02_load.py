"""How many users share a sector, and what bandwidth is left for each.

Run: python demos/02_load.py
"""

from mmwave_densify import default_params, load_pmf, load_pmf_full, load_pmf_simplified, mean_bandwidth
from mmwave_densify.load import expected_inverse_load, mean_sector_users, total_variation

# The load Psi counts the tagged user plus everyone else in the same AP sector.
# With 1e4 users/km^2 and a 200 m LOS radius there are hundreds of them.
for psi in (1.0, 4.0, 10.0):
    for k in (1, 4, 12):
        p = default_params(psi=psi, k=k)
        pmf = load_pmf(p)
        xi_mean = 1 + 1.28 * mean_sector_users(p)
        print(f"psi={psi:4.1f} k={k:2d}  E[Psi]={pmf.mean():8.1f}  (1 + 1.28 m = {xi_mean:8.1f})  "
              f"E[B/Psi]={2e9 * expected_inverse_load(pmf) / 1e6:7.2f} MHz  "
              f"mean-bandwidth form={mean_bandwidth(p) / 1e6:7.2f} MHz")

# The truncated-area law and its untruncated simplification agree once psi >= 4.
print()
for psi in (1.0, 2.0, 4.0, 10.0):
    p = default_params(psi=psi)
    print(f"psi={psi:4.1f}  TV(full, simplified) = {total_variation(load_pmf_full(p), load_pmf_simplified(p)):.2e}")

# First few masses, as CSV
print()
print(load_pmf(default_params(psi=4.0, k=12)).to_csv().splitlines()[:6])
