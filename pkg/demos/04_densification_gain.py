"""Does adding APs pay off?  Densification gain with and without multiplexing.

Run: python demos/04_densification_gain.py   (about a minute)
"""

from mmwave_densify import densification_gain, default_params
from mmwave_densify.specfun import NumericalError

# gamma(psi, k) compares throughput at density psi with rate psi*rho0 to the
# throughput at psi = 1 with rate rho0.  gamma = psi would be ideal scaling.
rho0 = 80e6
print("k \\ psi " + "".join(f"{psi:8.0f}" for psi in (2, 4, 6, 8, 10)))
for k in (1, 2, 4, 8, 12):
    gains = [densification_gain(float(psi), default_params(k=k), rho0) for psi in (2, 4, 6, 8, 10)]
    print(f"{k:7d} " + "".join(f"{g:8.3f}" for g in gains))

# The mean-bandwidth shortcut replaces B / Psi by a single average bandwidth.
# At psi = 1, k = 1 that bandwidth times the capped spectral efficiency is below
# rho0, so the reference throughput is exactly zero and no ratio exists.
print()
try:
    densification_gain(2.0, default_params(k=1), rho0, load="mean")
except NumericalError as e:
    print(f"mean-bandwidth shortcut, k=1: {e}")
