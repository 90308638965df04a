"""Fixed-rate, multi-rate and Shannon-bound throughput against k.

Run: python demos/03_throughput_bounds.py   (about half a minute)
"""

from mmwave_densify import (
    RateSchedule,
    default_params,
    multi_rate_throughput,
    optimal_rate_threshold,
    throughput_upper_bound,
)

# Rates are capped by a 40 dB SIR ceiling (see NetworkParams.sinr_cap_db);
# without it a lone LOS AP would give unbounded rate.
ladder = RateSchedule.ladder_mbps()  # 1, 31, ..., 271 Mbit/s
for psi in (4.0, 10.0):
    print(f"psi = {psi}   (per-user Mbit/s)")
    print("  k   rho*    fixed(rho*)  multi   upper")
    for k in (1, 2, 4, 8, 12):
        p = default_params(psi=psi, k=k)
        rho, t_fixed = optimal_rate_threshold(p)
        t_multi = multi_rate_throughput(ladder, p).value
        t_up = throughput_upper_bound(p).value
        lu = p.lambda_user
        print(f"  {k:2d}  {rho / 1e6:6.1f}  {t_fixed / lu / 1e6:8.2f}  {t_multi / lu / 1e6:8.2f}  "
              f"{t_up / lu / 1e6:7.2f}")
    print()
