"""Monte Carlo simulation of the network model, used as an independent oracle.

Nothing here uses the analytic approximations: APs and users are Poisson
point processes, the serving link has gamma fading, interferer gains are drawn
from the beam mixture, and the load is counted from an explicit sectorized
association.

Trials run in fixed-size batches, each with its own generator spawned from
the seed, so results do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .load import LoadPmf
from .model import TWO_PI, NetworkParams, derive_ap_intensity, gain_mixture, validate
from .specfun import alzer_eta

FADING_MODES = ("gamma", "deterministic", "alzer")


@dataclass(frozen=True)
class McConfig:
    """``fading`` is "gamma" (Nakagami power, shape mu), "deterministic", or
    "alzer" (the distribution whose CDF is exactly (1 - e^(-eta x))^mu)."""

    trials: int = 100_000
    seed: int = 0
    window_radius: float | None = None  # km, default 5 R_B
    fading: str = "gamma"
    batch_size: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.fading not in FADING_MODES:
            raise ValueError(f"fading must be one of {FADING_MODES}")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError("window_radius must be > 0")

    def window(self, params: NetworkParams) -> float:
        w = 5 * params.r_los if self.window_radius is None else self.window_radius
        if w < params.r_los:
            raise ValueError("window_radius must be at least R_B")
        return w


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width_95: float
    trials: int

    def contains(self, value, widths=1.0) -> bool:
        return abs(value - self.mean) <= widths * self.half_width_95


def _proportion(hits, n, scale=1.0):
    p = hits / n
    return McEstimate(scale * p, scale * 1.96 * math.sqrt(p * (1 - p) / n), n)


def _run_batches(mc: McConfig, fn):
    """Apply fn(rng, n) to each batch; results come back in batch order."""
    sizes = [mc.batch_size] * (mc.trials // mc.batch_size)
    if mc.trials % mc.batch_size:
        sizes.append(mc.trials % mc.batch_size)
    seqs = np.random.SeedSequence(mc.seed).spawn(len(sizes))
    jobs = [(np.random.Generator(np.random.PCG64(s)), n) for s, n in zip(seqs, sizes)]
    if mc.workers > 1:
        with ThreadPoolExecutor(mc.workers) as pool:
            return list(pool.map(lambda a: fn(*a), jobs))
    return [fn(*a) for a in jobs]


def _fading(rng, n, params, mode):
    if mode == "deterministic":
        return np.ones(n)
    if mode == "gamma":
        return rng.gamma(params.mu, 1.0 / params.mu, size=n)
    # max of mu exponentials with rate eta
    return rng.exponential(1.0 / alzer_eta(params.mu), size=(n, params.mu)).max(axis=1)


def _interferer_gains(rng, n, params, interferers):
    b = params.beam
    if interferers == "side":
        return np.full(n, b.side_gain_ap * b.side_gain_user)
    if interferers == "main":
        return np.full(n, b.main_gain_ap * b.main_gain_user)
    if interferers != "mixture":
        raise ValueError(f"unknown interferer model {interferers!r}")
    mix = gain_mixture(params)
    return np.asarray(mix.gains)[rng.choice(len(mix.entries), size=n, p=mix.probabilities)]


def _sir_batch(rng, n, params: NetworkParams, fading, interferers):
    """SIR and LOS-AP count for n independent typical users."""
    counts = rng.poisson(params.psi, size=n)
    total = int(counts.sum())
    sir = np.zeros(n)  # no LOS AP: outage
    if total == 0:
        return sir, counts
    owner = np.repeat(np.arange(n), counts)
    u = rng.random(total)  # (distance / R_B)^2 is uniform in the LOS disk
    g = _interferer_gains(rng, total, params, interferers)
    path = (params.r_los**2 * u) ** (-params.alpha_los / 2.0)
    has = counts > 0
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[has]
    umin = np.minimum.reduceat(u, starts)
    umin_full = np.full(n, np.inf)
    umin_full[has] = umin
    serving = u == umin_full[owner]
    interference = np.bincount(owner, weights=np.where(serving, 0.0, g * path), minlength=n)
    b = params.beam
    h = _fading(rng, int(has.sum()), params, fading)
    signal = b.main_gain_ap * b.main_gain_user * h * (params.r_los**2 * umin) ** (-params.alpha_los / 2.0)
    with np.errstate(divide="ignore"):
        sir[has] = signal / interference[has]
    return sir, counts


def simulate_sir(params: NetworkParams, mc: McConfig = McConfig(), interferers="mixture"):
    """(sir, n_aps) arrays over all trials; sir = 0 when no AP is in LOS, inf when alone."""
    validate(params)
    parts = _run_batches(mc, lambda rng, n: _sir_batch(rng, n, params, mc.fading, interferers))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def simulate_coverage(tau, params: NetworkParams, mc: McConfig = McConfig(), interferers="mixture"):
    """Fraction of trials with SIR > tau.  An array of thresholds reuses one
    set of realizations and returns a list of estimates."""
    sir, _ = simulate_sir(params, mc, interferers)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    out = [_proportion(int(np.count_nonzero(sir > t)), sir.size) for t in taus]
    return out if np.ndim(tau) else out[0]


# -- load and joint (SIR, load) draws -------------------------------------------


def _uniform_disk(rng, n, radius):
    r = radius * np.sqrt(rng.random(n))
    th = TWO_PI * rng.random(n)
    return r * np.cos(th), r * np.sin(th)


def _joint_trial(rng, params: NetworkParams, window, lam_a, fading, want_sir):
    """One network realization seen from a user at the origin.

    Returns (n_los_aps, sir, psi_count); psi_count is 0 when the user has no
    AP within R_B.
    """
    R = params.r_los
    n_ap = rng.poisson(lam_a * math.pi * window**2)
    ax, ay = _uniform_disk(rng, n_ap, window)
    d2 = ax**2 + ay**2
    los = np.nonzero(d2 <= R * R)[0]
    if los.size == 0:
        return 0, 0.0, 0
    order = los[np.argsort(d2[los])]
    t = order[0]
    sir = math.nan
    if want_sir:
        b = params.beam
        inter = order[1:]
        g = _interferer_gains(rng, inter.size, params, "mixture")
        i_pow = float(np.sum(g * d2[inter] ** (-params.alpha_los / 2.0)))
        s = b.main_gain_ap * b.main_gain_user * _fading(rng, 1, params, fading)[0] * d2[t] ** (-params.alpha_los / 2.0)
        sir = math.inf if i_pow == 0 else s / i_pow
    # sector of the tagged AP holding the origin, in a randomly rotated frame
    k = params.k
    width = TWO_PI / k
    rot = TWO_PI * rng.random()
    ang0 = math.atan2(-ay[t], -ax[t])
    sector_start = rot + width * math.floor(((ang0 - rot) % TWO_PI) / width)
    # other users of that sector: PPP restricted to the wedge of radius R_B
    n_u = rng.poisson(params.lambda_user * math.pi * R * R / k)
    ur = R * np.sqrt(rng.random(n_u))
    uth = sector_start + width * rng.random(n_u)
    ux = ax[t] + ur * np.cos(uth)
    uy = ay[t] + ur * np.sin(uth)
    # a user stays with the tagged AP unless another AP is closer
    near = np.nonzero((ax - ax[t]) ** 2 + (ay - ay[t]) ** 2 <= 4 * R * R)[0]
    near = near[near != t]
    if near.size and n_u:
        dt = ur**2
        do = ((ux[:, None] - ax[near][None, :]) ** 2 + (uy[:, None] - ay[near][None, :]) ** 2).min(axis=1)
        n_u = int(np.count_nonzero(dt <= do))
    return int(los.size), sir, 1 + int(n_u)


def _joint_batch(rng, n, params, window, fading, want_sir):
    lam_a = derive_ap_intensity(params)
    rows = [_joint_trial(rng, params, window, lam_a, fading, want_sir) for _ in range(n)]
    return np.array(rows, dtype=float).reshape(n, 3)


@dataclass(frozen=True)
class JointSample:
    n_aps: np.ndarray
    sir: np.ndarray  # NaN when not simulated
    psi_count: np.ndarray  # 0 when the user is unserved

    def write_csv(self, fh):
        """Per-trial records: trial, n_aps, sir_db, psi_count."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "n_aps", "sir_db", "psi_count"])
        with np.errstate(divide="ignore"):
            sir_db = 10 * np.log10(self.sir)
        for i, (a, s, c) in enumerate(zip(self.n_aps, sir_db, self.psi_count)):
            w.writerow([i, int(a), "" if math.isnan(s) else repr(float(s)), int(c)])


def simulate_joint(params: NetworkParams, mc: McConfig = McConfig(), with_sir=True) -> JointSample:
    validate(params)
    window = mc.window(params)
    if window < 3 * params.r_los:
        raise ValueError("load simulation needs window_radius >= 3 R_B")
    parts = _run_batches(mc, lambda rng, n: _joint_batch(rng, n, params, window, mc.fading, with_sir))
    a = np.concatenate(parts)
    return JointSample(a[:, 0].astype(int), a[:, 1], a[:, 2].astype(int))


def empirical_pmf(counts) -> LoadPmf:
    counts = np.asarray(counts, dtype=int)
    served = counts[counts > 0]
    excluded = int(counts.size - served.size)
    if served.size == 0:
        raise ValueError("no trial had a served user")
    hist = np.bincount(served)[1:].astype(float)
    return LoadPmf(np.arange(1, hist.size + 1), hist / served.size, hist.size, 0.0, excluded)


def simulate_load(params: NetworkParams, mc: McConfig = McConfig()) -> LoadPmf:
    """Histogram of users sharing the tagged user's AP sector; unserved
    trials are left out and reported as ``excluded``."""
    return empirical_pmf(simulate_joint(params, mc, with_sir=False).psi_count)


def simulate_fixed_rate_throughput(rho, params: NetworkParams, mc: McConfig = McConfig()) -> McEstimate:
    """lambda_U rho P[(B / Psi) log2(1 + min(SIR, cap)) > rho], one realization per trial."""
    if not rho > 0:
        raise ValueError("rho must be > 0")
    s = simulate_joint(params, mc, with_sir=True)
    served = s.psi_count > 0
    sir = np.minimum(s.sir, params.sinr_cap)
    rate = np.zeros(s.sir.size)
    rate[served] = params.bandwidth_total / s.psi_count[served] * np.log2(1 + sir[served])
    hits = int(np.count_nonzero(rate > rho))
    return _proportion(hits, s.sir.size, params.lambda_user * rho)
