"""Rate-level metrics built on coverage and load.

A user holding Psi - 1 co-scheduled neighbours gets bandwidth B / Psi under
round robin, so rate rho is met when SIR > tau_n = 2^(rho n / B) - 1.  Every
metric here applies the SIR ceiling of :class:`NetworkParams` (no rate above
``B/Psi log2(1 + cap)``); with ``sinr_cap_db=None`` the interference-limited
model is used as is, in which case the upper bound diverges.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coverage import CoverageTable, coverage_probability, coverage_table
from .load import expected_inverse_load, load_pmf, mean_bandwidth
from .model import TWO_PI, NetworkParams, validate
from .series import _coefficients_core, choose_degree
from .specfun import DEFAULT_QUAD, NumericalError, QuadratureSpec, integrate_interval

LN2 = math.log(2.0)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class BoundaryMaximumWarning(UserWarning):
    """A 1-D search found its best value on the edge of the search range."""


@dataclass(frozen=True)
class RateSchedule:
    thresholds: tuple  # bit/s, strictly increasing

    def __post_init__(self):
        t = tuple(float(x) for x in self.thresholds)
        if not t:
            raise ValueError("a schedule needs at least one rate")
        if t[0] <= 0 or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("rates must be positive and strictly increasing")
        object.__setattr__(self, "thresholds", t)

    @classmethod
    def arithmetic(cls, first, step, count):
        return cls(tuple(first + step * i for i in range(count)))

    @classmethod
    def ladder_mbps(cls, first=1.0, step=30.0, count=10):
        """Rates first + step*(i-1) Mbit/s, i = 1..count."""
        return cls.arithmetic(first * 1e6, step * 1e6, count)

    @property
    def schedule_id(self):
        t = self.thresholds
        return f"M{len(t)}:{t[0]:.6g}-{t[-1]:.6g}"


@dataclass(frozen=True)
class ThroughputReport:
    value: float  # bit/s/km^2
    kind: str  # fixed | multi | upper_bound
    psi: float
    k: int
    rho: float | None = None
    schedule: RateSchedule | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("throughput must be >= 0")

    @property
    def per_user(self):
        """Value divided by the user intensity (bit/s per user)."""
        return self.extra.get("per_user")


# -- expectation over the load ---------------------------------------------------


def _rate_coverage_direct(taus, params, quad):
    taus = np.asarray(taus, dtype=float)
    out = np.zeros_like(taus)
    live = taus < params.sinr_cap
    if np.any(live):
        uniq, inv = np.unique(taus[live], return_inverse=True)
        out[live] = np.atleast_1d(coverage_probability(uniq, params, quad))[inv]
    return out


def _success_probability(rhos, params: NetworkParams, quad, load="pmf", exact=False):
    """E_Psi[C(2^(rho Psi / B) - 1)] with the SIR ceiling, for each rho."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    if params.psi == 0:
        return np.zeros_like(rhos)
    if load == "mean":
        w = mean_bandwidth(params)
        with np.errstate(over="ignore"):
            taus = np.expm1(LN2 * rhos / w)[:, None]
        probs = np.ones(1)
    elif load == "pmf":
        pmf = load_pmf(params)
        keep = pmf.p > 1e-15
        n, probs = pmf.n[keep], pmf.p[keep]
        with np.errstate(over="ignore"):
            taus = np.expm1(LN2 * rhos[:, None] * n[None, :] / params.bandwidth_total)
    else:
        raise ValueError(f"unknown load model {load!r}")
    if exact:
        cov = _rate_coverage_direct(taus, params, quad)
    else:
        cov = coverage_table(params, quad).rate_coverage(taus)
    return cov @ probs


def fixed_rate_throughput(rho, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD, *,
                          load="pmf", exact=False) -> ThroughputReport:
    """lambda_U rho P(user rate > rho), averaged over the load.

    ``load="mean"`` replaces B/Psi by the mean-bandwidth approximation;
    ``exact=True`` evaluates coverage directly instead of the interpolant.
    """
    validate(params)
    if not rho > 0:
        raise ValueError("rho must be > 0")
    p = float(_success_probability([rho], params, quad, load, exact)[0])
    v = params.lambda_user * rho * p
    return ThroughputReport(v, "fixed", params.psi, params.k, rho=float(rho),
                            extra={"success": p, "per_user": rho * p})


def multi_rate_throughput(schedule: RateSchedule, params: NetworkParams,
                          quad: QuadratureSpec = DEFAULT_QUAD, *, load="pmf", exact=False) -> ThroughputReport:
    """Users get the largest scheduled rate they can sustain.

    Telescoped: lambda_U sum_i (rho_i - rho_{i-1}) P(rate > rho_i), rho_0 = 0.
    """
    validate(params)
    rates = np.array(schedule.thresholds)
    p = _success_probability(rates, params, quad, load, exact)
    steps = np.diff(np.concatenate([[0.0], rates]))
    per_user = float(steps @ p)
    return ThroughputReport(params.lambda_user * per_user, "multi", params.psi, params.k,
                            schedule=schedule, extra={"per_user": per_user})


def _log_panels(x_lo, x_hi):
    n = max(1, int(math.ceil(x_hi - x_lo)))
    edges = np.linspace(x_lo, x_hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _capacity_integral(params: NetworkParams, quad, method, exact, degree):
    """int_0^cap C(tau) / (1 + tau) d tau, in x = ln tau."""
    cap = params.sinr_cap
    if not math.isfinite(cap):
        raise NumericalError(
            "the capacity integral diverges without an SIR ceiling: coverage tends to "
            f"psi e^-psi = {params.psi * math.exp(-params.psi):.3g} > 0 as tau grows")
    tau_lo = CoverageTable.TAU_LO
    x_lo, x_hi = math.log(tau_lo), math.log(cap)
    head_cov = 1.0 - math.exp(-params.psi)  # coverage on [0, tau_lo]
    head = head_cov * math.log1p(tau_lo)
    if method == "integral" and not exact:
        table = coverage_table(params, quad)

        def f(x):
            t = math.exp(x)
            return table(t) * t / (1.0 + t)

        val, _ = integrate_interval(f, x_lo, x_hi, quad.scaled(1e-2), points=list(np.arange(math.ceil(x_lo), x_hi)))
        return head + val
    # composite Gauss-Legendre on unit panels in ln tau, one vectorized pass
    x, w = _log_panels(x_lo, x_hi)
    t = np.exp(x)
    jac = w * t / (1.0 + t)
    if method == "integral":
        return head + float(np.atleast_1d(coverage_probability(t, params, quad)) @ jac)
    if method == "series":
        L = degree if degree is not None else choose_degree(params.psi, params.mu, 1e-10)
        c = _coefficients_core(t, params.psi, params, L, quad)  # (nodes, L+1)
        kpow = float(params.k) ** np.arange(L + 1)
        return head + float((c @ kpow) @ jac)
    raise ValueError(f"unknown method {method!r}")


def throughput_upper_bound(params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD, *,
                           method="integral", exact=False, degree=None) -> ThroughputReport:
    """lambda_U E[B/Psi] log2(e) int C(tau)/(1+tau) d tau, i.e. Shannon rate on the shared band.

    ``method="series"`` integrates the k-polynomial coefficients instead of
    the coverage curve (cross-check path).
    """
    validate(params)
    if params.psi == 0:
        return ThroughputReport(0.0, "upper_bound", params.psi, params.k)
    e_bw = params.bandwidth_total * expected_inverse_load(load_pmf(params))
    integral = _capacity_integral(params, quad, method, exact, degree)
    per_user = e_bw * integral / LN2
    return ThroughputReport(params.lambda_user * per_user, "upper_bound", params.psi, params.k,
                            extra={"per_user": per_user, "mean_bandwidth": e_bw, "capacity_integral": integral})


# -- searches --------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a, b, tol, max_iter=200):
    """Maximize a unimodal f on [a, b] to an interval width below ``tol``.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    if b < a:
        a, b = b, a
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _grid_then_golden(f, grid, tol, what):
    vals = [f(x) for x in grid]
    i = int(np.argmax(vals))
    if i == 0 or i == len(grid) - 1:
        warnings.warn(f"{what}: maximum on the edge of the search range at {grid[i]:.6g}",
                      BoundaryMaximumWarning, stacklevel=3)
        j = 1 if i == 0 else len(grid) - 2
        lo, hi = sorted((grid[i], grid[j]))
    else:
        lo, hi = grid[i - 1], grid[i + 1]
    x, fx = golden_section_max(f, lo, hi, tol)
    if vals[i] > fx:
        return grid[i], vals[i]
    return x, fx


def optimal_rate_threshold(params: NetworkParams, bracket=(1e5, 1e10), rtol=1e-3,
                           quad: QuadratureSpec = DEFAULT_QUAD, *, grid_points=41, load="pmf", exact=False):
    """(rho*, T(rho*)) maximizing fixed-rate throughput over log rho.

    A log-spaced scan locates the best cell, then golden section refines it;
    T(rho) is unimodal in practice but this is not guaranteed, hence the scan.
    """
    validate(params)
    a, b = float(bracket[0]), float(bracket[1])
    if not (a > 0 and b >= a):
        raise ValueError("bracket must satisfy 0 < a <= b")

    def T(log_rho):
        rho = math.exp(log_rho)
        return params.lambda_user * rho * float(_success_probability([rho], params, quad, load, exact)[0])

    if a == b:
        return a, T(math.log(a))
    grid = list(np.linspace(math.log(a), math.log(b), grid_points))
    x, fx = _grid_then_golden(T, grid, math.log1p(rtol), "optimal_rate_threshold")
    return math.exp(x), fx


def densification_gain(psi, params_at_psi1: NetworkParams, rho0, quad: QuadratureSpec = DEFAULT_QUAD, *,
                       load="pmf", exact=False) -> float:
    """T(psi rho0; psi, k) / T(rho0; 1, k)."""
    if not psi > 0:
        raise ValueError("psi must be > 0")
    if not rho0 > 0:
        raise ValueError("rho0 must be > 0")
    base = params_at_psi1.replace(psi=1.0)
    den = fixed_rate_throughput(rho0, base, quad, load=load, exact=exact).value
    if den < 1e-300:
        raise NumericalError(f"reference throughput {den:.3g} too small to form a ratio")
    num = fixed_rate_throughput(psi * rho0, base.replace(psi=float(psi)), quad, load=load, exact=exact).value
    return num / den


def density_threshold(tau, k, params: NetworkParams, grid=None, resolution=0.05,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """psi maximizing coverage at threshold tau for multiplexing gain k."""
    base = validate(params.replace(k=int(k)))
    if grid is None:
        grid = np.arange(0.25, 12.0 + 1e-9, 0.25)
    grid = [float(g) for g in grid]
    if not grid or min(grid) < 0:
        raise ValueError("grid must be non-empty and non-negative")

    def C(psi):
        return coverage_probability(tau, base.replace(psi=max(psi, 0.0)), quad)

    x, _ = _grid_then_golden(C, grid, resolution, "density_threshold")
    return x


def asymptotic_gain_bound(params: NetworkParams, rho0, eps_cutoff=0.0,
                          quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Constant bounding the single-beam densification gain as psi grows.

    lambda_U rho0 / (2 pi^2 R_B^2 sigma tau_hat T(rho0; 1, 1)) with
    sigma = int_eps^R_B r^(1 - alpha) dr and tau_hat the side-lobe scaled
    threshold at the per-unit-density bandwidth W0 = B / (xi pi R_B^2 lambda_U).
    """
    validate(params)
    alpha, R = params.alpha_los, params.r_los
    if not (0 <= eps_cutoff < R):
        raise ValueError("eps_cutoff must lie in [0, R_B)")
    if alpha == 2:
        if eps_cutoff <= 0:
            raise ValueError("alpha_los = 2 needs eps_cutoff > 0 (the distance integral diverges)")
        sigma = math.log(R / eps_cutoff)
    else:
        sigma = (R ** (2 - alpha) - eps_cutoff ** (2 - alpha)) / (2 - alpha)
    b = params.beam
    w0 = params.bandwidth_total / (params.bias_factor * math.pi * R**2 * params.lambda_user)
    tau_hat = math.expm1(LN2 * rho0 / w0) * b.side_gain_ap * b.side_gain_user / (b.main_gain_ap * b.main_gain_user)
    ref = fixed_rate_throughput(rho0, params.replace(psi=1.0, k=1), quad).value
    if ref < 1e-300:
        raise NumericalError("reference throughput too small")
    return params.lambda_user * rho0 / (2 * math.pi**2 * R**2 * sigma * tau_hat * ref)


def scaled_gain(psi, k0, params: NetworkParams, rho0, quad: QuadratureSpec = DEFAULT_QUAD, **kw) -> float:
    """Densification gain when k = psi k0 and the AP beam is narrowed to 2 pi / k."""
    k = int(round(psi * k0))
    if k < 1:
        raise ValueError("psi * k0 must round to at least 1")
    beam = dataclasses.replace(params.beam, main_width_ap=TWO_PI / k)
    return densification_gain(psi, params.replace(beam=beam, k=k), rho0, quad, **kw)
