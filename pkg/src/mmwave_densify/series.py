"""Coverage as a polynomial in the multiplexing gain k.

Writing the AP main-lobe probability as k*theta_A/(2 pi) splits the mixture
average of Lambda_j into B0_j + k (theta_A/2pi) D_j, where B0_j only involves
side-lobe AP gains and D_j <= 0 is the main-minus-side difference.  Expanding
exp(psi k theta_A D_j / 2pi) in k gives coefficients c_l(tau, psi) that do not
depend on k.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .coverage import CoverageQuery
from .model import NetworkParams, validate
from .specfun import (
    DEFAULT_QUAD,
    QuadratureSpec,
    _lambda_closed,
    _check_mu,
    alzer_eta,
    binomial_weights,
    integrate_interval,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CoefficientTable:
    tau: float
    psi: float
    coeffs: tuple
    degree: int

    def __post_init__(self):
        if self.degree < 0 or len(self.coeffs) != self.degree + 1:
            raise ValueError("coeffs must hold degree + 1 entries")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("non-finite coefficient")

    def evaluate(self, k) -> float:
        """sum_l c_l k^l (Horner)."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * k + c
        return acc

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "c_l"])
        for l, c in enumerate(self.coeffs):
            w.writerow([l, repr(float(c))])
        return buf.getvalue()


def _coefficients_core(taus, psi, params: NetworkParams, L, quad):
    """Array (len(taus), L + 1) of c_0..c_L."""
    taus = np.asarray(taus, dtype=float)
    out_shape = (taus.size, L + 1)
    if psi == 0:
        return np.zeros(out_shape)
    b = params.beam
    mu, alpha = params.mu, params.alpha_los
    w = binomial_weights(mu)
    eta = alzer_eta(mu)
    pu = min(b.main_width_user / TWO_PI, 1.0)
    ref = b.main_gain_ap * b.main_gain_user
    g_mm, g_ms = 1.0, b.main_gain_ap * b.side_gain_user / ref
    g_sm, g_ss = b.side_gain_ap * b.main_gain_user / ref, b.side_gain_ap * b.side_gain_user / ref
    jn = np.arange(1, mu + 1, dtype=float)
    base = jn[:, None] * eta * taus.reshape(-1)[None, :]
    ls = np.arange(L + 1)
    x = psi * b.main_width_ap / TWO_PI
    logfac = ls * math.log(x) - gammaln(ls + 1)  # log of x^l / l!

    amax = mu * eta * float(taus.max(initial=0.0))
    r_min = 1e-12 if amax <= 0 else min(1e-12, 1e-6 / amax)
    lo = max(math.log(r_min), -700.0)

    def lam(g, r):
        return _lambda_closed(base * g, r, alpha)

    def f(nu):
        r = math.exp(nu)
        b0 = pu * lam(g_sm, r) + (1 - pu) * lam(g_ss, r)
        d = pu * lam(g_mm, r) + (1 - pu) * lam(g_ms, r) - b0  # (mu, T)
        weight = w[:, None] * np.exp(-psi * ((1.0 - r) - b0))  # (mu, T)
        # sum_j weight_j d_j^l, for every l at once
        powers = d[..., None] ** ls  # (mu, T, L+1)
        s = np.einsum("jt,jtl->tl", weight, powers)
        return psi * r * math.exp(-psi * r) * s * np.exp(logfac)[None, :]

    pts = list(np.arange(math.ceil(lo), 0.0)) or None
    val, _ = integrate_interval(f, lo, 0.0, quad, points=pts)
    # on [0, r_min] every Lambda equals 1 - r, so only c_0 picks up the sliver
    val[:, 0] += -math.expm1(-psi * math.exp(lo))
    return val


def _check(tau, psi):
    if not tau >= 0:
        raise ValueError("tau must be >= 0")
    if not psi >= 0:
        raise ValueError("psi must be >= 0")


@functools.lru_cache(maxsize=512)
def _table(tau, psi, params, L, quad):
    c = _coefficients_core(np.array([tau]), psi, params, L, quad)[0]
    return CoefficientTable(float(tau), float(psi), tuple(float(v) for v in c), L)


def coefficients(tau, psi, params: NetworkParams, L, quad: QuadratureSpec = DEFAULT_QUAD) -> CoefficientTable:
    """c_0..c_L in one sweep over the quadrature nodes."""
    _check(tau, psi)
    if L < 0:
        raise ValueError("degree must be >= 0")
    validate(params)
    return _table(float(tau), float(psi), params, int(L), quad)


def coeff_c0(tau, psi, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coverage when every interfering AP points a side lobe at the user."""
    return coefficients(tau, psi, params, 0, quad).coeffs[0]


def coeff_cl(l, tau, psi, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if int(l) != l or l < 1:
        raise ValueError("l must be a positive integer")
    return coefficients(tau, psi, params, int(l), quad).coeffs[int(l)]


def truncation_bound(L, psi, mu) -> float:
    """(2^mu - 1) e^psi psi^(L+2) / (L+2)!, in log domain."""
    if L < 0:
        raise ValueError("degree must be >= 0")
    mu = _check_mu(mu)
    if psi == 0:
        return 0.0
    log_b = math.log(2.0**mu - 1) + psi + (L + 2) * math.log(psi) - math.lgamma(L + 3)
    return math.inf if log_b > 709.0 else math.exp(log_b)


def choose_degree(psi, mu, target_err) -> int:
    """Smallest L whose truncation bound is at most ``target_err``."""
    if not target_err > 0:
        raise ValueError("target_err must be > 0")
    L = 0
    while truncation_bound(L, psi, mu) > target_err:
        L += 1
    return L


def coverage_via_series(tau, params: NetworkParams | None = None, L=None,
                        quad: QuadratureSpec = DEFAULT_QUAD, target_err=1e-8) -> float:
    """sum_{l<=L} c_l k^l clamped to [0, 1]; L defaults to choose_degree(target_err)."""
    if isinstance(tau, CoverageQuery):
        tau, params = tau.tau, tau.params
    if L is None:
        L = choose_degree(params.psi, params.mu, target_err)
    tab = coefficients(tau, params.psi, params, L, quad)
    return min(max(tab.evaluate(params.k), 0.0), 1.0)
