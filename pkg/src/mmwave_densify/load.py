"""Number of users Psi sharing the tagged user's AP sector.

The sector area seen by a typical user follows a size-biased, truncated
gamma(3.5) law; mixing a Poisson user count over it gives Psi - 1 negative
binomial with shape 4.5 once the truncation is dropped.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import NetworkParams, derive_ap_intensity, validate
from .specfun import NumericalError

SHAPE = 3.5
TAIL_TOL = 1e-9


@dataclass(frozen=True)
class LoadPmf:
    """P(Psi = n) for n = 1..truncation_n plus the mass beyond it."""

    n: np.ndarray
    p: np.ndarray
    truncation_n: int
    tail_mass: float
    excluded: int = 0  # simulation only: trials where the tagged user was unserved

    @property
    def masses(self):
        return list(zip(self.n.tolist(), self.p.tolist()))

    def total(self) -> float:
        return float(self.p.sum())

    def mean(self) -> float:
        return float(self.n @ self.p)

    def expect(self, f) -> float:
        return float(np.asarray(f(self.n), dtype=float) @ self.p)

    def prob(self, n) -> float:
        if 1 <= n <= self.truncation_n:
            return float(self.p[n - 1])
        return 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "p"])
        for n, p in zip(self.n.tolist(), self.p.tolist()):
            w.writerow([n, repr(p)])
        return buf.getvalue()


def total_variation(a: LoadPmf, b: LoadPmf) -> float:
    """Half the L1 distance; unlisted support on either side counts in full."""
    N = max(a.truncation_n, b.truncation_n)
    pa = np.zeros(N)
    pb = np.zeros(N)
    pa[: a.truncation_n] = a.p
    pb[: b.truncation_n] = b.p
    return 0.5 * (float(np.abs(pa - pb).sum()) + a.tail_mass + b.tail_mass)


def mean_sector_users(params: NetworkParams) -> float:
    """pi R_B^2 lambda_U / (k psi): users in an average sector."""
    return math.pi * params.r_los**2 * params.lambda_user / (params.k * params.psi)


def _log_nb_terms(n, m):
    # log P(Psi = n) with Psi - 1 ~ NegBin(4.5, m / (3.5 + m))
    return (SHAPE * math.log(SHAPE) + special.gammaln(n + SHAPE) - special.gammaln(n)
            - math.lgamma(SHAPE) + (n - 1) * math.log(m) - (n + SHAPE) * math.log(SHAPE + m))


def _truncation_point(m, tol):
    """Smallest N past the mode whose geometric tail bound is below tol."""
    q = m / (SHAPE + m)
    N = 1 + int(m)  # mode of 1 + NegBin(4.5, q) is 1 + floor(3.5 q / (1 - q))
    step = max(16, int(math.sqrt(m * (SHAPE + m))))
    while True:
        ratio = (N + SHAPE) / N * q  # P(N+1)/P(N), decreasing in N
        if ratio < 1:
            logp = _log_nb_terms(np.array([float(N)]), m)[0]
            if logp + math.log(ratio / (1 - ratio)) < math.log(tol):
                return N
        N += step


def _nb_tail(N, m):
    """Exact P(Psi > N) = P(Psi - 1 >= N)."""
    return float(special.betainc(N, SHAPE + 1, m / (SHAPE + m)))


@functools.lru_cache(maxsize=256)
def _simplified(m, tol):
    if m <= 0:
        return LoadPmf(np.array([1]), np.array([1.0]), 1, 0.0)
    N = _truncation_point(m, tol)
    n = np.arange(1, N + 1)
    p = np.exp(_log_nb_terms(n.astype(float), m))
    return LoadPmf(n, p, N, _nb_tail(N, m))


def load_pmf_simplified(params: NetworkParams, tail_tol=TAIL_TOL) -> LoadPmf:
    """Negative binomial load law, valid when the sector truncation is negligible (psi >= 1)."""
    validate(params)
    if params.psi < 1:
        raise ValueError("the simplified load PMF needs psi >= 1; use load_pmf_full")
    return _simplified(mean_sector_users(params), tail_tol)


def _full_arguments(params: NetworkParams, printed=False):
    lam_a = derive_ap_intensity(params)
    k, psi, lu = params.k, params.psi, params.lambda_user
    if printed:
        return psi / (k * lam_a * (lu + SHAPE * k * lam_a)), psi / (SHAPE * k * k * lam_a * lam_a)
    # truncation at the largest sector area pi R_B^2 / k = psi / (k lambda_A)
    y_max = psi / (k * lam_a)
    return (lu + SHAPE * k * lam_a) * y_max, SHAPE * k * lam_a * y_max


def load_pmf_full(params: NetworkParams, tail_tol=TAIL_TOL, printed_arguments=False) -> LoadPmf:
    """Load law with the sector area truncated at pi R_B^2 / k.

    Each simplified mass is scaled by P(n + 3.5, x1) / P(4.5, x2), with P
    the regularized lower incomplete gamma.  The default arguments
    x1 = (lambda_U + 3.5 k lambda_A) pi R_B^2 / k and x2 = 3.5 psi come from
    integrating the truncated area law; ``printed_arguments=True`` uses the
    alternative quotient forms instead, which do not normalize and raise.
    """
    validate(params)
    if params.psi <= 0:
        raise ValueError("psi must be > 0")
    m = mean_sector_users(params)
    base = _simplified(m, tail_tol * 1e-3)
    x1, x2 = _full_arguments(params, printed_arguments)
    denom = special.gammainc(SHAPE + 1, x2)
    if denom <= 0:
        raise NumericalError(f"incomplete gamma normalizer underflows at x2={x2:g}")
    p = base.p * special.gammainc(base.n + SHAPE, x1) / denom
    total = float(p.sum())
    if printed_arguments and abs(total - 1) > 1e-6:
        raise NumericalError(f"load masses sum to {total:.6g} with the quotient arguments "
                             f"x1={x1:.3g}, x2={x2:.3g}")
    # drop negligible far tail, keep the remainder as tail mass
    keep = min(int(np.searchsorted(np.cumsum(p), 1 - tail_tol)) + 1, len(p))
    p = p[:keep]
    return LoadPmf(base.n[:keep], p, keep, max(0.0, 1.0 - float(p.sum())))


def load_pmf(params: NetworkParams, form="auto", tail_tol=TAIL_TOL) -> LoadPmf:
    """``form`` is "simplified", "full", or "auto" (simplified when psi >= 1)."""
    if form == "auto":
        form = "simplified" if params.psi >= 1 else "full"
    if form == "simplified":
        return load_pmf_simplified(params, tail_tol)
    if form == "full":
        return load_pmf_full(params, tail_tol)
    raise ValueError(f"unknown load form {form!r}")


def _rate(params):
    return SHAPE * params.k * derive_ap_intensity(params)


def sector_area_pdf(y, params: NetworkParams):
    """Density of an AP sector area (km^2), truncated at pi R_B^2 / k."""
    return _area_pdf(y, params, SHAPE)


def biased_sector_area_pdf(y, params: NetworkParams):
    """Area density of the sector containing the typical user (size biased)."""
    return _area_pdf(y, params, SHAPE + 1)


def _area_pdf(y, params, shape):
    validate(params)
    if params.psi <= 0:
        raise ValueError("psi must be > 0")
    y = np.asarray(y, dtype=float)
    b = _rate(params)
    y_max = math.pi * params.r_los**2 / params.k
    norm = special.gammainc(shape, b * y_max)
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = shape * math.log(b) + (shape - 1) * np.log(y) - b * y - math.lgamma(shape)
    out = np.where((y > 0) & (y <= y_max), np.exp(logf) / norm, 0.0)
    return out if out.ndim else float(out)


def mean_bandwidth(params: NetworkParams) -> float:
    """B / (1 + xi pi R_B^2 lambda_U / (k psi)): the bias-factor approximation of E[B/Psi]."""
    validate(params)
    if params.psi == 0:
        return 0.0
    return params.bandwidth_total / (1.0 + params.bias_factor * mean_sector_users(params))


def expected_inverse_load(pmf: LoadPmf) -> float:
    """E[1/Psi] from the masses; the tail contributes at most tail_mass / N."""
    return pmf.expect(lambda n: 1.0 / n) + 0.5 * pmf.tail_mass / pmf.truncation_n
