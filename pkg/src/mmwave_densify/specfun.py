"""Numerical kernels shared by the analytic modules.

The kernel

    Lambda_j(tau, r, G) = (2r/alpha) a^(2/alpha) * int_{a r^(alpha/2)}^{a} t^(-2/alpha-1) e^-t dt,
    a = j * eta * tau * G,

is an upper incomplete gamma function with negative shape.  It is evaluated
by integrating by parts down to a non-negative shape (E1 or a regularized
``gammaincc``), with an adaptive-quadrature path kept for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .model import MU_MAX, NetworkParams, gain_mixture

# beyond this e^-x is below double precision and Lambda vanishes
_X_DEAD = 700.0
# closed form recursion length is ceil(2/alpha); fall back to quadrature past this
_MAX_SHAPE = 8.0


class NumericalError(ArithmeticError):
    """A numeric procedure failed to reach its target accuracy."""


class QuadratureError(NumericalError):
    def __init__(self, msg, error_estimate=float("nan")):
        self.error_estimate = error_estimate
        super().__init__(f"{msg} (achieved error estimate {error_estimate:.3g})")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def scaled(self, factor):
        """Tolerances multiplied by ``factor``."""
        return QuadratureSpec(self.abs_tol * factor, self.rel_tol * factor, self.max_subdivisions)


DEFAULT_QUAD = QuadratureSpec()


def _check_mu(mu):
    if isinstance(mu, bool) or int(mu) != mu or not (1 <= mu <= MU_MAX):
        raise ValueError(f"mu must be an integer in [1, {MU_MAX}], got {mu!r}")
    return int(mu)


def alzer_eta(mu) -> float:
    """eta = mu * (mu!)^(-1/mu), through log-factorials."""
    mu = _check_mu(mu)
    return mu * math.exp(-math.lgamma(mu + 1) / mu)


def binomial_weights(mu) -> np.ndarray:
    """(-1)^(j+1) C(mu, j) for j = 1..mu, from exact integers."""
    mu = _check_mu(mu)
    return np.array([(-1) ** (j + 1) * math.comb(mu, j) for j in range(1, mu + 1)], dtype=float)


def signed_binomial_sum(mu, term):
    """sum_{j=1}^{mu} (-1)^(j+1) C(mu, j) term(j).

    ``term`` may return arrays; they are summed elementwise.  A constant term
    is returned exactly because the integer weights sum to one.
    """
    mu = _check_mu(mu)
    vals = [term(j) for j in range(1, mu + 1)]
    first = vals[0]
    if all(np.array_equal(v, first) for v in vals[1:]):
        return first
    acc = 0.0
    for j, v in enumerate(vals, start=1):
        acc = acc + (-1) ** (j + 1) * math.comb(mu, j) * np.asarray(v, dtype=float)
    return acc if np.ndim(acc) else float(acc)


# -- quadrature --------------------------------------------------------------


def integrate_interval(f, a, b, quad: QuadratureSpec = DEFAULT_QUAD, points=None):
    """Adaptive Gauss-Kronrod (21 point) integral of a scalar or vector f on [a, b].

    Returns ``(value, error_estimate)``.  When the interval spans more than
    three decades the initial panels are log-spaced.
    """
    if a == b:
        v = np.asarray(f(a), dtype=float) * 0.0
        return (v if v.ndim else float(v)), 0.0
    if points is None and a > 0 and b / a > 1e3:
        n = int(math.ceil(math.log10(b / a)))
        points = list(np.geomspace(a, b, n + 1)[1:-1])
    res, err, info = integrate.quad_vec(
        f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol, norm="max",
        limit=quad.max_subdivisions + (len(points) if points is not None else 0),
        points=points, full_output=True,
    )
    if not info.success:
        raise QuadratureError(f"adaptive quadrature on [{a:g}, {b:g}] did not converge", err)
    return res, err


def integrate_unit_interval(f, quad: QuadratureSpec = DEFAULT_QUAD):
    return integrate_interval(f, 0.0, 1.0, quad)[0]


def integrate_semi_infinite(f, quad: QuadratureSpec = DEFAULT_QUAD, tail_bound=None, start=1.0):
    """Integral of f over (0, inf).

    The range is cut at the first T = start * 2^m with tail_bound(T) below
    half the absolute tolerance, then [0, T] is integrated with decade panels.
    """
    if tail_bound is None:
        raise ValueError("a tail bound is required")
    T = float(start)
    for _ in range(2000):
        if tail_bound(T) < quad.abs_tol / 2:
            break
        T *= 2.0
    else:
        raise QuadratureError("tail bound never fell below tolerance", float(tail_bound(T)))
    pts = [p for p in np.geomspace(min(1.0, T), T, max(2, int(math.log10(T)) + 2)) if 0 < p < T]
    inner = quad.scaled(0.5)
    val, _ = integrate_interval(f, 0.0, T, inner, points=pts or None)
    return val


# -- Lambda kernel ---------------------------------------------------------------


def _lambda_closed(a, r, alpha):
    """Closed form of Lambda for arrays a >= 0, 0 < r <= 1 (broadcast)."""
    a, r = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(r, dtype=float))
    s = 2.0 / alpha
    out = np.array(1.0 - r, dtype=float)  # a == 0 limit
    live = a > 0
    if not np.any(live):
        return out
    A, R = a[live], r[live]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        X = A * R ** (alpha / 2.0)
        lnX, lnA, lnR = np.log(X), np.log(A), np.log(R)
        m = math.floor(s + 1e-12)
        frac = s - m
        if frac < 1e-12:
            # shape 0 reached: r a^s J_0 = x^s (E1(x) - E1(a))
            start = m
            term = np.exp(s * lnX) * (special.exp1(X) - special.exp1(A))
        else:
            start = m + 1
            q = 1.0 - frac
            term = np.exp(s * lnX) * math.gamma(q) * (special.gammaincc(q, X) - special.gammaincc(q, A))
        for i in range(start - 1, -1, -1):
            p = s - i
            lhs = np.exp(i * lnX - X) - np.exp(lnR + i * lnA - A)
            term = (lhs - term) / p
        lam = s * term
    lam = np.where(X > _X_DEAD, 0.0, lam)
    lam = np.clip(lam, 0.0, 1.0 - R)
    out[live] = lam
    return out


def _lambda_quad_scalar(a, r, alpha, quad):
    if a <= 0:
        return 1.0 - r
    if r >= 1:
        return 0.0
    s = 2.0 / alpha
    lo = math.log(a) + (alpha / 2.0) * math.log(r)
    hi = math.log(a)
    if lo > math.log(_X_DEAD):
        return 0.0
    c = math.log(r) + s * math.log(a)

    def f(l):
        return s * math.exp(c - s * l - math.exp(l))

    pts = list(np.arange(math.ceil(lo), hi)) or None
    val, _ = integrate_interval(f, lo, hi, quad.scaled(1e-3), points=pts)
    return min(max(float(val), 0.0), 1.0 - r)


def lambda_kernel(tau, r, gain_ratio, j, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD,
                  method="closed"):
    """Lambda_j(tau, r, G) at the normalized squared distance r.

    Broadcasts over ``tau``, ``r`` and ``gain_ratio``.  ``method`` is
    ``"closed"`` (incomplete-gamma recursion) or ``"quad"`` (adaptive
    quadrature of the defining integral).
    """
    eta = alzer_eta(params.mu)
    tau = np.asarray(tau, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(tau < 0) or np.any(r <= 0) or np.any(r > 1) or np.any(np.asarray(gain_ratio) < 0):
        raise ValueError("lambda_kernel needs tau >= 0, 0 < r <= 1, G >= 0")
    a = j * eta * tau * np.asarray(gain_ratio, dtype=float)
    alpha = params.alpha_los
    if method == "quad" or 2.0 / alpha > _MAX_SHAPE:
        a, r = np.broadcast_arrays(a, r)
        out = np.vectorize(lambda aa, rr: _lambda_quad_scalar(aa, rr, alpha, quad), otypes=[float])(a, r)
    elif method == "closed":
        out = _lambda_closed(a, r, alpha)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if out.ndim else float(out)


def expected_lambda(tau, r, j, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD,
                    method="closed", mixture=None):
    """Mixture average of Lambda_j over the interferer gain distribution."""
    mix = mixture if mixture is not None else gain_mixture(params).ratios(params.beam)
    acc = 0.0
    for g, p in mix:
        acc = acc + p * np.asarray(lambda_kernel(tau, r, g, j, params, quad, method))
    return acc if np.ndim(acc) else float(acc)
