"""Coverage probability of a typical user and its supporting distributions."""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .model import NetworkParams, derive_ap_intensity, gain_mixture, validate
from .specfun import (
    DEFAULT_QUAD,
    QuadratureSpec,
    _lambda_closed,
    alzer_eta,
    binomial_weights,
    integrate_interval,
)


@dataclass(frozen=True)
class CoverageQuery:
    tau: float
    params: NetworkParams

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError("tau must be >= 0")

    def probability(self, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
        return coverage_probability(self.tau, self.params, quad)


@dataclass
class CoverageCurve:
    axis_kind: str
    axis: list
    values: list
    meta: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)  # axis index -> message

    @property
    def partial(self) -> bool:
        return bool(self.errors)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axis", "value"])
        for x, v in zip(self.axis, self.values):
            w.writerow([repr(x), repr(float(v))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "axis_kind": self.axis_kind,
            "axis": list(self.axis),
            "values": [None if v != v else v for v in map(float, self.values)],
            "meta": self.meta,
            "errors": {str(k): v for k, v in self.errors.items()},
        }, indent=2)


def _mixture_ratios(params):
    return gain_mixture(params).ratios(params.beam)


def _coverage_core(taus, psi, mix, mu, alpha, quad):
    """Coverage for an array of thresholds sharing (psi, mixture).

    The outer integral over the normalized squared distance r is done in
    nu = ln r, where the integrand is smooth, from r_min up to 1; the sliver
    [0, r_min] has Lambda = 1 - r to well below tolerance and is added in
    closed form.  The alternating j sum is formed pointwise, inside the
    integral.
    """
    taus = np.asarray(taus, dtype=float)
    if psi == 0:
        return np.zeros_like(taus)
    w = binomial_weights(mu)
    eta = alzer_eta(mu)
    jn = np.arange(1, mu + 1, dtype=float)
    amax = mu * eta * float(taus.max(initial=0.0)) * max(g for g, _ in mix)
    r_min = 1e-12 if amax <= 0 else min(1e-12, 1e-6 / amax)
    lo = max(math.log(r_min), -700.0)
    base = jn[:, None] * eta * taus[None, :]

    def f(nu):
        r = math.exp(nu)
        el = 0.0
        for g, p in mix:
            el = el + p * _lambda_closed(base * g, r, alpha)
        P = w @ np.exp(-psi * ((1.0 - r) - el))
        return psi * r * math.exp(-psi * r) * P

    pts = list(np.arange(math.ceil(lo), 0.0)) or None
    val, _ = integrate_interval(f, lo, 0.0, quad, points=pts)
    head = -math.expm1(-psi * math.exp(lo))
    return np.clip(val + head, 0.0, 1.0)


def coverage_probability(tau, params: NetworkParams | None = None, quad: QuadratureSpec = DEFAULT_QUAD):
    """P(SIR > tau) for the typical user.

    ``tau`` may be a scalar, an array, or a :class:`CoverageQuery` (in which
    case ``params`` is ignored and may be omitted).
    """
    if isinstance(tau, CoverageQuery):
        tau, params = tau.tau, tau.params
    validate(params)
    t = np.asarray(tau, dtype=float)
    if np.any(~(t >= 0)):
        raise ValueError("tau must be >= 0")
    flat = t.reshape(-1)
    out = _coverage_core(flat, params.psi, _mixture_ratios(params), params.mu, params.alpha_los, quad)
    out = out.reshape(t.shape)
    return out if out.ndim else float(out)


def nearest_distance_cdf(r, params: NetworkParams):
    """P(nearest AP within r km), r <= R_B."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > params.r_los * (1 + 1e-12)):
        raise ValueError("r must lie in [0, R_B]")
    out = -np.expm1(-math.pi * derive_ap_intensity(params) * r**2)
    return out if out.ndim else float(out)


def nearest_distance_pdf(r, params: NetworkParams):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > params.r_los * (1 + 1e-12)):
        raise ValueError("r must lie in [0, R_B]")
    lam = derive_ap_intensity(params)
    out = 2 * math.pi * lam * r * np.exp(-math.pi * lam * r**2)
    return out if out.ndim else float(out)


def coverage_sweep(axis_kind, grid, base: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD,
                   tau=None) -> CoverageCurve:
    """Coverage along one axis.

    ``axis_kind`` is ``"tau"`` (grid of linear thresholds), ``"psi"`` or
    ``"k"``; for the last two ``tau`` fixes the threshold.  A failing grid
    point yields NaN and an entry in ``errors`` instead of aborting the sweep.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    meta = {"psi": base.psi, "k": base.k, "tau": tau}
    values, errors = [], {}
    if axis_kind == "tau":
        try:
            values = list(np.atleast_1d(coverage_probability(np.asarray(grid, float), base, quad)))
        except Exception:  # fall back to per point so one bad point is isolated
            for i, t in enumerate(grid):
                try:
                    values.append(coverage_probability(float(t), base, quad))
                except Exception as exc:
                    values.append(float("nan"))
                    errors[i] = str(exc)
        meta.pop("tau")
    elif axis_kind in ("psi", "k"):
        if tau is None:
            raise ValueError("tau is required for psi/k sweeps")
        for i, x in enumerate(grid):
            try:
                p = base.replace(**{axis_kind: int(x) if axis_kind == "k" else float(x)})
                values.append(coverage_probability(tau, p, quad))
            except Exception as exc:
                values.append(float("nan"))
                errors[i] = str(exc)
        meta.pop(axis_kind)
    else:
        raise ValueError(f"unknown axis {axis_kind!r}")
    return CoverageCurve(axis_kind, grid, [float(v) for v in values], meta, errors)


# -- cached interpolant ----------------------------------------------------------


class CoverageTable:
    """Piecewise Chebyshev interpolant of tau -> coverage in x = ln tau.

    Rate-level metrics need coverage at thousands of thresholds
    tau_n = 2^(rho n / B) - 1; one vectorized quadrature pass over the
    interpolation nodes replaces them.  Accuracy is checked against the
    direct path in the tests.
    """

    TAU_LO = 1e-12
    TAU_HI_UNCAPPED = 1e14

    def __init__(self, params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD,
                 width=2.0, nodes=20):
        validate(params)
        self.params = params
        cap = params.sinr_cap
        hi = cap * 1.0001 if math.isfinite(cap) else self.TAU_HI_UNCAPPED
        self.x_lo = math.log(self.TAU_LO)
        npan = max(1, int(math.ceil((math.log(hi) - self.x_lo) / width)))
        self.width = width
        self.x_hi = self.x_lo + npan * width
        k = np.arange(nodes)
        t = np.cos(math.pi * (k + 0.5) / nodes)[::-1]
        mids = self.x_lo + width * (np.arange(npan) + 0.5)
        xs = mids[:, None] + 0.5 * width * t[None, :]
        taus = np.concatenate([[0.0], np.exp(xs.ravel())])
        vals = _coverage_core(taus, params.psi, _mixture_ratios(params), params.mu,
                              params.alpha_los, quad.scaled(1e-2))
        self.c_zero = float(vals[0])
        grid_vals = vals[1:].reshape(npan, nodes)
        self.coeffs = np.array([cheb.chebfit(t, v, nodes - 1) for v in grid_vals])
        self.c_lo = float(self._eval_x(np.array([self.x_lo]))[0])
        self.c_hi = float(self._eval_x(np.array([self.x_hi]))[0])

    def _eval_x(self, x):
        idx = np.clip(((x - self.x_lo) // self.width).astype(int), 0, len(self.coeffs) - 1)
        t = 2.0 * (x - (self.x_lo + self.width * (idx + 0.5))) / self.width
        c = self.coeffs[idx]
        # Clenshaw, one coefficient row per point
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for m in range(c.shape[1] - 1, 0, -1):
            b1, b2 = 2 * t * b1 - b2 + c[:, m], b1
        return t * b1 - b2 + c[:, 0]

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        flat = tau.reshape(-1)
        out = np.empty_like(flat)
        small = flat < self.TAU_LO
        big = flat > math.exp(self.x_hi)
        mid = ~(small | big)
        out[small] = self.c_zero + (self.c_lo - self.c_zero) * flat[small] / self.TAU_LO
        out[big] = self.c_hi
        if np.any(mid):
            out[mid] = self._eval_x(np.log(flat[mid]))
        out = np.clip(out, 0.0, 1.0).reshape(tau.shape)
        return out if out.ndim else float(out)

    def rate_coverage(self, tau):
        """Coverage with the SIR ceiling applied: zero once tau reaches the cap."""
        tau = np.asarray(tau, dtype=float)
        out = np.where(tau < self.params.sinr_cap, self(tau), 0.0)
        return out if out.ndim else float(out)


@functools.lru_cache(maxsize=256)
def coverage_table(params: NetworkParams, quad: QuadratureSpec = DEFAULT_QUAD) -> CoverageTable:
    return CoverageTable(params, quad)
