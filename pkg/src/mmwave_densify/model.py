"""Scenario parameters, derived constants and validation.

Gains are linear power ratios, angles are radians, distances are km and
intensities are per km^2.  dB and degrees only appear at the I/O boundary
(see :func:`params_from_dict`).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

TWO_PI = 2.0 * math.pi
MU_MAX = 20
# k * theta_A == 2*pi must be accepted even when theta_A came from degrees
_ANGLE_SLACK = 1e-12


class ValidationError(ValueError):
    """Raised when parameters violate one or more invariants.

    ``errors`` lists every violated invariant, not only the first.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class BeamPattern:
    """Sectorized beam model of an AP and of a user terminal."""

    main_gain_ap: float = 100.0  # G_A
    side_gain_ap: float = 1.0  # g_A
    main_gain_user: float = 1.0  # G_U
    side_gain_user: float = 0.1  # g_U
    main_width_ap: float = math.radians(30.0)  # theta_A
    main_width_user: float = math.radians(90.0)  # theta_U

    def errors(self):
        out = []
        if not (self.side_gain_ap > 0 and self.main_gain_ap > self.side_gain_ap):
            out.append("AP gains must satisfy main_gain_ap > side_gain_ap > 0")
        if not (self.side_gain_user > 0 and self.main_gain_user > self.side_gain_user):
            out.append("user gains must satisfy main_gain_user > side_gain_user > 0")
        if not (0 < self.main_width_ap <= TWO_PI + _ANGLE_SLACK):
            out.append("main_width_ap out of range (0, 2*pi]")
        if not (0 < self.main_width_user <= TWO_PI + _ANGLE_SLACK):
            out.append("main_width_user out of range (0, 2*pi]")
        return out


@dataclass(frozen=True)
class NetworkParams:
    """Full scenario description.

    ``sinr_cap_db`` is a ceiling on the SIR used by every rate-level metric
    (a user never decodes above it).  ``None`` keeps the pure interference
    limited model in which an isolated AP gives unbounded SIR.
    """

    beam: BeamPattern = field(default_factory=BeamPattern)
    k: int = 1
    psi: float = 4.0
    lambda_user: float = 1e4  # 1/km^2
    r_los: float = 0.2  # km
    alpha_los: float = 2.0
    mu: int = 10
    bandwidth_total: float = 2e9  # Hz
    bias_factor: float = 1.28
    sinr_cap_db: float | None = 40.0

    def replace(self, **changes) -> "NetworkParams":
        return dataclasses.replace(self, **changes)

    @property
    def ap_intensity(self) -> float:
        return derive_ap_intensity(self)

    @property
    def sinr_cap(self) -> float:
        """Linear SIR ceiling, ``inf`` when uncapped."""
        if self.sinr_cap_db is None:
            return math.inf
        return db_to_linear(self.sinr_cap_db)


@dataclass(frozen=True)
class GainMixture:
    """Joint distribution of the interferer gain product G_A*G_U."""

    entries: tuple  # ((joint_gain, probability), ...)

    @property
    def gains(self):
        return tuple(g for g, _ in self.entries)

    @property
    def probabilities(self):
        return tuple(p for _, p in self.entries)

    def ratios(self, beam: BeamPattern):
        """Entries as (gain / (G_A G_U), probability)."""
        ref = beam.main_gain_ap * beam.main_gain_user
        return tuple((g / ref, p) for g, p in self.entries)


def _errors(params: NetworkParams):
    out = list(params.beam.errors())
    k = params.k
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        out.append("k must be a positive integer")
    elif k * params.beam.main_width_ap > TWO_PI * (1 + _ANGLE_SLACK):
        out.append("k·θ_A exceeds 2π")
    if not (0 < params.alpha_los <= 2):
        out.append("alpha_los out of range")
    mu = params.mu
    if isinstance(mu, bool) or not isinstance(mu, int) or not (1 <= mu <= MU_MAX):
        out.append(f"mu must be an integer in [1, {MU_MAX}]")
    if not (params.psi >= 0 and math.isfinite(params.psi)):
        out.append("psi must be finite and >= 0")
    if not (params.lambda_user > 0 and math.isfinite(params.lambda_user)):
        out.append("lambda_user must be > 0")
    if not (params.r_los > 0 and math.isfinite(params.r_los)):
        out.append("r_los must be > 0")
    if not (params.bandwidth_total > 0 and math.isfinite(params.bandwidth_total)):
        out.append("bandwidth_total must be > 0")
    if not (params.bias_factor > 0):
        out.append("bias_factor must be > 0")
    if params.sinr_cap_db is not None and not math.isfinite(params.sinr_cap_db):
        out.append("sinr_cap_db must be finite or None")
    return out


def validate(params: NetworkParams) -> NetworkParams:
    """Return ``params`` unchanged or raise :class:`ValidationError`."""
    errs = _errors(params)
    if errs:
        raise ValidationError(errs)
    return params


def derive_ap_intensity(params: NetworkParams) -> float:
    """AP intensity lambda_A from psi = pi * lambda_A * R_B^2."""
    return params.psi / (math.pi * params.r_los**2)


def gain_mixture(params: NetworkParams) -> GainMixture:
    b = params.beam
    if params.k * b.main_width_ap > TWO_PI * (1 + _ANGLE_SLACK):
        raise ValidationError(["k·θ_A exceeds 2π"])
    pa = min(params.k * b.main_width_ap / TWO_PI, 1.0)
    pu = min(b.main_width_user / TWO_PI, 1.0)
    entries = [
        (b.main_gain_ap * b.main_gain_user, pa * pu),
        (b.main_gain_ap * b.side_gain_user, pa * (1 - pu)),
        (b.side_gain_ap * b.main_gain_user, (1 - pa) * pu),
        (b.side_gain_ap * b.side_gain_user, (1 - pa) * (1 - pu)),
    ]
    return GainMixture(tuple((g, p) for g, p in entries if p > 0))


def default_params(**overrides) -> NetworkParams:
    """The constants used for the numerical study, validated."""
    return validate(NetworkParams().replace(**overrides))


# -- config files ---------------------------------------------------------

_GAIN_KEYS = {
    "main_gain_ap": "main_gain_ap",
    "side_gain_ap": "side_gain_ap",
    "main_gain_user": "main_gain_user",
    "side_gain_user": "side_gain_user",
}
_ANGLE_KEYS = {"main_width_ap_deg": "main_width_ap", "main_width_user_deg": "main_width_user"}
_SCALAR_KEYS = {
    "k": "k",
    "psi": "psi",
    "lambda_user_per_km2": "lambda_user",
    "alpha_los": "alpha_los",
    "mu": "mu",
    "bandwidth_hz": "bandwidth_total",
    "bias_factor": "bias_factor",
    "sinr_cap_db": "sinr_cap_db",
}


def _gain_value(name, v):
    if isinstance(v, Mapping):
        if set(v) == {"db"}:
            return db_to_linear(float(v["db"]))
        if set(v) == {"linear"}:
            return float(v["linear"])
    raise ValidationError([f"{name}: expected {{\"db\": x}} or {{\"linear\": y}}"])


def params_from_dict(d: Mapping[str, Any], base: NetworkParams | None = None) -> NetworkParams:
    """Apply a config mapping on top of ``base`` (the default scenario by default).

    Gains are ``{"db": x}`` or ``{"linear": y}``, beam widths are in degrees
    and the LOS radius is ``r_los_m`` (metres) or ``r_los_km``.
    """
    base = base or NetworkParams()
    beam_kw, kw, unknown = {}, {}, []
    for key, v in d.items():
        if key in _GAIN_KEYS:
            beam_kw[_GAIN_KEYS[key]] = _gain_value(key, v)
        elif key in _ANGLE_KEYS:
            beam_kw[_ANGLE_KEYS[key]] = math.radians(float(v))
        elif key == "r_los_m":
            kw["r_los"] = float(v) / 1000.0
        elif key == "r_los_km":
            kw["r_los"] = float(v)
        elif key in _SCALAR_KEYS:
            name = _SCALAR_KEYS[key]
            if name in ("k", "mu"):
                if float(v) != int(v):
                    unknown.append(f"{key} must be an integer")
                    continue
                v = int(v)
            elif v is not None:
                v = float(v)
            kw[name] = v
        else:
            unknown.append(f"unknown config field {key!r}")
    if unknown:
        raise ValidationError(unknown)
    beam = dataclasses.replace(base.beam, **beam_kw)
    return validate(dataclasses.replace(base, beam=beam, **kw))


def params_to_dict(params: NetworkParams) -> dict:
    b = params.beam
    return {
        "main_gain_ap": {"db": linear_to_db(b.main_gain_ap)},
        "side_gain_ap": {"db": linear_to_db(b.side_gain_ap)},
        "main_gain_user": {"db": linear_to_db(b.main_gain_user)},
        "side_gain_user": {"db": linear_to_db(b.side_gain_user)},
        "main_width_ap_deg": math.degrees(b.main_width_ap),
        "main_width_user_deg": math.degrees(b.main_width_user),
        "k": params.k,
        "psi": params.psi,
        "lambda_user_per_km2": params.lambda_user,
        "r_los_m": params.r_los * 1000.0,
        "alpha_los": params.alpha_los,
        "mu": params.mu,
        "bandwidth_hz": params.bandwidth_total,
        "bias_factor": params.bias_factor,
        "sinr_cap_db": params.sinr_cap_db,
    }


def load_config(path, base: NetworkParams | None = None) -> NetworkParams:
    """Read a JSON config file.  An empty file yields ``base``/defaults."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return validate(base or NetworkParams())
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"]) from None
    if not isinstance(d, dict):
        raise ValidationError([f"{path}: top level must be a JSON object"])
    return params_from_dict(d, base)
