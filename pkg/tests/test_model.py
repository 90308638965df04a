import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwave_densify import model
from mmwave_densify.model import (
    BeamPattern,
    NetworkParams,
    ValidationError,
    db_to_linear,
    default_params,
    derive_ap_intensity,
    gain_mixture,
    linear_to_db,
    load_config,
    params_from_dict,
    params_to_dict,
    validate,
)


def test_defaults_are_valid():
    p = validate(NetworkParams())
    b = p.beam
    assert b.main_gain_ap == pytest.approx(db_to_linear(20.0))
    assert b.side_gain_ap == pytest.approx(1.0)
    assert b.main_gain_user == pytest.approx(1.0)
    assert b.side_gain_user == pytest.approx(db_to_linear(-10.0))
    assert b.main_width_ap == pytest.approx(math.radians(30))
    assert b.main_width_user == pytest.approx(math.radians(90))
    assert p.r_los == 0.2 and p.alpha_los == 2.0 and p.mu == 10
    assert p.bandwidth_total == 2e9 and p.lambda_user == 1e4


def test_ap_intensity_examples():
    assert derive_ap_intensity(default_params(psi=4.0)) == pytest.approx(4 / (math.pi * 0.04), rel=1e-14)
    assert derive_ap_intensity(default_params(psi=0.0)) == 0.0
    assert derive_ap_intensity(default_params(psi=math.pi, r_los=1.0)) == pytest.approx(1.0, rel=1e-14)


@given(st.floats(0.0, 50.0), st.floats(0.01, 5.0))
def test_ap_intensity_inverts_relative_density(psi, r):
    lam = derive_ap_intensity(default_params(psi=psi, r_los=r))
    assert math.pi * lam * r**2 == pytest.approx(psi, rel=1e-14, abs=1e-300)


def test_mixture_k1():
    mix = dict((round(g, 9), p) for g, p in gain_mixture(default_params(k=1)).entries)
    assert mix[100.0] == pytest.approx(1 / 48)
    assert mix[10.0] == pytest.approx(3 / 48)
    assert mix[1.0] == pytest.approx(11 / 48)
    assert mix[0.1] == pytest.approx(33 / 48)


def test_mixture_full_sectors_collapses():
    mix = gain_mixture(default_params(k=12))
    assert len(mix.entries) == 2
    assert mix.gains[0] == pytest.approx(100.0)
    assert mix.probabilities[0] == pytest.approx(0.25)
    assert sum(mix.probabilities) == pytest.approx(1.0, abs=1e-12)


def test_mixture_k4_enumerated():
    # 2x2 product distribution with P(main AP) = 4/12, P(main user) = 1/4
    pa, pu = 4 / 12, 1 / 4
    want = {100.0: pa * pu, 10.0: pa * (1 - pu), 1.0: (1 - pa) * pu, 0.1: (1 - pa) * (1 - pu)}
    got = {round(g, 9): p for g, p in gain_mixture(default_params(k=4)).entries}
    assert got.keys() == want.keys()
    for g in want:
        assert got[g] == pytest.approx(want[g], rel=1e-14)
    assert sum(got.values()) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(1, 36), st.floats(0.01, 2 * math.pi), st.floats(0.01, 2 * math.pi))
def test_mixture_probabilities_are_a_distribution(k, theta_a, theta_u):
    theta_a = min(theta_a, 2 * math.pi / k)
    beam = BeamPattern(main_width_ap=theta_a, main_width_user=theta_u)
    mix = gain_mixture(NetworkParams(beam=beam, k=k))
    assert all(p >= 0 for p in mix.probabilities)
    assert sum(mix.probabilities) == pytest.approx(1.0, abs=1e-12)


def test_validation_messages():
    with pytest.raises(ValidationError, match="k·θ_A exceeds 2π"):
        validate(NetworkParams(k=13))
    with pytest.raises(ValidationError, match="alpha_los out of range"):
        validate(NetworkParams(alpha_los=2.5))
    with pytest.raises(ValidationError, match="k·θ_A exceeds 2π"):
        gain_mixture(NetworkParams(k=13))


def test_validation_lists_every_violation():
    with pytest.raises(ValidationError) as exc:
        validate(NetworkParams(k=13, alpha_los=2.5, mu=0, psi=-1.0, lambda_user=0.0))
    assert len(exc.value.errors) == 5


@pytest.mark.parametrize("bad", [
    dict(beam=BeamPattern(main_gain_ap=1.0, side_gain_ap=1.0)),
    dict(beam=BeamPattern(side_gain_user=0.0)),
    dict(beam=BeamPattern(main_width_user=7.0)),
    dict(mu=21), dict(r_los=0.0), dict(bandwidth_total=-1.0), dict(k=0),
])
def test_invariants_rejected(bad):
    with pytest.raises(ValidationError):
        validate(NetworkParams(**bad))


def test_k_times_width_equal_two_pi_is_allowed():
    validate(NetworkParams(k=12))


@given(st.floats(-200.0, 200.0))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


@given(st.floats(1e-20, 1e20))
def test_linear_round_trip(y):
    assert db_to_linear(linear_to_db(y)) == pytest.approx(y, rel=1e-12)


def test_config_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("")
    assert load_config(f) == NetworkParams()


def test_config_override_r_los(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"r_los_m": 100, "psi": 4}))
    p = load_config(f)
    assert p.r_los == pytest.approx(0.1)
    assert derive_ap_intensity(p) == pytest.approx(4 / (math.pi * 0.01))


def test_config_gain_units(tmp_path):
    p = params_from_dict({"main_gain_ap": {"db": 30}, "side_gain_user": {"linear": 0.5},
                          "main_width_ap_deg": 15, "k": 24})
    assert p.beam.main_gain_ap == pytest.approx(1000.0)
    assert p.beam.side_gain_user == 0.5
    assert p.beam.main_width_ap == pytest.approx(math.radians(15))


def test_config_malformed_json_reports_position(tmp_path):
    f = tmp_path / "c.json"
    f.write_text('{"psi": 4,\n "k": }')
    with pytest.raises(ValidationError, match="line 2"):
        load_config(f)


@pytest.mark.parametrize("d", [{"bogus": 1}, {"main_gain_ap": 20}, {"k": 1.5}, {"k": 13}])
def test_config_rejects_bad_fields(d):
    with pytest.raises(ValidationError):
        params_from_dict(d)


def test_config_round_trip():
    p = default_params(psi=2.5, k=4, alpha_los=1.8, sinr_cap_db=None)
    q = params_from_dict(json.loads(json.dumps(params_to_dict(p))))
    assert q.k == p.k and q.psi == p.psi and q.sinr_cap_db is None
    assert q.beam.main_gain_ap == pytest.approx(p.beam.main_gain_ap, rel=1e-12)
    assert q.beam.main_width_ap == pytest.approx(p.beam.main_width_ap, rel=1e-12)
    assert q.r_los == pytest.approx(p.r_los, rel=1e-12)


def test_sinr_cap_linear():
    assert default_params().sinr_cap == pytest.approx(1e4)
    assert default_params(sinr_cap_db=None).sinr_cap == math.inf


def test_params_are_immutable():
    p = default_params()
    with pytest.raises(Exception):
        p.psi = 3.0
    assert model.TWO_PI == pytest.approx(2 * math.pi)
