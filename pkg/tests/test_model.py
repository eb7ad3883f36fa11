"""Parameter handling, unit conversions, and the dispersive reduction."""

import json

import numpy as np
import pytest

from resonatorsim import (
    ResonatorSpec,
    SystemSpec,
    derive_dispersive,
    dispersive_validity,
    ghz_to_angular,
    lifetime_from_kappa,
    lifetime_from_q,
    load_spec,
    mhz_to_angular,
    reference_spec,
    spec_from_dict,
    spec_to_dict,
)

TWO_PI = 2.0 * np.pi


def test_unit_conversions():
    # 1 GHz -> 2*pi*1e3 rad/us; 1 MHz -> 2*pi rad/us
    assert ghz_to_angular(1.0) == pytest.approx(TWO_PI * 1.0e3)
    assert mhz_to_angular(1.0) == pytest.approx(TWO_PI)


def test_reference_spec_detuning_and_ratio():
    spec = reference_spec(3)
    # Delta = Omega0 - omega_r = 2*pi * 1 GHz; g/Delta = 50 MHz / 1000 MHz
    model = derive_dispersive(spec)
    assert model.delta[0] == pytest.approx(TWO_PI * 1.0e3)
    assert spec.couplings[0] / model.delta[0] == pytest.approx(0.05)


def test_hopping_rate_value():
    # chi = g^2/Delta = 2*pi * 2.5 rad/us at the standard working point
    model = derive_dispersive(reference_spec(3))
    assert model.chi_homogeneous == pytest.approx(TWO_PI * 2.5, rel=1.0e-12)
    assert model.is_homogeneous()
    assert model.is_resonant()


def test_chi_matrix_symmetric_zero_diagonal():
    spec = reference_spec(3, couplings_mhz=[40.0, 50.0, 60.0])
    model = derive_dispersive(spec)
    np.testing.assert_allclose(model.chi, model.chi.T)
    np.testing.assert_allclose(np.diag(model.chi), 0.0)
    # chi_ij = g_i g_j / 2 * (1/Delta_i + 1/Delta_j)
    gi, gj = spec.couplings[0], spec.couplings[1]
    expected = 0.5 * gi * gj * (1 / model.delta[0] + 1 / model.delta[1])
    assert model.chi[0, 1] == pytest.approx(expected, rel=1.0e-12)


def test_lamb_shifts():
    spec = reference_spec(2)
    model = derive_dispersive(spec)
    shift = spec.couplings[0] ** 2 / model.delta[0]
    assert model.lamb_shifted_omega[0] == pytest.approx(spec.omegas[0] + shift)
    assert model.lamb_shifted_bus == pytest.approx(spec.bus_omega - 2 * shift)


def test_zero_detuning_rejected():
    spec = SystemSpec(
        bus_freq_ghz=5.75,
        bus_kappa_mhz=0.0,
        resonators=(ResonatorSpec(5.75, 50.0), ResonatorSpec(5.75, 50.0)),
    )
    with pytest.raises(ValueError, match="resonant"):
        derive_dispersive(spec)


def test_dispersive_validity_flags():
    good = reference_spec(2)
    assert all(flag == "pass" for _, flag in dispersive_validity(good))
    marginal = SystemSpec(
        bus_freq_ghz=6.75,
        bus_kappa_mhz=0.0,
        resonators=(ResonatorSpec(6.50, 50.0), ResonatorSpec(6.50, 50.0)),
    )
    ratios = dispersive_validity(marginal)
    assert all(flag == "warn" for _, flag in ratios)
    assert ratios[0][0] == pytest.approx(0.2)


def test_lifetimes():
    # T = Q / omega and T = 1/kappa, both in microseconds
    assert lifetime_from_q(2.0e6, 5.75) == pytest.approx(55.36, abs=0.01)
    assert lifetime_from_kappa(0.5) == pytest.approx(2.0)


def test_json_round_trip(tmp_path):
    spec = reference_spec(3, kappa_mhz=0.25, gm_mhz=0.5)
    data = spec_to_dict(spec)
    again = spec_from_dict(json.loads(json.dumps(data)))
    assert again == spec

    path = tmp_path / "spec.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    assert load_spec(path) == spec


def test_unknown_keys_rejected():
    data = spec_to_dict(reference_spec(2))
    data["surprise"] = 1
    with pytest.raises(ValueError, match="surprise"):
        spec_from_dict(data)


def test_negative_coupling_rejected():
    with pytest.raises(ValueError):
        ResonatorSpec(5.75, -1.0)


def test_too_few_resonators_rejected():
    with pytest.raises(ValueError):
        SystemSpec(
            bus_freq_ghz=6.75,
            bus_kappa_mhz=0.0,
            resonators=(ResonatorSpec(5.75, 50.0),),
        )


def test_bad_config_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError):
        load_spec(path)
    with pytest.raises(FileNotFoundError):
        load_spec(tmp_path / "missing.json")
