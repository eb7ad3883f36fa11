"""Hamiltonian assembly and the frame-transformation identity suite."""

import numpy as np
import pytest
import scipy.linalg

from resonatorsim import (
    build_basis,
    build_effective,
    build_full,
    derive_dispersive,
    reference_spec,
    shift_frame,
    total_number,
    verify_sw_identities,
)


@pytest.fixture(scope="module")
def spec3():
    return reference_spec(3)


@pytest.fixture(scope="module")
def basis4():
    return build_basis(4, cutoff=1, excitation_cap=1)


def test_full_hamiltonian_hermitian(spec3, basis4):
    h = build_full(spec3, basis4).h_full
    np.testing.assert_allclose(h, h.conj().T, atol=1.0e-12)


def test_full_hamiltonian_splits(spec3, basis4):
    ham = build_full(spec3, basis4)
    np.testing.assert_allclose(
        ham.h_full, ham.h0 + ham.h_int + ham.h_gm, atol=1.0e-12
    )
    assert np.max(np.abs(ham.h_gm)) == 0.0  # no direct coupling by default


def test_direct_coupling_block(basis4):
    import dataclasses

    spec = dataclasses.replace(reference_spec(3), gm_mhz=5.0)
    ham = build_full(spec, basis4)
    gm = spec.gm
    # open chain: R1-R2 and R2-R3 only
    i1 = basis4.index_of((0, 1, 0, 0))
    i2 = basis4.index_of((0, 0, 1, 0))
    i3 = basis4.index_of((0, 0, 0, 1))
    assert ham.h_gm[i1, i2] == pytest.approx(gm)
    assert ham.h_gm[i2, i3] == pytest.approx(gm)
    assert ham.h_gm[i1, i3] == 0.0


def test_mode_count_mismatch_rejected(spec3):
    basis = build_basis(3, cutoff=1, excitation_cap=1)
    with pytest.raises(ValueError):
        build_full(spec3, basis)


def test_shift_frame_shifts_single_photon_energies(spec3, basis4):
    h = build_full(spec3, basis4).h_full
    omega_ref = spec3.omegas[0]
    shifted = shift_frame(h, basis4, omega_ref)
    np.testing.assert_allclose(
        shifted, h - omega_ref * total_number(basis4), atol=1.0e-9
    )


def test_effective_model_reproduces_closed_form_populations(spec3):
    # bus-eliminated hopping model integrated directly must give the same
    # populations as the closed-form amplitudes
    from resonatorsim import TimeGrid, amplitude_grid, evolve_unitary, single_photon_index, single_photon_populations

    model = derive_dispersive(spec3)
    chi = model.chi_homogeneous
    basis3 = build_basis(3, cutoff=1, excitation_cap=1)
    h_eff = build_effective(model, basis3)
    psi0 = np.zeros(basis3.dim, dtype=complex)
    psi0[single_photon_index(basis3, 0)] = 1.0
    grid = TimeGrid(0.0, 1.3 * np.pi / chi, 80)
    traj = evolve_unitary(h_eff, psi0, grid)
    p_eff = single_photon_populations(traj.states, basis3, 3)
    p_closed = np.abs(amplitude_grid(3, chi * traj.times)) ** 2
    np.testing.assert_allclose(p_eff, p_closed, atol=1.0e-12)


def test_full_single_photon_band_structure(spec3, basis4):
    # in the frame rotating at the bare resonator frequency, the hopping band
    # of the full model is one collective state 3*chi deep (2*chi of hopping
    # plus the uniform second-order shift) and two states near zero that join
    # the exact vacuum zero; the bus branch sits ~Delta higher
    model = derive_dispersive(spec3)
    chi = model.chi_homogeneous
    h_full = shift_frame(build_full(spec3, basis4).h_full, basis4, spec3.omegas[0])
    ev = np.linalg.eigvalsh(h_full)
    low = np.sort(ev[np.abs(ev) < 10.0 * chi])
    np.testing.assert_allclose(low, [-3.0 * chi, 0.0, 0.0, 0.0], atol=0.05 * chi)
    assert np.max(ev) > 0.5 * model.delta[0]


def test_effective_requires_resonant_network():
    spec = reference_spec(3)
    import dataclasses

    detuned = dataclasses.replace(
        spec,
        resonators=(
            spec.resonators[0],
            dataclasses.replace(spec.resonators[1], freq_ghz=5.80),
            spec.resonators[2],
        ),
    )
    model = derive_dispersive(detuned)
    basis3 = build_basis(3, cutoff=1, excitation_cap=1)
    with pytest.raises(ValueError, match="integrate_amplitudes"):
        build_effective(model, basis3)


def test_sw_residuals_reference_point(spec3, basis4):
    rep = verify_sw_identities(spec3, basis4)
    assert rep.r1 <= 1.0e-10
    assert rep.r3 <= 1.0e-12
    assert rep.eigenvalue_drift <= 1.0e-10
    assert rep.spectrum_relative_error <= 1.0e-3
    # second-order truncation error is quadratic: (2g/Delta)^2 at g/Delta=0.05
    assert rep.r2_relative == pytest.approx(0.01, rel=0.01)


def test_sw_truncation_error_scales_quadratically():
    # halving g should quarter the relative second-order residual
    basis = build_basis(4, cutoff=1, excitation_cap=1)
    r_full = verify_sw_identities(reference_spec(3), basis).r2_relative
    r_half = verify_sw_identities(
        reference_spec(3, couplings_mhz=[25.0, 25.0, 25.0]), basis
    ).r2_relative
    assert r_full / r_half == pytest.approx(4.0, rel=0.01)


def test_sw_transform_preserves_spectrum(spec3, basis4):
    ham = build_full(spec3, basis4)
    u = scipy.linalg.expm(ham.s_generator)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(basis4.dim), atol=1.0e-12)
