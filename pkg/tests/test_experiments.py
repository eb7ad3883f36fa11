"""Scenario harness: grids, sweeps, calibration, and CSV output."""

import dataclasses
import json

import numpy as np
import pytest

from resonatorsim import (
    TimeGrid,
    annihilation,
    build_basis,
    build_full,
    derive_dispersive,
    evolve_lindblad,
    fidelity_dm,
    first_crossing_chi_t,
    ideal_target,
    optimize_g1,
    optimize_to_scenario,
    reference_spec,
    scenario_population,
    shift_frame,
    single_photon_index,
    sweep_fidelity_map_g2,
    sweep_fidelity_vs_time,
    sweep_gm,
    sweep_werner,
    write_result,
)
from resonatorsim.experiments import _map_ordered, _with_coupling, _worker_count


def test_reference_spec_values():
    spec = reference_spec(4, kappa_mhz=0.25, gm_mhz=1.0)
    assert spec.n == 4
    assert spec.bus_freq_ghz == 6.75
    assert all(r.freq_ghz == 5.75 for r in spec.resonators)
    assert all(r.g_mhz == 50.0 for r in spec.resonators)
    assert all(r.kappa_mhz == 0.25 for r in spec.resonators)
    assert spec.bus_kappa_mhz == 0.25
    assert spec.gm_mhz == 1.0
    with pytest.raises(ValueError):
        reference_spec(3, couplings_mhz=[50.0, 50.0])


def test_first_crossing_values():
    assert first_crossing_chi_t(3) == pytest.approx(2.0 * np.pi / 9.0, abs=1.0e-8)
    assert first_crossing_chi_t(4) == pytest.approx(np.pi / 4.0, abs=1.0e-5)
    with pytest.raises(ValueError, match="optimize_g1"):
        first_crossing_chi_t(5)


def test_scenario_population_columns_and_agreement():
    res = scenario_population(3, points=101, chi_t_max_over_pi=0.5)
    assert list(res.columns)[:1] == ["chi_t_over_pi"]
    for j in (1, 2, 3):
        assert f"p_analytic_{j}" in res.columns
        assert f"p_abinitio_{j}" in res.columns
    assert res.rows == 101
    for j in (1, 2, 3):
        dev = np.max(
            np.abs(res.columns[f"p_analytic_{j}"] - res.columns[f"p_abinitio_{j}"])
        )
        assert dev < 0.03  # dispersive error at g/Delta = 0.05


def test_scenario_population_damped_column_decays():
    res = scenario_population(3, with_kappa_mhz=1.0, points=40, chi_t_max_over_pi=0.4)
    total = sum(res.columns[f"p_damped_{j}"] for j in (1, 2, 3))
    assert total[0] == pytest.approx(1.0, abs=1.0e-6)
    # the three distant modes hold e^{-kappa t} of the photon, minus the bus
    # admixture ripple (collectively enhanced: ~n (g/Delta)^2, measured <= 0.01)
    chi = derive_dispersive(reference_spec(3)).chi_homogeneous
    t = np.pi * res.columns["chi_t_over_pi"] / chi
    envelope = np.exp(-1.0 * t)
    assert np.all(total <= envelope + 1.0e-6)
    assert np.all(total >= envelope - 0.012)


def test_scenario_population_rejects_wrong_n():
    with pytest.raises(ValueError):
        scenario_population(4, reference_spec(3))


def test_scenario_population_rejects_inhomogeneous():
    spec = _with_coupling(reference_spec(3), 0, 60.0)
    with pytest.raises(ValueError, match="identical"):
        scenario_population(3, spec)


def test_fidelity_sweep_kappa_zero_peak():
    res = sweep_fidelity_vs_time(3, points=121, chi_t_max_over_pi=0.3)
    col = res.columns["f_kappa_0mhz"]
    assert np.max(col) > 0.995
    assert res.metadata["chi_t_star_over_pi"] == pytest.approx(2.0 / 9.0, abs=1.0e-6)
    with pytest.raises(ValueError):
        sweep_fidelity_vs_time(3, kappas_mhz=[-0.1])


def test_map_factorization_matches_master_equation():
    # the map computes exp(-kappa t) * unitary fidelity; cross-check one cell
    # against the master-equation integrator
    kappa = 0.10
    xs = [0.10, 0.22]
    res = sweep_fidelity_map_g2(g2_ratios=[0.8], chi_t_over_pi=xs, kappa_mhz=kappa)
    spec = _with_coupling(reference_spec(3), 1, 40.0)
    model = derive_dispersive(reference_spec(3))
    chi = model.chi_homogeneous
    basis = build_basis(4, cutoff=1, excitation_cap=1)
    h = shift_frame(build_full(spec, basis).h_full, basis, spec.omegas[0])
    target = ideal_target(3, first_crossing_chi_t(3), basis)
    psi0 = np.zeros(basis.dim, dtype=complex)
    psi0[single_photon_index(basis, 1)] = 1.0
    ops = [(kappa, annihilation(basis, m)) for m in range(4)]
    for i, x in enumerate(xs):
        traj = evolve_lindblad(
            h, ops, np.outer(psi0, psi0.conj()), TimeGrid(0.0, np.pi * x / chi, 2)
        )
        f_me = fidelity_dm(traj.states[-1], target)
        assert res.columns["f_g2_0.8"][i] == pytest.approx(f_me, abs=1.0e-6)


def test_gm_sweep_infinite_ratio_is_baseline():
    res = sweep_gm(ratios=[np.inf, 100.0], kappas_mhz=[0.0])
    f = res.columns["f_kappa_0mhz"]
    assert res.columns["gm_mhz"][0] == 0.0
    assert f[0] > 0.99  # no direct coupling: near-ideal at the crossing
    # gm = 0 must agree with a spec that simply has no direct coupling
    spec = reference_spec(3)
    assert dataclasses.replace(spec, gm_mhz=0.0) == spec
    assert f[1] < f[0]  # direct coupling at g/100 costs fidelity


def test_werner_routes_agree():
    # exact-diagonalization path (kappa = 0) vs the master-equation integrator
    res = sweep_werner(p_grid=[0.7], thetas_pi=[0.25])
    spec = reference_spec(3)
    model = derive_dispersive(spec)
    chi = model.chi_homogeneous
    chi_t_star = first_crossing_chi_t(3)
    basis = build_basis(4, cutoff=1, excitation_cap=3)
    from resonatorsim import WernerParams, werner_initial

    rho0 = werner_initial(WernerParams(0.7, 0.25 * np.pi), basis)
    h = shift_frame(build_full(spec, basis).h_full, basis, spec.omegas[0])
    traj = evolve_lindblad(
        h,
        [(0.0, annihilation(basis, 0))],
        rho0,
        TimeGrid(0.0, chi_t_star / chi, 2),
    )
    f_me = fidelity_dm(traj.states[-1], ideal_target(3, chi_t_star, basis))
    assert res.columns["f_theta_0.25pi"][0] == pytest.approx(f_me, abs=1.0e-6)


def test_optimizer_invariants():
    search = (50.0, 80.0)
    result = optimize_g1(5, search_mhz=search)
    assert search[0] <= result.g1_mhz <= search[1]
    # never worse than the endpoints of the scanned interval
    assert result.objective <= result.grid_objective[0] + 1.0e-9
    assert result.objective <= result.grid_objective[-1] + 1.0e-9
    assert len(result.grid_g1_mhz) == len(result.grid_objective) == 21
    times = result.chi_t_over_pi_equal
    assert np.all((times > 0.0) & (times <= 2.0))
    assert np.all(np.diff(times) > 0)


def test_optimizer_rejects_small_n_and_bad_interval():
    with pytest.raises(ValueError):
        optimize_g1(3)
    with pytest.raises(ValueError):
        optimize_g1(5, search_mhz=(80.0, 50.0))


def test_optimize_to_scenario_metadata():
    result = optimize_g1(5, grid_points=5, chi_t_max_over_pi=1.0)
    res = optimize_to_scenario(result, 5)
    assert res.metadata["g1_star_mhz"] == result.g1_mhz
    assert list(res.columns) == ["g1_mhz", "objective"]
    assert res.rows == 5


def test_write_result_deterministic(tmp_path):
    res = scenario_population(3, points=12, chi_t_max_over_pi=0.2)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_result(res, a)
    write_result(res, b)
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.meta.json").read_text(encoding="utf-8"))
    assert meta["name"] == "population_n3"
    assert meta["rows"] == 12
    assert meta["spec"]["resonators"][0]["g_mhz"] == 50.0
    header = a.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("chi_t_over_pi,p_analytic_1")


def test_write_result_twelve_digits(tmp_path):
    from resonatorsim import ScenarioResult

    res = ScenarioResult(
        "fmt", {"x": np.array([1.0 / 3.0]), "y": np.array([np.inf])}, {"name": "fmt"}
    )
    path = tmp_path / "fmt.csv"
    write_result(res, path)
    body = path.read_text(encoding="utf-8").splitlines()[1]
    assert body == "0.333333333333,inf"


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("RESONATORSIM_THREADS", "2")
    assert _worker_count() == 2
    monkeypatch.setenv("RESONATORSIM_THREADS", "zero?")
    with pytest.raises(ValueError):
        _worker_count()
    monkeypatch.delenv("RESONATORSIM_THREADS")
    assert _worker_count() >= 1


def test_map_ordered_preserves_order(monkeypatch):
    monkeypatch.setenv("RESONATORSIM_THREADS", "4")
    items = list(range(25))
    assert _map_ordered(lambda v: v * v, items) == [v * v for v in items]
    monkeypatch.setenv("RESONATORSIM_THREADS", "1")
    assert _map_ordered(lambda v: v + 1, items) == [v + 1 for v in items]
