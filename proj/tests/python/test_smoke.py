"""End-to-end smoke tests for the python bindings."""

import math
import os
import sys

import numpy as np
import pytest

module_dir = os.environ.get("POVMSHADOW_MODULE_DIR")
if module_dir:
    sys.path.insert(0, module_dir)

_core = pytest.importorskip("_core")


def test_states_and_fidelity():
    psi = _core.make_pure_state(0.91, 0.12)
    rho = _core.density(psi)
    assert rho.n_qubits == 1
    assert np.isclose(np.trace(rho.entries).real, 1.0)
    assert np.isclose(_core.fidelity(rho, rho), 1.0)

    bell_like = _core.density(_core.make_two_photon_state(0.5))
    assert bell_like.n_qubits == 2
    assert np.isclose(np.trace(bell_like.entries).real, 1.0)


def test_descriptor_errors_raise_domain_error():
    with pytest.raises(_core.DomainError):
        _core.state_from_descriptor("nonsense:1")
    with pytest.raises(_core.DomainError):
        _core.make_two_photon_state(1.5)


def test_sample_estimate_pipeline():
    rho = _core.state_from_descriptor("pure:0.7853981633974483,0")
    records = _core.sample_shots(rho, "octa", 20000, 7)
    assert records.size() == 20000
    assert records.master_seed == 7

    obs = _core.observable_from_descriptor("proj:0.7853981633974483,0")
    report = _core.estimate_observable(records, obs)
    assert abs(report.mean - 1.0) < 5.0 * report.std_error

    purity = _core.estimate_purity(records)
    assert abs(purity.mean - 1.0) < 5.0 * max(purity.std_error, 1e-3)


def test_records_round_trip(tmp_path):
    rho = _core.state_from_descriptor("pure:0.3,1.0")
    records = _core.sample_shots(rho, "sic", 500, 11)
    path = str(tmp_path / "records.jsonl")
    _core.save_records(path, records)
    back = _core.load_records(path)
    assert back.size() == 500
    assert back.master_seed == 11
    obs = _core.observable_from_descriptor("proj:0.3,1.0")
    assert _core.estimate_observable(back, obs).mean == _core.estimate_observable(
        records, obs
    ).mean


def test_slst_recovers_target():
    target = _core.density(_core.make_pure_state(0.91, 0.12))
    records = _core.sample_shots(target, "octa", 315, 3)
    cfg = _core.preset_single_qubit()
    cfg.seed = 5
    trace = _core.slst(records, cfg)
    assert _core.fidelity(trace.final_state, target) > 0.95
    assert len(trace.costs()) >= 1
    assert trace.wall_runs_consumed == 315


def test_calibration_ideal_coefficients():
    ground = _core.state_from_descriptor("zero:1")
    records = _core.sample_shots(ground, "octa", 50000, 13)
    calib = _core.run_calibration(records)
    assert np.isclose(calib.coefficients[0], 1.0)
    assert abs(calib.coefficients[1] - 1.0 / 3.0) < 4.0 * calib.std_errors[1]
    ideal = _core.CalibrationResult.ideal(2)
    assert np.allclose(ideal.coefficients, [1.0, 1 / 3, 1 / 3, 1 / 9])


def test_mle_baseline():
    target = _core.density(_core.make_pure_state(0.4, 0.9))
    records = _core.sample_shots(target, "octa", 2000, 17)
    rho_hat = _core.mle(records, 2000)
    assert _core.fidelity(rho_hat, target) > 0.95


def test_metadesign_helpers():
    assert _core.lens_phase(35.0, 0.0, 35.0, 0.0, 150.0, 0.81) == pytest.approx(0.0)

    u = _core.pillar_unitary(0.3, 1.1, 2.0)
    assert np.allclose(u @ u.conj().T, np.eye(2))

    theta, phi_x = _core.circular_design(math.pi, 0.0)
    assert theta == pytest.approx(math.pi / 4)
    assert phi_x == pytest.approx(math.pi / 2)

    s = _core.stokes_from_intensities([1.0, 0.0, 0.5, 0.5, 0.5, 0.5])
    assert np.allclose(s, [1.0, 0.0, 0.0])
    with pytest.raises(_core.DomainError):
        _core.stokes_from_intensities([1.0, 0.0, 0.0, 0.0, 0.5, 0.5])
