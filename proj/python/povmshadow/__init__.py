"""POVM classical-shadow tomography: simulation, estimation, reconstruction."""

from ._core import (  # noqa: F401
    CalibrationResult,
    DensityMatrix,
    DomainError,
    EstimateReport,
    HermitianOperator,
    PureState,
    ReconstructionTrace,
    RecordSet,
    SpsaConfig,
    circular_design,
    density,
    estimate_observable,
    estimate_purity,
    fidelity,
    lens_phase,
    load_records,
    make_pure_state,
    make_two_photon_state,
    mle,
    observable_from_descriptor,
    pillar_unitary,
    preset_robust,
    preset_single_qubit,
    preset_two_qubit,
    run_calibration,
    sample_shots,
    save_records,
    slst,
    state_from_descriptor,
    stokes_from_intensities,
)

__all__ = [name for name in dir() if not name.startswith("_")]
