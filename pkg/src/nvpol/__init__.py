"""nvpol: steady-state Lindblad simulation and ODMR analysis of optically
pumped nuclear-spin polarization at the NV-center excited-state level
anti-crossing."""

from ._accel import NUMBA_ENABLED
from .model import (
    CalibrationError,
    DissipationParams,
    HyperfineTensor,
    Liouvillian,
    NVSystemParams,
    build_collapse_ops,
    build_hamiltonian,
    build_hyperfine,
    calibrate_pump,
    liouvillian,
)
from .odmr import (
    FitReport,
    LorentzianPeak,
    MetricResult,
    OdmrSpectrum,
    PeakSet,
    PolarizationEstimate,
    StrainFitReport,
    esodmr_lineshape,
    fit_spectrum,
    fit_strain_distribution,
    load_spectrum,
    model_spectrum,
    polarization_from_amplitudes,
    resonance_metric,
    save_spectrum,
)
from .solver import (
    DegenerateSteadyState,
    NoStationaryState,
    SolverError,
    SteadyStateReport,
    electron_polarization,
    evolve,
    nuclear_polarization,
    partial_trace,
    slowest_rate,
    steady_state,
    validate_density_matrix,
)
from .spinops import SpinQuantumNumber, embed, spin_operators
from .sweep import (
    StrainDistribution,
    SweepAxis,
    SweepResult,
    SweepSpec,
    scan_field_strain,
    solve_point,
    strain_averaged_polarization,
    sweep_field,
    temperature_curve,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "CalibrationError",
    "DissipationParams",
    "HyperfineTensor",
    "Liouvillian",
    "NVSystemParams",
    "build_collapse_ops",
    "build_hamiltonian",
    "build_hyperfine",
    "calibrate_pump",
    "liouvillian",
    "FitReport",
    "LorentzianPeak",
    "MetricResult",
    "OdmrSpectrum",
    "PeakSet",
    "PolarizationEstimate",
    "StrainFitReport",
    "esodmr_lineshape",
    "fit_spectrum",
    "fit_strain_distribution",
    "load_spectrum",
    "model_spectrum",
    "polarization_from_amplitudes",
    "resonance_metric",
    "save_spectrum",
    "DegenerateSteadyState",
    "NoStationaryState",
    "SolverError",
    "SteadyStateReport",
    "electron_polarization",
    "evolve",
    "nuclear_polarization",
    "partial_trace",
    "slowest_rate",
    "steady_state",
    "validate_density_matrix",
    "SpinQuantumNumber",
    "embed",
    "spin_operators",
    "StrainDistribution",
    "SweepAxis",
    "SweepResult",
    "SweepSpec",
    "scan_field_strain",
    "solve_point",
    "strain_averaged_polarization",
    "sweep_field",
    "temperature_curve",
    "__version__",
]
