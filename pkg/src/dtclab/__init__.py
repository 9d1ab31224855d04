"""Liouvillian spectra, dark states and time-crystal diagnostics for small
dissipative Hubbard chains."""

from .errors import (
    ConfigError,
    DimensionError,
    DtcLabError,
    IntegrationError,
    SiteIndexError,
    SizeCapError,
)
from .qspace import (
    FockBasis,
    SparseOperator,
    annihilator,
    anticommutator,
    build_basis,
    commutator,
    creator,
    frobenius_inner,
    identity,
    number_ops,
)
from .model import (
    HubbardParams,
    ScenarioSpec,
    build_hamiltonian,
    build_jump_operators,
    build_scenario_operators,
    scenario_from_dict,
    scenario_from_json,
    spin_operators,
    transverse_spin_op,
)
from .liouville import (
    CommensurabilityVerdict,
    Eigensystem,
    Liouvillian,
    SpectrumReport,
    build_liouvillian,
    classify,
    commensurability,
    eigensystem,
)
from .symmetry import (
    DarkState,
    DarkStateReport,
    GhzEffective,
    MixedCoherence,
    SymmetryCertificate,
    find_dark_states,
    ghz_effective,
    mixed_coherences,
    verify_dynamical_symmetry,
)
from .dynamics import (
    DensityTrajectory,
    TimeGrid,
    TrajectoryEnsemble,
    ensemble_average,
    evolve_master,
    evolve_observables,
    evolve_trajectories,
    expectation_series,
    random_pure_state,
)
from .probes import (
    DftSpectrum,
    TimeSeries,
    dft_blackman,
    find_peaks,
    loschmidt_echo_series,
    transverse_spin_series,
)

__version__ = "0.1.0"
