"""Capacities, error laws and measurement limits for quantum optical communication."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, ConvergenceError, DomainError, SqueezeCommError,
                     ValidationError)
from .infotheory import (AwgnParams, DiscreteDistribution, JointDistribution, awgn_capacity,
                         binary_entropy, data_rate, distinguishable_signals, interval_levels,
                         mmse_estimate, mutual_information, shannon_entropy, sphere_volume_ratio)
from .capacities import (CapacityCurve, CapacityKind, PoissonSolverOptions, capacity,
                         capacity_table, g_entropy, lossy_upper_bound, poisson_capacity,
                         solve_poisson_capacity)
from .states import (FockEnsemble, GaussianModeState, PhotonDistribution, Pom, TcsParams,
                     apply_loss, holevo_chi, number_state_ensemble, optimize_snr,
                     pom_mutual_information, tcs_stats, von_neumann_entropy)
from .amplifiers import (AmplifierKind, ChainSpec, amplify, chain_comparison, duplicate_counts,
                         pia_chain_exponent, pna_chain_error, pna_chain_exponent, poa_chain_error,
                         repeater_error)
from .ratedistortion import (FmSimConfig, GaussianMeanSquare, MeasurementLimitQuery, StateKind,
                             UniformPhase, fm_threshold_sim, measurement_limit, rd_function,
                             rd_invert)
from .monitor import (ContractiveParams, MassGaussianState, MonitoringPlan, PhysicalConstants,
                      ResetMode, free_evolve, measure_gl, run_monitoring, sql_bound,
                      tcs_to_moments)

__all__ = [
    "ConfigurationError", "ConvergenceError", "DomainError", "SqueezeCommError",
    "ValidationError", "AwgnParams", "DiscreteDistribution", "JointDistribution",
    "awgn_capacity", "binary_entropy", "data_rate", "distinguishable_signals",
    "interval_levels", "mmse_estimate", "mutual_information", "shannon_entropy",
    "sphere_volume_ratio", "CapacityCurve", "CapacityKind", "PoissonSolverOptions", "capacity",
    "capacity_table", "g_entropy", "lossy_upper_bound", "poisson_capacity",
    "solve_poisson_capacity", "FockEnsemble", "GaussianModeState", "PhotonDistribution", "Pom",
    "TcsParams", "apply_loss", "holevo_chi", "number_state_ensemble", "optimize_snr",
    "pom_mutual_information", "tcs_stats", "von_neumann_entropy", "AmplifierKind", "ChainSpec",
    "amplify", "chain_comparison", "duplicate_counts", "pia_chain_exponent", "pna_chain_error",
    "pna_chain_exponent", "poa_chain_error", "repeater_error", "FmSimConfig",
    "GaussianMeanSquare", "MeasurementLimitQuery", "StateKind", "UniformPhase",
    "fm_threshold_sim", "measurement_limit", "rd_function", "rd_invert", "ContractiveParams",
    "MassGaussianState", "MonitoringPlan", "PhysicalConstants", "ResetMode", "free_evolve",
    "measure_gl", "run_monitoring", "sql_bound", "tcs_to_moments",
]
