"""Dual Schur domain decomposition for first-order transient systems.

Subdomains of a finite element heat conduction model are integrated with the
generalized trapezoidal family and coupled through Lagrange multipliers.
Four interface conditions are available (d-continuity, a modified
d-continuity, v-continuity and Baumgarte stabilization), along with energy
and drift diagnostics and reference solutions.
"""
from .analytic import heat1d_mixed_series, heat1d_neumann, heat2d_neumann, split_dof_exact
from .decomposition import (DecomposedProblem, SignedBooleanMatrix, Subdomain, from_matrices,
                            partition_1d, partition_2d, split_dof_problem, verify_independence)
from .exceptions import (AlphaOutOfRange, Diverged, DualSchurError, GammaOutOfRange,
                         IllPosedForwardEuler, IndivisiblePartition, NoConvergence,
                         NotPositiveDefinite)
from .fem import Mesh1D, Mesh2D, SemiDiscreteSystem, assemble, assemble_1d, assemble_2d, l2_error
from .linalg import CholeskyFactor, cholesky_factor, max_generalized_eigenvalue
from .stability import (EnergyMonitor, StepRecord, baumgarte_alpha_max, baumgarte_critical_dt,
                        counterexample_sequence, critical_time_step, energy_step,
                        jump_average_identities_check, proposition_bounded_reconstruction)
from .steppers import (Baumgarte, CouplingState, DContinuity, ModifiedDContinuity,
                       TrapezoidalConfig, VContinuity, initial_state, method_from_name,
                       simulate, simulate_monolithic, step)

__version__ = "0.1.0"

__all__ = [
    "AlphaOutOfRange",
    "Baumgarte",
    "CholeskyFactor",
    "CouplingState",
    "DContinuity",
    "DecomposedProblem",
    "Diverged",
    "DualSchurError",
    "EnergyMonitor",
    "GammaOutOfRange",
    "IllPosedForwardEuler",
    "IndivisiblePartition",
    "Mesh1D",
    "Mesh2D",
    "ModifiedDContinuity",
    "NoConvergence",
    "NotPositiveDefinite",
    "SemiDiscreteSystem",
    "SignedBooleanMatrix",
    "StepRecord",
    "Subdomain",
    "TrapezoidalConfig",
    "VContinuity",
    "assemble",
    "assemble_1d",
    "assemble_2d",
    "baumgarte_alpha_max",
    "baumgarte_critical_dt",
    "cholesky_factor",
    "counterexample_sequence",
    "critical_time_step",
    "energy_step",
    "from_matrices",
    "heat1d_mixed_series",
    "heat1d_neumann",
    "heat2d_neumann",
    "initial_state",
    "jump_average_identities_check",
    "l2_error",
    "max_generalized_eigenvalue",
    "method_from_name",
    "partition_1d",
    "partition_2d",
    "proposition_bounded_reconstruction",
    "simulate",
    "simulate_monolithic",
    "split_dof_exact",
    "split_dof_problem",
    "step",
    "verify_independence",
]
