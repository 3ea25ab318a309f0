"""Noether constants of classical and quantum Markov semigroups."""

__version__ = "0.1.0"

from .classical import (ClassicalGenerator, NoetherReportClassical, check_constant,
                        communication_classes, hat_diag, transition, validate_generator)
from .linops import (OperatorSubspace, SpectralDecomposition, ToleranceConfig, matrix_exp,
                     nullspace, spectral_decompose, subspace_distance)
from .noether import (commutant, conditional_expectation, fixed_points, hat_map,
                      is_constant_quantum, modular_flow, noether_check, stationary_state,
                      superop_commutator)
from .qds import (KrausSet, LindbladSpec, SuperOperator, evolve, is_cp_trace_preserving,
                  kraus_to_superop, lindblad_heisenberg, lindblad_schrodinger, superop_to_kraus)
