"""Excitation graphs, cluster operators and coupled-cluster solvers on small determinant spaces."""

from .cc import CCProblem, CCSolution, SolverOptions, solve_cc, solve_ci_projected, solve_fci
from .cover import CoverInstance, CoverSolution, solve_cover, verify_cover
from .determinant import DeterminantBasis, format_det, from_indices, to_indices
from .errors import CCGraphError
from .graph import ExcitationGraph, GraphSpec, build_graph, classify
from .hamiltonian import Hamiltonian, IntegralSet, builtin_model, parse_integrals
from .mrcc import MRProblem, solve_jm_mrcc, solve_mrci
from .operators import Amplitudes

__version__ = "0.1.0"

__all__ = [
    "Amplitudes",
    "CCGraphError",
    "CCProblem",
    "CCSolution",
    "CoverInstance",
    "CoverSolution",
    "DeterminantBasis",
    "ExcitationGraph",
    "GraphSpec",
    "Hamiltonian",
    "IntegralSet",
    "MRProblem",
    "SolverOptions",
    "build_graph",
    "builtin_model",
    "classify",
    "format_det",
    "from_indices",
    "parse_integrals",
    "solve_cc",
    "solve_ci_projected",
    "solve_cover",
    "solve_fci",
    "solve_jm_mrcc",
    "solve_mrci",
    "to_indices",
    "verify_cover",
]
