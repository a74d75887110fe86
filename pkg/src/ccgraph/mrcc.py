"""Jeziorski-Monkhorst multireference CC and the matching multireference CI.

Each reference ``0_m`` carries its own amplitudes on its own frame of the
multigraph.  The coupled equations are

    [e^{-T_m} H e^{T_m} Phi_m]_alpha = sum_n Heff_mn [e^{-T_m} e^{T_n} Phi_n]_alpha
    Heff_mn = <e^{-T_m} H e^{T_m} Phi_m, Phi_n>

for every label ``alpha`` of frame ``m``; energies come from the eigenproblem
``sum_n Heff_nm a^(n) = E a^(m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cc import SolverOptions, damped_newton
from .errors import ConfigurationError, NotExcitationCompleteError
from .graph import ExcitationGraph, classify
from .hamiltonian import Hamiltonian, similarity_apply
from .operators import Amplitudes, apply_cluster, exp_apply, log_cluster, wavefunction_to_amplitudes


class MRProblem:
    def __init__(self, H: Hamiltonian, graph: ExcitationGraph, options: SolverOptions | None = None):
        if (graph.K, graph.N) != (H.K, H.N):
            raise ConfigurationError("graph and Hamiltonian disagree on K or N")
        for m in range(graph.M):
            cls = classify(graph, m)
            if not cls.consistent:
                raise ConfigurationError(f"frame {m + 1} is not a consistent subgraph")
            if not cls.excitation_complete:
                raise NotExcitationCompleteError(f"frame {m + 1} is not excitation complete")
        self.H = H
        self.graph = graph
        self.options = options or SolverOptions(jacobian_mode="finite-difference")
        self.M = graph.M
        idx = graph.basis.index
        self.ref_pos = np.array([idx[r] for r in graph.refs], dtype=np.intp)
        self.positions = [np.array([idx[a] for a in graph.labels(m)], dtype=np.intp) for m in range(self.M)]
        self.sizes = [len(p) for p in self.positions]
        self.phi = [graph.basis.unit(r) for r in graph.refs]

    def zeros(self) -> list[Amplitudes]:
        return [Amplitudes.zeros(self.graph, m) for m in range(self.M)]

    def split(self, x: np.ndarray) -> list[Amplitudes]:
        out, start = [], 0
        for m, n in enumerate(self.sizes):
            out.append(Amplitudes(self.graph, x[start : start + n], m))
            start += n
        return out

    @staticmethod
    def join(t_list) -> np.ndarray:
        return np.concatenate([t.values for t in t_list]) if t_list else np.zeros(0)


@dataclass
class ModelSpaceSolution:
    energies: np.ndarray  # sorted by real part; complex dtype only when complex_roots
    coefficients: np.ndarray  # column j holds a_j^(m), m = 1..M
    heff: np.ndarray
    complex_roots: bool

    def to_json(self) -> dict:
        def enc(z):
            z = complex(z)
            return z.real if not self.complex_roots else [z.real, z.imag]

        return {
            "energies": [enc(e) for e in self.energies],
            "coefficients": [[enc(c) for c in row] for row in self.coefficients],
            "heff": self.heff.tolist(),
            "complex_roots": self.complex_roots,
        }


@dataclass
class MRSolution:
    amplitudes: list[Amplitudes]
    model: ModelSpaceSolution
    residual_norm: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def model_space_eigen(heff: np.ndarray, imag_tol: float = 1e-10) -> ModelSpaceSolution:
    """Solve ``sum_n Heff_nm a^(n) = E a^(m)``, i.e. the eigenproblem of ``Heff^T``."""
    w, v = np.linalg.eig(heff.T)
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]
    cplx = bool(np.any(np.abs(w.imag) > imag_tol * max(1.0, float(np.max(np.abs(w))))))
    if not cplx:
        w, v = w.real, v.real
        v = v / np.linalg.norm(v, axis=0)
        # fix the sign so the largest component is positive
        big = np.argmax(np.abs(v), axis=0)
        v = v * np.sign(v[big, np.arange(v.shape[1])])
    return ModelSpaceSolution(w, v, heff, cplx)


# -- JM-MRCC ---------------------------------------------------------------------


def _hbar_refs(t_list, problem: MRProblem) -> list[np.ndarray]:
    return [similarity_apply(problem.H, t, problem.phi[m], problem.options.similarity) for m, t in enumerate(t_list)]


def effective_hamiltonian(t_list, problem: MRProblem) -> np.ndarray:
    """``Heff_mn = <e^{-T_m} H e^{T_m} Phi_m, Phi_n>``."""
    w = _hbar_refs(t_list, problem)
    return np.array([[w[m][problem.ref_pos[n]] for n in range(problem.M)] for m in range(problem.M)])


def jm_residual(t_list, problem: MRProblem) -> list[Amplitudes]:
    """Per-frame residuals of the coupled JM equations (``Heff`` taken from ``t_list``)."""
    w = _hbar_refs(t_list, problem)
    heff = np.array([[w[m][problem.ref_pos[n]] for n in range(problem.M)] for m in range(problem.M)])
    waves = [exp_apply(t, problem.phi[n]) for n, t in enumerate(t_list)]
    out = []
    for m, t in enumerate(t_list):
        rhs = np.zeros_like(w[m])
        for n in range(problem.M):
            if n == m:
                rhs += heff[m, m] * problem.phi[m]
            else:
                rhs += heff[m, n] * exp_apply(-t, waves[n])
        out.append(Amplitudes(problem.graph, (w[m] - rhs)[problem.positions[m]], m))
    return out


def _fd_jacobian(fun, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    J = np.zeros((len(fun(x)), n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (fun(x + e) - fun(x - e)) / (2 * h)
    return J


def solve_jm_mrcc(problem: MRProblem, t_init=None) -> MRSolution:
    """Damped Newton on all frames at once, then the model-space eigenproblem."""

    def residual(x):
        return MRProblem.join(jm_residual(problem.split(x), problem))

    def jacobian(x):
        return _fd_jacobian(residual, x, problem.options.fd_step)

    x0 = MRProblem.join(t_init) if t_init is not None else np.zeros(sum(problem.sizes))
    x, norm, it, ok, hist = damped_newton(residual, jacobian, x0, problem.options)
    t_list = problem.split(x)
    model = model_space_eigen(effective_hamiltonian(t_list, problem))
    return MRSolution(t_list, model, norm, it, ok, hist)


# -- MRCI --------------------------------------------------------------------------


def _ci_waves(c_list, problem: MRProblem) -> list[np.ndarray]:
    return [problem.phi[m] + apply_cluster(c, problem.phi[m]) for m, c in enumerate(c_list)]


def mrci_effective_hamiltonian(c_list, problem: MRProblem) -> np.ndarray:
    """``Heff_mn = <H (I + C_m) Phi_m, Phi_n>``."""
    hw = [problem.H.apply(w) for w in _ci_waves(c_list, problem)]
    return np.array([[hw[m][problem.ref_pos[n]] for n in range(problem.M)] for m in range(problem.M)])


def mrci_residual(c_list, problem: MRProblem) -> list[Amplitudes]:
    waves = _ci_waves(c_list, problem)
    hw = [problem.H.apply(w) for w in waves]
    heff = np.array([[hw[m][problem.ref_pos[n]] for n in range(problem.M)] for m in range(problem.M)])
    out = []
    for m in range(problem.M):
        rhs = sum(heff[m, n] * waves[n] for n in range(problem.M))
        out.append(Amplitudes(problem.graph, (hw[m] - rhs)[problem.positions[m]], m))
    return out


def solve_mrci(problem: MRProblem, c_init=None) -> MRSolution:
    """The bilinear MRCI system by damped Newton, then the same eigen post-processing."""

    def residual(x):
        return MRProblem.join(mrci_residual(problem.split(x), problem))

    def jacobian(x):
        return _fd_jacobian(residual, x, problem.options.fd_step)

    x0 = MRProblem.join(c_init) if c_init is not None else np.zeros(sum(problem.sizes))
    x, norm, it, ok, hist = damped_newton(residual, jacobian, x0, problem.options)
    c_list = problem.split(x)
    model = model_space_eigen(mrci_effective_hamiltonian(c_list, problem))
    return MRSolution(c_list, model, norm, it, ok, hist)


# -- exact construction --------------------------------------------------------------


def overlap_matrix(vectors, problem: MRProblem) -> np.ndarray:
    """``A_jn = <Psi_j, Phi_{0_n}>`` for the given states."""
    return np.array([[v[p] for p in problem.ref_pos] for v in vectors])


def exact_amplitudes(vectors, problem: MRProblem) -> list[Amplitudes]:
    """JM amplitudes reproducing the span of ``vectors`` (M exact eigenvectors).

    For each frame the combination ``chi_m`` with ``<chi_m, Phi_{0_n}> = delta_mn``
    is formed and ``T_m = log(I + C_m)`` with ``chi_m = (I + C_m) Phi_m``.
    The overlap matrix must be nonsingular.
    """
    V = np.column_stack(vectors)
    A = overlap_matrix(vectors, problem)
    if abs(np.linalg.det(A)) < 1e-10:
        raise ConfigurationError("model-space overlap matrix is singular")
    chi = V @ np.linalg.inv(A).T  # column m has unit overlap with Phi_m and none with the other references
    out = []
    for m in range(problem.M):
        c0, c = wavefunction_to_amplitudes(chi[:, m], problem.graph, m)
        out.append(log_cluster(c * (1.0 / c0)))
    return out
