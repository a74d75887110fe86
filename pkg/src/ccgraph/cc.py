"""Single-reference CI and coupled-cluster solvers on an excitation graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import determinant as det
from .errors import ConfigurationError, NotExcitationCompleteError, SingularJacobianError
from .graph import ExcitationGraph, GraphSpec, classify
from .hamiltonian import Hamiltonian, check_dense, similarity_apply
from .operators import Amplitudes, _exp_series, cluster_matrix, exp_apply, log_cluster

JACOBIAN_MODES = ("analytic", "finite-difference")


@dataclass
class SolverOptions:
    tol_residual: float = 1e-10
    max_iter: int = 100
    damping: float = 0.5
    jacobian_mode: str = "analytic"
    fd_step: float = 1e-6
    similarity: str = "bch"

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ConfigurationError("tol_residual must be positive")
        if not 0 < self.damping <= 1:
            raise ConfigurationError("damping must lie in (0, 1]")
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be nonnegative")
        if self.jacobian_mode not in JACOBIAN_MODES:
            raise ConfigurationError(f"jacobian_mode must be one of {JACOBIAN_MODES}")
        if self.similarity not in ("bch", "naive"):
            raise ConfigurationError("similarity must be 'bch' or 'naive'")


class CCProblem:
    """Hamiltonian plus a consistent, excitation-complete single-reference graph."""

    def __init__(self, H: Hamiltonian, graph: ExcitationGraph, options: SolverOptions | None = None):
        if graph.M != 1:
            raise ConfigurationError("a CC problem needs a single-reference graph")
        if (graph.K, graph.N) != (H.K, H.N):
            raise ConfigurationError(f"graph (K={graph.K}, N={graph.N}) does not match the Hamiltonian (K={H.K}, N={H.N})")
        cls = classify(graph)
        if not cls.consistent:
            raise ConfigurationError("CC needs a consistent excitation graph")
        if not cls.excitation_complete:
            raise NotExcitationCompleteError("CC needs an excitation-complete graph")
        self.H = H
        self.graph = graph
        self.options = options or SolverOptions()
        self.ref = graph.ref(0)
        self.phi0 = graph.basis.unit(self.ref)
        self.positions = np.array([graph.basis.index[a] for a in graph.labels(0)], dtype=np.intp)

    @classmethod
    def build(cls, H: Hamiltonian, spec: GraphSpec | None = None, ref: int | None = None, options=None) -> CCProblem:
        ref = det.from_indices(range(1, H.N + 1)) if ref is None else ref
        return cls(H, ExcitationGraph(H.K, H.N, [ref], spec or GraphSpec.full()), options)

    def zeros(self) -> Amplitudes:
        return Amplitudes.zeros(self.graph)


@dataclass
class CCSolution:
    t: Amplitudes
    energy: float
    residual_norm: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
        }


# -- CI --------------------------------------------------------------------------


def solve_fci(H: Hamiltonian, n_states: int = 1) -> list[tuple[float, np.ndarray]]:
    """Lowest ``n_states`` eigenpairs of the full Hamiltonian matrix, ascending."""
    check_dense(H.basis.dim)
    w, v = np.linalg.eigh(H.dense())
    return [(float(w[k]), v[:, k]) for k in range(min(n_states, len(w)))]


def solve_ci_projected(H: Hamiltonian, graph: ExcitationGraph, m: int = 0) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of H restricted to ``span{Phi_0} + V(G)``; the vector has ``c0 >= 0``."""
    idx = graph.basis.index
    space = np.array([idx[graph.ref(m)]] + [idx[a] for a in graph.labels(m)], dtype=np.intp)
    check_dense(len(space))
    sub = H.matrix[space][:, space].toarray()
    w, v = np.linalg.eigh(sub)
    vec = np.zeros(graph.basis.dim)
    vec[space] = v[:, 0]
    if vec[space[0]] < 0:
        vec = -vec
    return float(w[0]), vec


# -- CC energy, residual, Jacobian ----------------------------------------------


def cc_energy(t: Amplitudes, H: Hamiltonian, method: str = "shortcut") -> float:
    """``<e^{-T} H e^{T} Phi_0, Phi_0>``.

    The default shortcut ``<H (I + T1 + T2 + T1^2 / 2) Phi_0, Phi_0>`` is exact
    for two-body Hamiltonians.
    """
    G = t.graph
    phi0 = G.basis.unit(G.ref(t.m))
    if method == "similarity":
        return float(similarity_apply(H, t, phi0)[G.basis.index[G.ref(t.m)]])
    if method != "shortcut":
        raise ConfigurationError(f"unknown energy method {method!r}")
    T1 = cluster_matrix(t.rank_part(1))
    T2 = cluster_matrix(t.rank_part(2))
    t1phi = T1 @ phi0
    v = phi0 + t1phi + T2 @ phi0 + 0.5 * (T1 @ t1phi)
    row = H.matrix[G.basis.index[G.ref(t.m)]]
    return float((row @ v)[0])


def _hbar_phi0(t: Amplitudes, problem: CCProblem) -> np.ndarray:
    return similarity_apply(problem.H, t, problem.phi0, problem.options.similarity)


def cc_residual(t: Amplitudes, problem: CCProblem) -> Amplitudes:
    """``r_alpha = <e^{-T} H e^{T} Phi_0, Phi_alpha>`` for every label of the graph."""
    return Amplitudes(problem.graph, _hbar_phi0(t, problem)[problem.positions])


def _hbar_columns(t: Amplitudes, problem: CCProblem, cols: np.ndarray) -> np.ndarray:
    T = cluster_matrix(t)
    N = problem.graph.N
    X = _exp_series(T, cols, N)
    X = problem.H.matrix @ X
    return _exp_series(T, X, N, -1.0)


def cc_jacobian(t: Amplitudes, problem: CCProblem) -> np.ndarray:
    """Dense Jacobian ``d r_alpha / d t_beta``.

    Analytic mode uses ``d r / d t_beta = P (Hbar Phi_beta - X_beta Hbar Phi_0)``,
    which follows from the commutativity of cluster operators.
    """
    n = len(problem.positions)
    if problem.options.jacobian_mode == "finite-difference":
        h = problem.options.fd_step
        J = np.zeros((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            rp = cc_residual(Amplitudes(problem.graph, t.values + e), problem).values
            rm = cc_residual(Amplitudes(problem.graph, t.values - e), problem).values
            J[:, k] = (rp - rm) / (2 * h)
        return J
    dim = problem.graph.basis.dim
    units = np.zeros((dim, n))
    units[problem.positions, np.arange(n)] = 1.0
    HU = _hbar_columns(t, problem, units)
    w = _hbar_phi0(t, problem)
    tab = problem.graph.table(0)
    XW = sp.csr_matrix((tab.sign * w[tab.src], (tab.dst, tab.label_pos)), shape=(dim, n))
    return HU[problem.positions] - XW[problem.positions].toarray()


def cc_jacobian_apply(t: Amplitudes, u: Amplitudes, problem: CCProblem) -> Amplitudes:
    """Directional derivative of the residual at ``t`` along ``u``."""
    if problem.options.jacobian_mode == "finite-difference":
        h = problem.options.fd_step
        rp = cc_residual(Amplitudes(problem.graph, t.values + h * u.values), problem).values
        rm = cc_residual(Amplitudes(problem.graph, t.values - h * u.values), problem).values
        return Amplitudes(problem.graph, (rp - rm) / (2 * h))
    U = cluster_matrix(u)
    w = _hbar_phi0(t, problem)
    hu = _hbar_columns(t, problem, (U @ problem.phi0)[:, None])[:, 0]
    return Amplitudes(problem.graph, (hu - U @ w)[problem.positions])


# -- Newton ------------------------------------------------------------------------


def newton_step(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    if J.size == 0:
        return np.zeros(0)
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= 1e-14 * max(s[0], 1.0):
        raise SingularJacobianError(f"Jacobian is numerically singular (smallest singular value {s[-1]:.3g})")
    return np.linalg.solve(J, -r)


def damped_newton(residual, jacobian, x0: np.ndarray, options: SolverOptions):
    """Newton iteration with one damped retry whenever the residual norm grows.

    Returns ``(x, residual_norm, iterations, converged, history)``.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    norm = float(np.linalg.norm(r))
    history = [norm]
    it = 0
    while norm > options.tol_residual and it < options.max_iter:
        if not np.isfinite(norm):
            break
        dx = newton_step(jacobian(x), r)
        trial = x + dx
        rt = residual(trial)
        nt = float(np.linalg.norm(rt))
        if not nt <= norm:
            trial = x + options.damping * dx
            rt = residual(trial)
            nt = float(np.linalg.norm(rt))
        x, r, norm = trial, rt, nt
        it += 1
        history.append(norm)
    return x, norm, it, bool(norm <= options.tol_residual), history


def solve_cc(problem: CCProblem, t_init: Amplitudes | None = None) -> CCSolution:
    """Solve the projected CC equations by damped Newton iteration from ``t_init`` (default 0)."""
    G = problem.graph
    x0 = np.zeros(len(problem.positions)) if t_init is None else t_init.values

    def residual(x):
        return cc_residual(Amplitudes(G, x), problem).values

    def jacobian(x):
        return cc_jacobian(Amplitudes(G, x), problem)

    x, norm, it, ok, hist = damped_newton(residual, jacobian, x0, problem.options)
    t = Amplitudes(G, x)
    return CCSolution(t, cc_energy(t, problem.H), norm, it, ok, hist)


# -- FCC / FCI comparison --------------------------------------------------------


REFERENCE_OVERLAP_THRESHOLD = 1e-8


@dataclass
class EquivalenceReport:
    e_fci: float
    e_cc: float
    overlap: float
    reference_orthogonal: bool
    max_vector_diff: float
    converged: bool

    @property
    def energy_error(self) -> float:
        return abs(self.e_cc - self.e_fci)


def fcc_fci_comparison(H: Hamiltonian, ref: int | None = None, options: SolverOptions | None = None) -> EquivalenceReport:
    """Solve full CC and FCI and compare energies and intermediately normalised vectors."""
    problem = CCProblem.build(H, GraphSpec.full(), ref, options)
    (e_fci, psi), = solve_fci(H, 1)
    c0 = psi[H.basis.index[problem.ref]]
    orth = abs(c0) < REFERENCE_OVERLAP_THRESHOLD
    sol = solve_cc(problem)
    cc_vec = exp_apply(sol.t, problem.phi0)
    diff = float("nan") if orth else float(np.max(np.abs(cc_vec - psi / c0)))
    return EquivalenceReport(e_fci, sol.energy, float(c0), orth, diff, sol.converged)


def fci_cluster_amplitudes(H: Hamiltonian, graph: ExcitationGraph, state: int = 0, m: int = 0) -> Amplitudes:
    """Cluster amplitudes of an FCI eigenvector, intermediately normalised on the frame reference."""
    from .operators import wavefunction_to_amplitudes

    pairs = solve_fci(H, state + 1)
    psi = pairs[state][1]
    c0, c = wavefunction_to_amplitudes(psi, graph, m)
    if abs(c0) < REFERENCE_OVERLAP_THRESHOLD:
        raise ConfigurationError("the eigenvector is orthogonal to the reference")
    return log_cluster(c * (1.0 / c0))
