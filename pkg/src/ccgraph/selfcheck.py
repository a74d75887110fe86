"""Cross-checks of the main code paths against the brute-force oracle."""

from __future__ import annotations

import numpy as np

from . import determinant as det
from . import oracle
from .cc import CCProblem, SolverOptions, cc_jacobian, fcc_fci_comparison
from .cover import CoverInstance, solve_cover
from .errors import ConfigurationError
from .graph import ExcitationGraph, classify
from .hamiltonian import Hamiltonian, random_integrals, similarity_apply
from .operators import Amplitudes, excitation_matrix, exp_cluster, log_cluster
from .stats import graph_stats

SELFCHECK_MAX_NORB = 8


def _edge_list(G):
    return sorted((e.source, e.label, e.target, e.ref_index) for e in G.edges())


def run_selfcheck(K: int, N: int, seed: int = 0) -> list[tuple[str, bool]]:
    """Run every check and return ``[(name, passed), ...]`` in a fixed order."""
    det.check_norb(K)
    if K > SELFCHECK_MAX_NORB:
        raise ConfigurationError(f"selfcheck is brute force; use K <= {SELFCHECK_MAX_NORB}")
    if not 1 <= N < K:
        raise ConfigurationError(f"selfcheck needs 1 <= N < K, got N={N}, K={K}")
    rng = np.random.default_rng(seed)
    ref = det.from_indices(range(1, N + 1))
    G = ExcitationGraph(K, N, [ref])
    out = []

    out.append(("edges of the full graph", _edge_list(G) == oracle.oracle_enumerate_graph(K, N, [ref])))

    states = det.enumerate_states(K, N)
    other = states[rng.integers(1, len(states))]
    G2 = ExcitationGraph(K, N, [ref, other])
    out.append(("edges of a two-reference multigraph", _edge_list(G2) == oracle.oracle_enumerate_graph(K, N, [ref, other])))

    out.append(("sign of every edge", all(
        det.sign_sigma(e.label, e.source, ref) == oracle.oracle_sign(e.label, e.source, ref) for e in G.edges(0)
    )))

    ok = True
    for alpha in G.labels(0):
        X, _ = oracle.oracle_excitation_matrix(alpha, ref, K, N)
        ok &= np.array_equal(excitation_matrix(alpha, G).toarray(), X)
    out.append(("excitation operator matrices", bool(ok)))

    cls = classify(G)
    out.append(("full graph is consistent and excitation complete", cls.consistent and cls.excitation_complete))
    out.append(("closed-form graph statistics", graph_stats(G).ok))

    ints = random_integrals(K, rng, 0.1, spacing=1.0)
    H = Hamiltonian(ints, N)
    out.append(("Hamiltonian matrix", bool(np.allclose(H.dense(), oracle.oracle_H_matrix(ints, N), atol=1e-12))))

    t = Amplitudes.random(G, rng, 0.2)
    out.append(("log(exp(T)) round trip", bool(np.allclose(log_cluster(exp_cluster(t)).values, t.values, atol=1e-12))))

    phi0 = G.basis.unit(ref)
    a = similarity_apply(H, t, phi0, "bch")
    b = similarity_apply(H, t, phi0, "naive")
    out.append(("BCH against direct similarity transform", bool(np.allclose(a, b, atol=1e-10 * max(1.0, np.abs(b).max())))))

    problem = CCProblem(H, G)
    fd = CCProblem(H, G, SolverOptions(jacobian_mode="finite-difference"))
    small = t * 0.1
    Ja, Jf = cc_jacobian(small, problem), cc_jacobian(small, fd)
    out.append(("analytic Jacobian against finite differences", bool(np.allclose(Ja, Jf, atol=1e-6 * max(1.0, np.abs(Jf).max())))))

    rep = fcc_fci_comparison(H)
    out.append(("full CC energy equals FCI", rep.converged and rep.energy_error < 1e-8))

    targets = [states[i] for i in sorted(rng.choice(len(states), size=min(2, len(states)), replace=False))]
    inst = CoverInstance(K, N, targets, 1)
    sol = solve_cover(inst)
    ref_cost, _ = oracle.oracle_cover(K, N, targets, 1)
    out.append(("reference cover cost", sol.optimal and sol.total_cost == ref_cost))
    return out
