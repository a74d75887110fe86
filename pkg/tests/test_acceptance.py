"""Acceptance criteria 1-10, one test each; a summary line per criterion is printed at the end of the run."""

import time
from fractions import Fraction
from itertools import combinations

import numpy as np

from ccgraph import determinant as det
from ccgraph import oracle
from ccgraph.cc import CCProblem, cc_residual, fcc_fci_comparison, solve_cc, solve_ci_projected, solve_fci
from ccgraph.cover import CoverInstance, candidate_set, solve_cover, verify_cover
from ccgraph.graph import ExcitationGraph, GraphSpec, classify
from ccgraph.hamiltonian import (
    Hamiltonian,
    bch_term,
    direct_sum,
    hubbard_chain,
    pairing_model,
    random_integrals,
    similarity_apply,
)
from ccgraph.mrcc import MRProblem, overlap_matrix, solve_jm_mrcc, solve_mrci
from ccgraph.operators import Amplitudes, cluster_matrix, excitation_matrix, exp_cluster, log_cluster
from ccgraph.stats import graph_stats, truncated_path_stats

from conftest import ACCEPTANCE_LINES, deexcitation_matrix, ref_of

f = det.from_indices


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


# -- 1 ----------------------------------------------------------------------------


def test_criterion_1_graph_combinatorics():
    start = time.perf_counter()
    bad = []
    cases = [(K, N) for K in range(2, 9) for N in range(1, 5) if 2 * N <= K]
    for K, N in cases:
        rep = graph_stats(ExcitationGraph(K, N, [ref_of(N)]))
        sd = truncated_path_stats(K, N, (1, 2))
        bad += [(K, N, name) for name in rep.mismatches + sd.mismatches]
    elapsed = time.perf_counter() - start
    report(1, not bad and elapsed < 30, f"{len(cases)} (K,N) pairs, mismatches {bad}, {elapsed:.1f} s")


# -- 2 ----------------------------------------------------------------------------


def _dense(alpha, G, m):
    return excitation_matrix(alpha, G, m).toarray()


def _oracle_frame_matrices(G, ranks=None):
    """Oracle matrices per frame, from independently enumerated edges."""
    edges = oracle.oracle_enumerate_graph(G.K, G.N, G.refs, ranks)
    out = {}
    for m, ref in enumerate(G.refs):
        for alpha in G.labels(m):
            allowed = {(b, t) for b, a, t, k in edges if k == m and a == alpha}
            out[m, alpha] = oracle.oracle_excitation_matrix(alpha, ref, G.K, G.N, allowed)[0]
    return out


def _check_frame(G, m, pairs, failures, full=None):
    labels = G.labels(m)
    X = {a: _dense(a, G, m) for a in labels}
    cls = classify(G, m)
    refs = [G.basis.unit(r) for r in G.refs]
    for a in labels:
        Xd = deexcitation_matrix(a, G, m)
        if not np.array_equal(Xd, X[a].T):
            failures.append(("adjoint", a))
        if np.any(X[a] @ X[a]) or np.any(Xd @ Xd):
            failures.append(("nilpotent", a))
        if any(np.any(Xd @ r) for r in refs):
            failures.append(("kills references", a))
        if full is not None and cls.consistent and not np.array_equal(X[a], full[a]):
            failures.append(("consistent subgraph", a))
    mats = {a: X[a] for a in labels}
    for a, b in pairs(labels):
        P, Q = X[a] @ X[b], X[b] @ X[a]
        if cls.consistent and not np.array_equal(P, Q):
            failures.append(("commute", a, b))
        Pd, Qd = X[a].T @ X[b].T, X[b].T @ X[a].T
        if cls.consistent and not np.array_equal(Pd, Qd):
            failures.append(("commute adjoint", a, b))
        if cls.transitive and cls.consistent and np.any(P):
            if not any(np.array_equal(P, M) or np.array_equal(P, -M) for M in mats.values()):
                failures.append(("closure", a, b))


def _graphs(K, N):
    ref = ref_of(N)
    specs = [GraphSpec.full(), GraphSpec.truncated(1)]
    if N >= 2:
        specs += [GraphSpec.truncated(2), GraphSpec.truncated(1, 2)]
    if K > N:
        specs.append(GraphSpec("cas", k=min(K, N + 2)))
    out = [(ExcitationGraph(K, N, [ref], s), s) for s in specs]
    states = det.enumerate_states(K, N)
    if len(states) > 2:
        out.append((ExcitationGraph(K, N, [states[0], states[-1]]), GraphSpec.full()))
    return out


def test_criterion_2_operator_algebra():
    failures = []
    checked_signs = 0
    for K in range(2, 6):
        for N in (1, 2):
            if N >= K:
                continue
            for G, spec in _graphs(K, N):
                ranks = spec.ranks if spec.kind == "ranks" else None
                oracle_mats = _oracle_frame_matrices(G, ranks) if spec.kind in ("full", "ranks") else {}
                for m in range(G.M):
                    full = {a: _dense(a, ExcitationGraph(K, N, G.refs, GraphSpec.full()), m) for a in G.labels(m)}
                    _check_frame(G, m, lambda ls: combinations(ls, 2), failures, full)
                    for a in G.labels(m):
                        if (m, a) in oracle_mats:
                            checked_signs += 1
                            if not np.array_equal(_dense(a, G, m), oracle_mats[m, a]):
                                failures.append(("oracle sign", K, N, spec.kind, m, a))
    # randomised on K=6, N=3
    rng = np.random.default_rng(2)
    for G, spec in _graphs(6, 3):
        full = {a: _dense(a, ExcitationGraph(6, 3, G.refs, GraphSpec.full()), 0) for a in G.labels(0)}

        def sample(ls):
            ls = list(ls)
            if len(ls) < 2:
                return []
            return [tuple(ls[i] for i in rng.choice(len(ls), 2, replace=False)) for _ in range(40)]

        _check_frame(G, 0, sample, failures, full)
    G = ExcitationGraph(6, 3, [ref_of(3)])
    oracle_mats = _oracle_frame_matrices(G)
    for a in G.labels():
        checked_signs += 1
        if not np.array_equal(_dense(a, G, 0), oracle_mats[0, a]):
            failures.append(("oracle sign", 6, 3, a))
    report(2, not failures, f"{checked_signs} operator matrices against the oracle, failures {failures[:5]}")


# -- 3 ----------------------------------------------------------------------------


def test_criterion_3_exp_log():
    rng = np.random.default_rng(3)
    G = ExcitationGraph(6, 3, [ref_of(3)])
    worst = 0.0
    for _ in range(100):
        t = Amplitudes.random(G, rng, 1.0)
        worst = max(worst, np.max(np.abs(log_cluster(exp_cluster(t)).values - t.values)))
        c = Amplitudes.random(G, rng, 1.0)
        worst = max(worst, np.max(np.abs(exp_cluster(log_cluster(c)).values - c.values)))
    report(3, worst <= 1e-12, f"max round-trip error {worst:.2e} over 100 + 100 vectors")


# -- 4 ----------------------------------------------------------------------------


def test_criterion_4_bch():
    rng = np.random.default_rng(4)
    G = ExcitationGraph(6, 2, [ref_of(2)])
    rel, fifth = 0.0, 0.0
    for _ in range(10):
        H = Hamiltonian(random_integrals(6, rng), 2)
        t = Amplitudes.random(G, rng)
        psi = rng.standard_normal(G.basis.dim)
        a = similarity_apply(H, t, psi, "bch")
        b = similarity_apply(H, t, psi, "naive")
        rel = max(rel, np.linalg.norm(a - b) / np.linalg.norm(b))
        fifth = max(fifth, np.linalg.norm(bch_term(H, cluster_matrix(t), psi, 5)) / 120)
    report(4, rel <= 1e-10 and fifth <= 1e-13, f"relative BCH error {rel:.2e}, fifth commutator {fifth:.2e}")


# -- 5 and 6 ------------------------------------------------------------------------


def models():
    """(name, Hamiltonian) pairs with K <= 8, N <= 3; odd N carries a small Zeeman field."""
    out = []
    for K in (4, 6, 8):
        out.append((f"pairing K={K} N=2", Hamiltonian(pairing_model(K, g=0.5), 2)))
    out.append(("pairing K=6 N=3", Hamiltonian(pairing_model(6, g=0.4, field=0.1), 3)))
    out.append(("pairing K=8 N=3", Hamiltonian(pairing_model(8, g=0.6, field=0.1), 3)))
    for sites in (2, 3, 4):
        out.append((f"hubbard L={sites} N=2", Hamiltonian(hubbard_chain(sites, U=2.0, basis="mo"), 2)))
    out.append(("hubbard L=3 N=3", Hamiltonian(hubbard_chain(3, U=2.0, basis="mo", field=0.2), 3)))
    out.append(("hubbard L=4 N=3", Hamiltonian(hubbard_chain(4, U=1.0, basis="mo", field=0.2), 3)))
    return out


def test_criterion_5_full_cc_equals_fci():
    lines, ok = [], True
    for name, H in models():
        start = time.perf_counter()
        rep = fcc_fci_comparison(H)
        elapsed = time.perf_counter() - start
        good = (not rep.reference_orthogonal and rep.converged and rep.energy_error <= 1e-9
                and rep.max_vector_diff <= 1e-8 and elapsed < 60)
        ok &= good
        lines.append(f"{name}: dE={rep.energy_error:.1e} dv={rep.max_vector_diff:.1e} {elapsed:.1f}s")
    report(5, ok, "; ".join(lines))


def test_criterion_6_truncation_sanity():
    ok, worst_sd = True, 0.0
    for name, H in models():
        ref = ref_of(H.N)
        e_fci = solve_fci(H)[0][0]
        if H.N == 2:
            sol = solve_cc(CCProblem.build(H, GraphSpec.truncated(1, 2)))
            worst_sd = max(worst_sd, abs(sol.energy - e_fci))
            ok &= sol.converged
        e_sd = solve_ci_projected(H, ExcitationGraph(H.K, H.N, [ref], GraphSpec.truncated(*range(1, min(2, H.N) + 1))))[0]
        e_s = solve_ci_projected(H, ExcitationGraph(H.K, H.N, [ref], GraphSpec.truncated(1)))[0]
        ok &= e_fci <= e_sd + 1e-12 and e_sd <= e_s + 1e-12
    report(6, ok and worst_sd <= 1e-10, f"max |E_CCSD - E_FCI| at N=2 {worst_sd:.1e}; CI chain holds on all models: {ok}")


# -- 7 ----------------------------------------------------------------------------


def test_criterion_7_size_consistency():
    pairs = [
        (pairing_model(4, 0.5), 2, hubbard_chain(2, U=2.0, basis="mo"), 2),
        (pairing_model(6, 0.3), 2, pairing_model(4, 0.7), 2),
        (hubbard_chain(3, U=1.0, basis="mo"), 2, pairing_model(4, 0.5), 2),
    ]
    worst = 0.0
    for a, na, b, nb in pairs:
        ea = solve_cc(CCProblem.build(Hamiltonian(a, na), GraphSpec.truncated(1, 2))).energy
        eb = solve_cc(CCProblem.build(Hamiltonian(b, nb), GraphSpec.truncated(1, 2))).energy
        ref = f(list(range(1, na + 1)) + list(range(a.K + 1, a.K + nb + 1)))
        H = Hamiltonian(direct_sum(a, b), na + nb)
        sol = solve_cc(CCProblem.build(H, GraphSpec.truncated(1, 2), ref))
        worst = max(worst, abs(sol.energy - ea - eb)) if sol.converged else float("inf")
    report(7, worst <= 1e-9, f"max |E_CCSD(A+B) - E_CCSD(A) - E_CCSD(B)| = {worst:.1e} over {len(pairs)} pairs")


# -- 8 ----------------------------------------------------------------------------


def test_criterion_8_jm_mrcc():
    worst_fci, worst_ci, runs = 0.0, 0.0, 0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        H = Hamiltonian(random_integrals(5, rng, 0.1, spacing=1.0), 2)
        p = MRProblem(H, ExcitationGraph(5, 2, [f([1, 2]), f([1, 3])]))
        pairs = solve_fci(H, H.basis.dim)
        spectrum = np.array([e for e, _ in pairs])
        # the two lowest states must have a nonsingular overlap with the model space
        if abs(np.linalg.det(overlap_matrix([v for _, v in pairs[:2]], p))) < 1e-6:
            continue
        jm, ci = solve_jm_mrcc(p), solve_mrci(p)
        if not (jm.converged and ci.converged):
            worst_fci = float("inf")
            continue
        runs += 1
        worst_fci = max(worst_fci, max(np.min(np.abs(spectrum - e)) for e in jm.model.energies))
        worst_ci = max(worst_ci, np.max(np.abs(jm.model.energies - ci.model.energies)))
    ok = runs > 0 and worst_fci <= 1e-8 and worst_ci <= 1e-8
    report(8, ok, f"{runs} systems, JM vs FCI {worst_fci:.1e}, JM vs MRCI {worst_ci:.1e}")


# -- 9 ----------------------------------------------------------------------------


def test_criterion_9_reference_selection():
    rng = np.random.default_rng(9)
    done = mismatch = unverified = 0
    while done < 50:
        K = int(rng.integers(4, 8))
        N = int(rng.integers(1, K // 2 + 1))
        states = det.enumerate_states(K, N)
        J = int(rng.integers(1, 4))
        targets = [states[i] for i in rng.choice(len(states), min(J, len(states)), replace=False)]
        rho = int(rng.integers(1, N + 1))
        costs = {s: Fraction(int(rng.integers(0, 4))) for s in states if rng.random() < 0.3}
        inst = CoverInstance(K, N, targets, rho, costs)
        if len(candidate_set(inst)) > 20:
            continue
        done += 1
        sol = solve_cover(inst)
        best = oracle.oracle_cover(K, N, targets, rho, costs)
        # the oracle does not force zero-cost candidates, so optimal sets may differ by those
        if not sol.optimal or best is None or sol.total_cost != best[0]:
            mismatch += 1
        if not verify_cover(inst, sol.references).passed:
            unverified += 1
        zero = [c for c in candidate_set(inst) if inst.cost(c) == 0]
        if any(z not in sol.references for z in zero):
            mismatch += 1
    # forced inclusion of a zero-cost candidate that is not needed for the cover
    inst = CoverInstance(6, 3, [f([1, 2, 3]), f([1, 2, 4])], 1, {f([1, 3, 5]): 0})
    forced = f([1, 3, 5]) in solve_cover(inst).references
    report(9, mismatch == 0 and unverified == 0 and forced,
           f"50 instances: {mismatch} disagreements with exhaustive search, {unverified} unverified, forced zero-cost {forced}")


# -- 10 ---------------------------------------------------------------------------


def test_criterion_10_quartic_residual():
    rng = np.random.default_rng(10)
    worst = 0.0
    for K, N in [(6, 2), (6, 3), (7, 3)]:
        H = Hamiltonian(random_integrals(K, rng), N)
        p = CCProblem.build(H)
        for _ in range(5):
            t = Amplitudes.random(p.graph, rng)
            lam = np.linspace(-1.0, 1.0, 5)
            samples = np.array([cc_residual(t * float(x), p).values for x in lam])
            coef = np.polyfit(lam, samples, 4)
            for x in (-1.7, -0.3, 0.4, 1.3, 2.0):
                r = cc_residual(t * x, p).values
                pred = np.array([np.polyval(coef[:, j], x) for j in range(len(r))])
                worst = max(worst, np.max(np.abs(pred - r)) / max(1.0, np.max(np.abs(r))))
    report(10, worst <= 1e-10, f"max degree-4 interpolation residual {worst:.1e} on 15 random directions")
