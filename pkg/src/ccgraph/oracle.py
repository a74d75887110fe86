"""Brute-force reference implementations used to cross-check the main code.

Nothing here reuses the lattice or sign code of the package: determinants are
manipulated as Python sets and operators as strings of fermionic creation and
annihilation operators acting on Fock-space dictionaries.  Speed is irrelevant.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

import numpy as np


class FockVector(dict):
    """Sparse vector in Fock space: bitstring -> coefficient (any particle number)."""

    def add(self, key, value):
        if value:
            v = self.get(key, 0) + value
            if v:
                self[key] = v
            else:
                self.pop(key, None)

    def scaled(self, c):
        return FockVector({k: c * v for k, v in self.items()})


def vacuum() -> FockVector:
    return FockVector({0: 1})


def create(p: int, v: FockVector) -> FockVector:
    """``a_p^dagger`` with the phase ``(-1)^(number of occupied orbitals below p)``; ``p`` is 1-based."""
    bit = 1 << (p - 1)
    out = FockVector()
    for s, c in v.items():
        if s & bit:
            continue
        sign = -1 if bin(s & (bit - 1)).count("1") % 2 else 1
        out.add(s | bit, sign * c)
    return out


def annihilate(p: int, v: FockVector) -> FockVector:
    bit = 1 << (p - 1)
    out = FockVector()
    for s, c in v.items():
        if not s & bit:
            continue
        sign = -1 if bin(s & (bit - 1)).count("1") % 2 else 1
        out.add(s ^ bit, sign * c)
    return out


def apply_string(ops, v: FockVector) -> FockVector:
    """Apply a product of ``("+", p)`` / ``("-", p)`` factors, rightmost first."""
    for kind, p in reversed(list(ops)):
        v = create(p, v) if kind == "+" else annihilate(p, v)
    return v


def slater(indices) -> FockVector:
    """``a^dagger_{b1} ... a^dagger_{bN} |vac>`` for the listed indices, in the given order."""
    return apply_string([("+", p) for p in indices], vacuum())


def _mask(indices) -> int:
    return sum(1 << (p - 1) for p in indices)


def _indices(mask: int) -> list[int]:
    return [p + 1 for p in range(mask.bit_length()) if mask >> p & 1]


def basis_states(K: int, N: int) -> list[int]:
    return [_mask(c) for c in combinations(range(1, K + 1), N)]


def excitation_string(alpha: int, ref: int):
    """Interleaved string ``a+_{p1} a_{q1} ... a+_{pn} a_{qn}`` with ascending p's (new) and q's (removed)."""
    a, r = set(_indices(alpha)), set(_indices(ref))
    ps = sorted(a - r)
    qs = sorted(r - a)
    ops = []
    for p, q in zip(ps, qs):
        ops += [("+", p), ("-", q)]
    return ops


def _edge_sets(K: int, N: int, ref: int, others=()):
    """Edges of the full graph of ``ref`` via the set-level definition, as {(source, target): label}."""
    r = set(_indices(ref))
    excluded = set(others)
    L = [s for s in basis_states(K, N) if s not in excluded or s == ref]
    out = {}
    for a in L:
        A = set(_indices(a))
        if a == ref:
            continue
        for b in L:
            B = set(_indices(b))
            # occupied parts must together give the whole reference, virtual parts disjoint
            if (A & r) | (B & r) != r or (A - r) & (B - r):
                continue
            T = ((A & r) & (B & r)) | ((A - r) | (B - r))
            t = _mask(T)
            if len(T) == N and t in L and t != b:
                out[(b, t)] = a
    return out


def oracle_enumerate_graph(K: int, N: int, frames, ranks=None):
    """Edge multiset ``(source, label, target, frame)`` by a double loop over states.

    ``ranks`` optionally keeps only labels whose virtual part has one of these sizes.
    """
    edges = []
    for m, ref in enumerate(frames):
        others = [f for f in frames if f != ref]
        r = set(_indices(ref))
        for (b, t), a in _edge_sets(K, N, ref, others).items():
            if ranks is not None and len(set(_indices(a)) - r) not in ranks:
                continue
            edges.append((b, a, t, m))
    return sorted(edges)


def oracle_excitation_matrix(alpha: int, ref: int, K: int, N: int, edges=None, normalize=True):
    """Dense matrix of the excitation string restricted to graph edges labelled ``alpha``.

    ``edges`` is a set of allowed ``(source, target)`` pairs (default: the full
    single-reference graph).  With ``normalize`` the string is divided by its
    phase on the reference, which is returned as well.
    """
    states = basis_states(K, N)
    idx = {s: i for i, s in enumerate(states)}
    if edges is None:
        edges = set(_edge_sets(K, N, ref))
    ops = excitation_string(alpha, ref)
    eps = apply_string(ops, FockVector({ref: 1})).get(alpha, 0)
    if normalize and eps == 0:
        raise ValueError("excitation string does not map the reference onto alpha")
    scale = eps if normalize else 1
    X = np.zeros((len(states), len(states)))
    for j, b in enumerate(states):
        for t, c in apply_string(ops, FockVector({b: 1})).items():
            if (b, t) in edges:
                X[idx[t], j] = c / scale
    return X, eps


def oracle_sign(alpha: int, beta: int, ref: int) -> int:
    """Phase of the normalised excitation string on ``beta`` (0 when the result vanishes)."""
    ops = excitation_string(alpha, ref)
    eps = apply_string(ops, FockVector({ref: 1})).get(alpha, 0)
    out = apply_string(ops, FockVector({beta: 1}))
    if not out:
        return 0
    (_, c), = out.items()
    return int(c * eps)


def oracle_H_matrix(integrals, N: int) -> np.ndarray:
    """``e_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q`` on the N-particle basis."""
    K = integrals.K
    h, g = np.asarray(integrals.h), np.asarray(integrals.g)
    states = basis_states(K, N)
    idx = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)))
    rng = range(1, K + 1)
    for j, s in enumerate(states):
        v = FockVector({s: 1.0})
        H[j, j] += integrals.e_core
        for p, q in product(rng, rng):
            if h[p - 1, q - 1]:
                for t, c in apply_string([("+", p), ("-", q)], v).items():
                    H[idx[t], j] += h[p - 1, q - 1] * c
        for p, q, r, u in product(rng, rng, rng, rng):
            val = g[p - 1, q - 1, r - 1, u - 1]
            if val:
                for t, c in apply_string([("+", p), ("+", r), ("-", u), ("-", q)], v).items():
                    H[idx[t], j] += 0.5 * val * c
    return H


def oracle_count_paths(edges, source: int, target: int, n: int) -> int:
    """Paths of exactly ``n`` edges by plain depth-first search."""
    succ = {}
    for b, _, t, _ in edges:
        succ.setdefault(b, []).append(t)

    def dfs(v, k):
        if k == 0:
            return int(v == target)
        return sum(dfs(w, k - 1) for w in succ.get(v, ()))

    return dfs(source, n)


def oracle_cover(K: int, N: int, targets, rho: int, costs=None):
    """Minimum-cost cover by exhaustive enumeration of candidate subsets.

    Subsets are scanned by size; sizes whose cheapest possible total already
    exceeds the best cost found are skipped, so the result is still exact.
    Returns ``(cost, chosen)`` or ``None`` if nothing covers.  Among optimal
    subsets ``chosen`` minimises the summed target-to-nearest-reference
    distance, then the candidate positions lexicographically.
    """
    def dist(a, b):
        return len(set(_indices(a)) ^ set(_indices(b)))

    costs = costs or {}
    cands = [
        s for s in basis_states(K, N)
        if any(dist(s, g) <= 2 * rho for g in targets) and costs.get(s, 1) is not None
    ]
    cost = [Fraction(costs.get(c, 1)) for c in cands]
    covers = [{j for j, g in enumerate(targets) if dist(c, g) <= 2 * rho} for c in cands]
    need = set(range(len(targets)))
    cheapest = sorted(cost)
    best = None
    for k in range(len(cands) + 1):
        if best is not None and sum(cheapest[:k], Fraction(0)) > best[0]:
            break
        for chosen in combinations(range(len(cands)), k):
            if not need <= set().union(*(covers[i] for i in chosen)):
                continue
            spread = sum(min(dist(cands[i], g) for i in chosen) for g in targets) if chosen else 0
            key = (sum((cost[i] for i in chosen), Fraction(0)), spread, chosen)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return best[0], [cands[i] for i in best[2]]
