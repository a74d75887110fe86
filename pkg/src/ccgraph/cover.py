"""Choosing reference determinants as a minimum-cost cover in Hamming space.

A reference ``0_m`` reaches a target ``gamma`` by an excitation of rank at most
``rho`` exactly when ``d_H(0_m, gamma) <= 2 rho``.  Candidates are the states
within that distance of some target; the cheapest covering subset is found by
a small exact branch and bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, log2, sqrt
from typing import Mapping, Sequence

from . import determinant as det
from .errors import ConfigurationError

DEFAULT_NODE_CAP = 10**6


@dataclass
class CoverInstance:
    K: int
    N: int
    targets: list[int]
    rho: int
    costs: Mapping[int, object] = field(default_factory=dict)  # missing -> 1, None or inf -> excluded

    def __post_init__(self):
        det.check_norb(self.K)
        if not 0 <= self.N <= self.K:
            raise ConfigurationError(f"need 0 <= N <= K, got N={self.N}, K={self.K}")
        if self.rho < 1 or self.rho > max(self.N, 1):
            raise ConfigurationError(f"rank truncation rho={self.rho} must lie in 1..N")
        for g in self.targets:
            if g.bit_count() != self.N or g >> self.K:
                raise ConfigurationError(f"target {det.format_det(g)} is not an {self.N}-subset of 1..{self.K}")
        self.targets = list(dict.fromkeys(self.targets))

    def cost(self, alpha: int) -> Fraction | None:
        c = self.costs.get(alpha, 1)
        if c is None or (isinstance(c, float) and c == float("inf")) or c == "inf":
            return None
        c = Fraction(c)
        if c < 0:
            raise ConfigurationError(f"negative cost for {det.format_det(alpha)}")
        return c


@dataclass
class CoverSolution:
    references: list[int]
    total_cost: Fraction
    optimal: bool
    certificate: dict

    def to_json(self) -> dict:
        return {
            "references": [det.to_indices(r) for r in self.references],
            "total_cost": str(self.total_cost),
            "optimal": self.optimal,
            "certificate": self.certificate,
        }


def ball_states(center: int, radius: int, K: int) -> list[int]:
    """States with the same particle number within Hamming distance ``radius``."""
    occ = det.to_indices(center)
    vir = [p for p in range(1, K + 1) if p not in occ]
    out = []
    for d in range(radius // 2 + 1):
        for rem in combinations(occ, d):
            base = center & ~det.from_indices(rem)
            for add in combinations(vir, d):
                out.append(base | det.from_indices(add))
    return out


def candidate_set(inst: CoverInstance) -> list[int]:
    """All N-subsets within distance ``2 rho`` of some target, in lexicographic order."""
    cands = set()
    for g in inst.targets:
        cands.update(ball_states(g, 2 * inst.rho, inst.K))
    return sorted(cands, key=det.to_indices)


def _spread(chosen, cands, targets) -> int:
    """Sum over targets of the distance to the nearest chosen reference."""
    return sum(min(det.hamming_distance(cands[i], g) for i in chosen) for g in targets)


def _greedy(cover, cost, need, forced):
    chosen = list(forced)
    covered = 0
    for i in forced:
        covered |= cover[i]
    while covered != need:
        best, key = None, None
        for i, c in enumerate(cover):
            gain = (c & ~covered).bit_count()
            if gain and i not in chosen:
                k = (cost[i] / gain, i)
                if key is None or k < key:
                    best, key = i, k
        chosen.append(best)
        covered |= cover[best]
    return sum((cost[i] for i in chosen), Fraction(0)), tuple(sorted(chosen))


def solve_cover(inst: CoverInstance, node_cap: int = DEFAULT_NODE_CAP) -> CoverSolution:
    """Exact minimum-cost cover by branch and bound.

    Candidates of cost zero are always taken.  Ties between optimal covers
    go to the smallest total distance from the targets to their nearest
    reference, then to the lexicographically smallest candidate index set.
    """
    all_cands = candidate_set(inst)
    cands, cost = [], []
    for c in all_cands:
        w = inst.cost(c)
        if w is not None:
            cands.append(c)
            cost.append(w)
    J = len(inst.targets)
    need = (1 << J) - 1
    cover = []
    for c in cands:
        bits = 0
        for j, g in enumerate(inst.targets):
            if det.hamming_distance(c, g) <= 2 * inst.rho:
                bits |= 1 << j
        cover.append(bits)
    covering = [[i for i in range(len(cands)) if cover[i] >> j & 1] for j in range(J)]
    for j, lst in enumerate(covering):
        if not lst:
            raise ConfigurationError(f"target {det.format_det(inst.targets[j])} cannot be covered by any allowed candidate")

    forced = tuple(i for i in range(len(cands)) if cost[i] == 0)
    best_cost, best_set = _greedy(cover, cost, need, forced)
    best_spread = _spread(best_set, cands, inst.targets)
    greedy_cost = best_cost
    nodes = 0
    capped = False

    def lower_bound(covered, banned):
        lb = Fraction(0)
        used = 0
        for j in range(J):
            if covered >> j & 1:
                continue
            avail = [i for i in covering[j] if not banned >> i & 1]
            if not avail:
                return None
            mask = 0
            for i in avail:
                mask |= 1 << i
            if mask & used:
                continue
            used |= mask
            lb += min(cost[i] for i in avail)
        return lb

    def search(chosen, covered, total, banned):
        nonlocal best_cost, best_spread, best_set, nodes, capped
        nodes += 1
        if nodes > node_cap:
            capped = True
            return
        if covered == need:
            chosen = tuple(sorted(chosen))
            key = (total, _spread(chosen, cands, inst.targets), chosen)
            if key < (best_cost, best_spread, best_set):
                best_cost, best_spread, best_set = key
            return
        lb = lower_bound(covered, banned)
        if lb is None or total + lb > best_cost:
            return
        # branch on the uncovered target with the fewest remaining options
        j = min(
            (j for j in range(J) if not covered >> j & 1),
            key=lambda j: (sum(1 for i in covering[j] if not banned >> i & 1), j),
        )
        options = sorted((i for i in covering[j] if not banned >> i & 1), key=lambda i: (cost[i], i))
        for i in options:
            search(chosen + [i], covered | cover[i], total + cost[i], banned)
            if capped:
                return
            banned |= 1 << i

    start_cov = 0
    for i in forced:
        start_cov |= cover[i]
    search(list(forced), start_cov, sum((cost[i] for i in forced), Fraction(0)), 0)

    certificate = {
        "candidates": len(all_cands),
        "allowed_candidates": len(cands),
        "nodes": nodes,
        "node_cap": node_cap,
        "greedy_cost": str(greedy_cost),
        "forced_zero_cost": [det.to_indices(cands[i]) for i in forced],
    }
    return CoverSolution([cands[i] for i in best_set], best_cost, not capped, certificate)


@dataclass
class CoverReport:
    passed: bool
    nearest: list[tuple[int, int | None, int | None]]  # (target, nearest reference, rank distance)


def verify_cover(inst: CoverInstance, references: Sequence[int]) -> CoverReport:
    rows = []
    ok = True
    for g in inst.targets:
        if not references:
            rows.append((g, None, None))
            ok = False
            continue
        ref = min(references, key=lambda r: (det.hamming_distance(r, g), det.to_indices(r)))
        d = det.hamming_distance(ref, g)
        rows.append((g, ref, d // 2))
        ok &= d <= 2 * inst.rho
    return CoverReport(ok, rows)


def _binary_entropy(x: float) -> float:
    return -x * log2(x) - (1 - x) * log2(1 - x)


def size_estimate(inst: CoverInstance, n: int | None = None) -> dict:
    """Candidate fraction ``n/|S|`` next to its ball-volume and entropy bounds."""
    K, N, J = inst.K, inst.N, len(inst.targets)
    n = len(candidate_set(inst)) if n is None else n
    S = comb(K, N)

    def vol(r):
        return sum(comb(K, i) for i in range(min(r, K) + 1))

    out = {"n": n, "|S|": S, "ratio": n / S, "ball_bound": J * vol(2 * inst.rho) / vol(N)}
    lam, lam2 = 2 * inst.rho / K, N / K
    if 0 < lam < 0.5 and 0 < lam2 < 0.5:
        out["entropy_bound"] = J * sqrt(8 * K * lam2 * (1 - lam2)) * 2 ** (-K * (_binary_entropy(lam2) - _binary_entropy(lam)))
    return out
