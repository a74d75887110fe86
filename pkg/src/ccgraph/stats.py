"""Combinatorics of the single-reference excitation graph.

Every closed form is paired with a brute-force count on an actual graph, and a
report flags any disagreement instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from . import determinant as det
from .errors import ConfigurationError
from .graph import ExcitationGraph, GraphSpec


# -- closed forms ------------------------------------------------------------


def _c(n: int, k: int) -> int:
    return comb(n, k) if n >= 0 and k >= 0 else 0


def n_vertices(K: int, N: int) -> int:
    return comb(K, N)


def n_vertices_rank(K: int, N: int, r: int) -> int:
    return comb(N, r) * comb(K - N, r)


def n_edges_between(K: int, N: int, r: int, s: int) -> int:
    """Edges from rank ``r`` to rank ``r + s`` in the full graph (``s >= 1``)."""
    if s < 1 or r + s > N:
        return 0
    return _c(K - N, r) * _c(K - N - r, s) * _c(N, s + r) * _c(s + r, r)


def n_edges_total(K: int, N: int) -> int:
    return sum(_c(N, r) * _c(K - N, r) * _c(K - 2 * r, N - r) for r in range(1, N + 1))


def _compositions(r: int, n: int, parts=None):
    """Ordered tuples of ``n`` positive parts summing to ``r`` (parts restricted to ``parts``)."""
    if n == 0:
        if r == 0:
            yield ()
        return
    for first in range(1, r - n + 2):
        if parts is not None and first not in parts:
            continue
        for rest in _compositions(r - first, n - 1, parts):
            yield (first,) + rest


def count_paths(r: int, n: int, truncation=None) -> int:
    """Number of directed paths of length ``n`` from the reference to a rank-``r`` vertex.

    ``truncation`` is ``None`` for the full graph, ``"S"``, ``"SD"`` or an
    iterable of allowed step ranks.
    """
    if n < 1 or r < n:
        return 0
    if truncation == "S":
        return factorial(r) ** 2 if r == n else 0
    if truncation == "SD":
        k = r - n
        if k > n:
            return 0
        return factorial(r) ** 2 * comb(n, k) // 4**k
    parts = None if truncation is None else frozenset(truncation)
    total = 0
    for c in _compositions(r, n, parts):
        m = factorial(r)
        for x in c:
            m //= factorial(x)
        total += m * m
    return total


def predecessor_formula(r: int) -> int:
    """The predecessor-count sum ``sum_{s=1}^{r-1} C(r,s) C(r-1,r-s)``."""
    return sum(comb(r, s) * comb(r - 1, r - s) for s in range(1, r))


def vertex_density(K: int, N: int) -> list[Fraction]:
    total = comb(K, N)
    return [Fraction(comb(N, r) * comb(K - N, r), total) for r in range(N + 1)]


def density_mean(K: int, N: int) -> Fraction:
    return Fraction(N * (K - N), K)


def density_variance(K: int, N: int) -> Fraction:
    if K < 2:
        return Fraction(0)
    return Fraction((K - N) ** 2 * N**2, (K - 1) * K**2)


# -- enumeration -------------------------------------------------------------


def enumerate_paths(G: ExcitationGraph, target: int, n: int, m: int = 0) -> int:
    """Count paths of exactly ``n`` edges from the reference to ``target`` by DFS."""
    succ = _successors(G, m)

    @lru_cache(maxsize=None)
    def walk(v, k):
        if k == 0:
            return 1 if v == target else 0
        return sum(walk(w, k - 1) for w in succ.get(v, ()))

    return walk(G.ref(m), n)


def _successors(G: ExcitationGraph, m: int) -> dict[int, tuple[int, ...]]:
    out: dict[int, list[int]] = {}
    for e in G.edges(m):
        out.setdefault(e.source, []).append(e.target)
    return {k: tuple(v) for k, v in out.items()}


def predecessors(alpha: int, ref: int, K: int, N: int, strict: bool = True) -> list[int]:
    """States ``beta`` with ``beta`` preceding ``alpha``; ``strict`` drops the reference and ``alpha``."""
    out = [b for b in det.enumerate_states(K, N) if det.precedes(b, alpha, ref)]
    if strict:
        out = [b for b in out if b not in (ref, alpha)]
    return out


@dataclass
class PredecessorReport:
    rank: int
    formula: int
    inclusive: int  # includes the reference and alpha itself
    strict: int  # excludes both
    complementary_pairs: int  # unordered {beta, gamma} splitting alpha into two strict predecessors

    def matches(self) -> dict[str, bool]:
        return {
            "inclusive": self.formula == self.inclusive,
            "strict": self.formula == self.strict,
            "complementary_pairs": self.formula == self.complementary_pairs,
        }


def predecessor_count(alpha: int, ref: int, K: int) -> PredecessorReport:
    N = alpha.bit_count()
    r = det.rank(alpha, ref)
    inclusive = predecessors(alpha, ref, K, N, strict=False)
    strict = [b for b in inclusive if b not in (ref, alpha)]
    pairs = 0
    for b in strict:
        lam = det.meet(det.complement(b, K), alpha, ref)
        if det.join(lam, b, ref) == alpha and lam in strict:
            pairs += 1
    return PredecessorReport(r, predecessor_formula(r), len(inclusive), len(strict), pairs // 2)


@dataclass
class StatsReport:
    K: int
    N: int
    rows: list[tuple[str, int | Fraction, int | Fraction]] = field(default_factory=list)

    def add(self, name, closed, enumerated):
        self.rows.append((name, closed, enumerated))

    @property
    def mismatches(self) -> list[str]:
        return [name for name, a, b in self.rows if a != b]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def get(self, name: str):
        for row in self.rows:
            if row[0] == name:
                return row
        raise KeyError(name)

    def to_json(self) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) and x.denominator != 1 else int(x)

        return {
            "K": self.K,
            "N": self.N,
            "rows": [{"quantity": n, "closed_form": num(a), "enumerated": num(b), "match": a == b} for n, a, b in self.rows],
            "mismatches": self.mismatches,
        }

    def table(self) -> str:
        width = max([len(r[0]) for r in self.rows] + [8])
        lines = [f"{'quantity':<{width}}  {'closed':>12}  {'enumerated':>12}  ok"]
        for name, a, b in self.rows:
            lines.append(f"{name:<{width}}  {str(a):>12}  {str(b):>12}  {'yes' if a == b else 'NO'}")
        return "\n".join(lines)


def graph_stats(G: ExcitationGraph, max_path_rank: int | None = None) -> StatsReport:
    """Compare closed-form counts with enumeration on a single-reference full graph.

    The closed forms assume ``2N <= K``; outside that range they are still
    evaluated and any disagreement shows up in ``mismatches``.
    """
    if G.M != 1:
        raise ConfigurationError("graph statistics are defined for a single reference")
    K, N, ref = G.K, G.N, G.ref(0)
    rep = StatsReport(K, N)
    states = G.vertices(0)
    by_rank: dict[int, list[int]] = {}
    for s in states:
        by_rank.setdefault(det.rank(s, ref), []).append(s)

    rep.add("|L|", n_vertices(K, N), len(states))
    for r in range(N + 1):
        rep.add(f"|L({r})|", n_vertices_rank(K, N, r), len(by_rank.get(r, ())))

    layer = {}
    total = 0
    for e in G.edges(0):
        key = (det.rank(e.source, ref), det.rank(e.target, ref))
        layer[key] = layer.get(key, 0) + 1
        total += 1
    for r in range(N + 1):
        for s in range(1, N - r + 1):
            rep.add(f"|E({r},{r + s})|", n_edges_between(K, N, r, s),
                    layer.get((r, r + s), 0))
    inside = sum(v for (a, b), v in layer.items() if a == b)
    rep.add("|E(r,r)|", 0, inside)
    rep.add("|E|", n_edges_total(K, N), total)

    dens = [Fraction(len(by_rank.get(r, ())), len(states)) for r in range(N + 1)]
    mean = sum(r * d for r, d in enumerate(dens))
    var = sum((r - mean) ** 2 * d for r, d in enumerate(dens))
    rep.add("density mean", density_mean(K, N), mean)
    rep.add("density variance", density_variance(K, N), var)

    top = N if max_path_rank is None else min(N, max_path_rank)
    for r in range(1, top + 1):
        if r not in by_rank:
            continue
        gamma = by_rank[r][0]
        for n in range(1, r + 1):
            rep.add(f"p({r},{n})", count_paths(r, n), enumerate_paths(G, gamma, n))
    return rep


def truncated_path_stats(K: int, N: int, ranks, ref: int | None = None) -> StatsReport:
    """Path counts in a rank-truncated graph against the closed forms."""
    ranks = tuple(sorted(set(ranks)))
    ref = det.from_indices(range(1, N + 1)) if ref is None else ref
    # ranks above N carry no edges; drop them so small N stay valid
    G = ExcitationGraph(K, N, [ref], GraphSpec.truncated(*[r for r in ranks if r <= N]))
    rep = StatsReport(K, N)
    name = {(1,): "S", (1, 2): "SD"}.get(ranks)
    tag = name or "".join(map(str, ranks))
    by_rank: dict[int, int] = {}
    for s in G.vertices(0):
        by_rank.setdefault(det.rank(s, ref), s)
    for r in range(1, N + 1):
        for n in range(1, r + 1):
            rep.add(f"p_{tag}({r},{n})", count_paths(r, n, name or ranks), enumerate_paths(G, by_rank[r], n))
    return rep
