"""Excitation graphs: full, rank-truncated, CAS and internal-space subgraphs,
plus the multireference multigraph obtained by overlaying one graph per reference.

Edges are never stored one by one.  A graph keeps, per reference, the set of
labels it admits; the edges carrying a label (its *orbit*) are generated on
demand.  Subgraphs given by an explicit edge list are also supported so that
inconsistent subgraphs can be represented and classified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import determinant as det
from .determinant import DeterminantBasis
from .errors import ConfigurationError

KINDS = ("full", "ranks", "cas", "internal")


@dataclass(frozen=True)
class GraphSpec:
    """Which labels a per-reference excitation graph keeps.

    ``R`` and ``S`` are 1-based orbital indices (internal space of an
    ``internal`` graph); ``k`` is the CAS size of a ``cas`` graph.
    """

    kind: str = "full"
    ranks: tuple[int, ...] = ()
    k: int | None = None
    R: tuple[int, ...] = ()
    S: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "ranks" and not self.ranks:
            raise ConfigurationError("a 'ranks' graph needs a non-empty list of ranks")
        if self.kind == "cas" and self.k is None:
            raise ConfigurationError("a 'cas' graph needs k")

    @classmethod
    def full(cls) -> GraphSpec:
        return cls("full")

    @classmethod
    def truncated(cls, *ranks: int) -> GraphSpec:
        return cls("ranks", ranks=tuple(sorted(set(int(r) for r in ranks))))

    @classmethod
    def from_json(cls, doc: str | Mapping) -> GraphSpec:
        """Parse ``{"kind":"ranks","ranks":[1,2]}`` and friends."""
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"graph spec is not valid JSON: {exc}") from None
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise ConfigurationError("graph spec must be an object with a 'kind' field")
        kind = doc["kind"]
        try:
            if kind == "full":
                return cls.full()
            if kind == "ranks":
                return cls.truncated(*doc["ranks"])
            if kind == "cas":
                return cls("cas", k=int(doc["k"]))
            if kind == "internal":
                return cls("internal", R=tuple(int(x) for x in doc["R"]), S=tuple(int(x) for x in doc["S"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed graph spec {doc!r}: {exc}") from None
        raise ConfigurationError(f"unknown graph kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "ranks":
            return {"kind": "ranks", "ranks": list(self.ranks)}
        if self.kind == "cas":
            return {"kind": "cas", "k": self.k}
        if self.kind == "internal":
            return {"kind": "internal", "R": list(self.R), "S": list(self.S)}
        return {"kind": "full"}

    def validate(self, K: int, N: int, ref: int) -> None:
        if self.kind == "ranks":
            bad = [r for r in self.ranks if not 1 <= r <= max(N, 1)]
            if bad or (N == 0 and self.ranks):
                raise ConfigurationError(f"ranks {bad or list(self.ranks)} outside 1..{N}")
        elif self.kind == "cas":
            if not N <= self.k <= K:
                raise ConfigurationError(f"CAS size k={self.k} must satisfy N <= k <= K ({N}..{K})")
        elif self.kind == "internal":
            r_mask = det.from_indices(self.R, K)
            s_mask = det.from_indices(self.S, K)
            if r_mask & ~ref:
                raise ConfigurationError("internal space R must consist of reference (occupied) orbitals")
            if s_mask & ref:
                raise ConfigurationError("internal space S must consist of virtual orbitals")

    def label_filter(self, K: int, N: int, ref: int):
        """Predicate on labels ``alpha`` (relative to ``ref``) admitted by this spec."""
        self.validate(K, N, ref)
        if self.kind == "full":
            return lambda alpha: True
        if self.kind == "ranks":
            allowed = frozenset(self.ranks)
            return lambda alpha: det.rank(alpha, ref) in allowed
        if self.kind == "cas":
            virt = [p for p in range(K) if not ref >> p & 1][: self.k - N]
            cas_virt = sum(1 << p for p in virt)
            return lambda alpha: (alpha & ~ref & ~cas_virt) == 0
        r_mask = det.from_indices(self.R, K)
        s_mask = det.from_indices(self.S, K)
        return lambda alpha: (ref & ~alpha & ~r_mask) == 0 and (alpha & ~ref & ~s_mask) == 0


@dataclass(frozen=True)
class Edge:
    source: int
    label: int
    target: int
    ref_index: int  # 0-based frame index


@dataclass
class OrbitTable:
    """All edges of one frame as flat arrays over basis positions."""

    src: np.ndarray
    dst: np.ndarray
    sign: np.ndarray
    label_pos: np.ndarray  # position of the edge label in ``labels``
    labels: tuple[int, ...]


@dataclass(frozen=True)
class GraphClass:
    consistent: bool
    transitive: bool
    excitation_complete: bool


@dataclass
class _Frame:
    ref: int
    spec: GraphSpec | None
    labels: tuple[int, ...]
    explicit: frozenset | None = None  # explicit (source, target) pairs
    _orbits: dict = field(default_factory=dict)


def _label_key(ref: int):
    return lambda a: (det.rank(a, ref), det.to_indices(a))


class ExcitationGraph:
    """Single- or multi-reference excitation (multi)graph on N-particle states.

    Parameters
    ----------
    K, N : int
        Number of orbitals and of particles.
    refs : sequence of int
        Reference determinants (bit masks), pairwise distinct.
    spec : GraphSpec or sequence of GraphSpec
        Label selection, shared by all references or given per reference.
    """

    def __init__(self, K: int, N: int, refs: Sequence[int], spec: GraphSpec | Sequence[GraphSpec] = GraphSpec()):
        det.check_norb(K)
        if not 0 <= N <= K:
            raise ConfigurationError(f"need 0 <= N <= K, got N={N}, K={K}")
        refs = tuple(int(r) for r in refs)
        if not refs:
            raise ConfigurationError("at least one reference determinant is required")
        for r in refs:
            if r.bit_count() != N or r >> K:
                raise ConfigurationError(f"reference {det.format_det(r)} is not an {N}-subset of 1..{K}")
        if len(set(refs)) != len(refs):
            raise ConfigurationError("reference determinants must be pairwise distinct")
        specs = [spec] * len(refs) if isinstance(spec, GraphSpec) else list(spec)
        if len(specs) != len(refs):
            raise ConfigurationError("need one graph spec per reference")
        self.K, self.N = K, N
        self.refs = refs
        self.basis = DeterminantBasis(K, N)
        self._frames: list[_Frame] = []
        for ref, sp in zip(refs, specs):
            keep = sp.label_filter(K, N, ref)
            others = set(refs) - {ref}
            labels = [a for a in self.basis.states if a != ref and a not in others and keep(a)]
            labels.sort(key=_label_key(ref))
            self._frames.append(_Frame(ref, sp, tuple(labels)))

    @classmethod
    def from_edges(cls, K: int, N: int, refs: Sequence[int], edges: Mapping[int, Sequence[tuple[int, int]]]) -> ExcitationGraph:
        """Subgraph given by explicit ``(source, target)`` pairs per frame index.

        Every pair must be an edge of the full graph of its frame.
        """
        g = cls(K, N, refs)
        for m, pairs in edges.items():
            fr = g._frames[m]
            pairs = frozenset((int(s), int(t)) for s, t in pairs)
            labels = set()
            for s, t in pairs:
                if not g.is_full_edge(s, t, m):
                    raise ConfigurationError(
                        f"({det.format_det(s)}, {det.format_det(t)}) is not an edge of the full graph"
                    )
                labels.add(det.meet(det.complement(s, K), t, fr.ref))
            fr.labels = tuple(sorted(labels, key=_label_key(fr.ref)))
            fr.spec = None
            fr.explicit = pairs
            fr._orbits.clear()
        return g

    # -- basic structure ---------------------------------------------------

    @property
    def M(self) -> int:
        return len(self.refs)

    def ref(self, m: int = 0) -> int:
        return self._frames[m].ref

    def spec(self, m: int = 0) -> GraphSpec | None:
        return self._frames[m].spec

    def in_frame(self, state: int, m: int) -> bool:
        """Whether ``state`` is a vertex of the frame ``m`` lattice (not another reference)."""
        return state not in self.refs or state == self._frames[m].ref

    def vertices(self, m: int | None = None) -> list[int]:
        if m is None:
            return list(self.basis.states)
        return [s for s in self.basis.states if self.in_frame(s, m)]

    def labels(self, m: int = 0) -> tuple[int, ...]:
        """The excitation set of frame ``m``: every label carried by at least one edge."""
        return self._frames[m].labels

    excitation_set = labels

    @cached_property
    def _label_index(self) -> list[dict[int, int]]:
        return [{a: i for i, a in enumerate(fr.labels)} for fr in self._frames]

    def label_index(self, m: int = 0) -> dict[int, int]:
        return self._label_index[m]

    def is_full_edge(self, source: int, target: int, m: int) -> bool:
        ref = self._frames[m].ref
        if source == target or not (self.in_frame(source, m) and self.in_frame(target, m)):
            return False
        if source not in self.basis or target not in self.basis:
            return False
        return det.precedes(source, target, ref)

    def has_edge(self, source: int, target: int, m: int = 0) -> bool:
        if not self.is_full_edge(source, target, m):
            return False
        fr = self._frames[m]
        if fr.explicit is not None:
            return (source, target) in fr.explicit
        label = det.meet(det.complement(source, self.K), target, fr.ref)
        return label in self._label_index[m]

    def orbit(self, alpha: int, m: int = 0) -> list[tuple[int, int]]:
        """Edges ``(beta, join(alpha, beta))`` of frame ``m`` labelled ``alpha``."""
        fr = self._frames[m]
        hit = fr._orbits.get(alpha)
        if hit is None:
            hit = [
                (b, t)
                for b, t in self._full_orbit(alpha, m)
                if fr.explicit is None or (b, t) in fr.explicit
            ]
            fr._orbits[alpha] = hit
        return hit

    def _full_orbit(self, alpha: int, m: int) -> list[tuple[int, int]]:
        ref = self._frames[m].ref
        if alpha == ref or not self.in_frame(alpha, m):
            return []
        out = []
        for b in self.basis.states:
            if not self.in_frame(b, m) or not det.is_edge_pair(alpha, b, ref):
                continue
            t = det.join(alpha, b, ref)
            if t != b and self.in_frame(t, m):
                out.append((b, t))
        return out

    def edges(self, m: int | None = None) -> Iterator[Edge]:
        frames = range(self.M) if m is None else [m]
        for k in frames:
            for a in self._frames[k].labels:
                for b, t in self.orbit(a, k):
                    yield Edge(b, a, t, k)

    def n_edges(self, m: int | None = None) -> int:
        frames = range(self.M) if m is None else [m]
        return sum(len(self.orbit(a, k)) for k in frames for a in self._frames[k].labels)

    @cached_property
    def _tables(self) -> list[OrbitTable]:
        out = []
        idx = self.basis.index
        for k, fr in enumerate(self._frames):
            src, dst, sgn, lab = [], [], [], []
            for pos, a in enumerate(fr.labels):
                for b, t in self.orbit(a, k):
                    src.append(idx[b])
                    dst.append(idx[t])
                    sgn.append(det.sign_sigma(a, b, fr.ref))
                    lab.append(pos)
            out.append(
                OrbitTable(
                    np.asarray(src, dtype=np.intp),
                    np.asarray(dst, dtype=np.intp),
                    np.asarray(sgn, dtype=np.float64),
                    np.asarray(lab, dtype=np.intp),
                    fr.labels,
                )
            )
        return out

    def table(self, m: int = 0) -> OrbitTable:
        return self._tables[m]

    def single_reference(self, m: int) -> ExcitationGraph:
        """The frame ``m`` graph on its own (other references become ordinary states)."""
        fr = self._frames[m]
        if fr.explicit is not None:
            return ExcitationGraph.from_edges(self.K, self.N, [fr.ref], {0: fr.explicit})
        return ExcitationGraph(self.K, self.N, [fr.ref], fr.spec)

    def __repr__(self) -> str:
        refs = ", ".join(det.format_det(r) for r in self.refs)
        kinds = ", ".join(fr.spec.kind if fr.spec else "custom" for fr in self._frames)
        return f"ExcitationGraph(K={self.K}, N={self.N}, refs=[{refs}], kind=[{kinds}])"


def build_graph(K: int, N: int, refs: Sequence[int], spec: GraphSpec | Sequence[GraphSpec] | None = None) -> ExcitationGraph:
    return ExcitationGraph(K, N, refs, GraphSpec.full() if spec is None else spec)


def classify(G: ExcitationGraph, m: int = 0) -> GraphClass:
    """Consistency, transitivity and excitation completeness of frame ``m``."""
    ref = G.ref(m)
    labels = G.labels(m)
    label_set = set(labels)

    consistent = all(
        len(G.orbit(a, m)) == len(G._full_orbit(a, m)) for a in labels
    )

    succ: dict[int, list[int]] = {}
    for e in G.edges(m):
        succ.setdefault(e.source, []).append(e.target)
    transitive = all(
        G.has_edge(u, w, m)
        for u, vs in succ.items()
        for v in vs
        for w in succ.get(v, ())
    )

    complete = True
    for beta in labels:
        for alpha in labels:
            if alpha == beta:
                continue
            lam = det.meet(det.complement(alpha, G.K), beta, ref)
            if lam == ref or lam in label_set or lam not in G.basis:
                continue
            if det.join(alpha, lam, ref) == beta and G.has_edge(lam, beta, m):
                complete = False
                break
        if not complete:
            break
    return GraphClass(consistent, transitive, complete)


def is_weakly_connected(G: ExcitationGraph, m: int = 0) -> bool:
    verts = G.vertices(m)
    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in G.edges(m):
        parent[find(e.source)] = find(e.target)
    return len({find(v) for v in verts}) <= 1


def reachable_from_reference(G: ExcitationGraph, m: int = 0) -> set[int]:
    succ: dict[int, list[int]] = {}
    for e in G.edges(m):
        succ.setdefault(e.source, []).append(e.target)
    seen = {G.ref(m)}
    stack = [G.ref(m)]
    while stack:
        for w in succ.get(stack.pop(), ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


_DOT_COLORS = ("red", "blue", "darkgreen", "orange", "purple", "brown", "black")


def to_dot(G: ExcitationGraph, name: str = "excitation_graph") -> str:
    """DOT text of the (multi)graph: vertices are index lists, edge colour marks the reference."""
    lines = [f"digraph {name} {{"]
    for v in G.vertices():
        attrs = ' shape=box' if v in G.refs else ''
        lines.append(f'  "{det.format_det(v)}" [label="{det.format_det(v)}"{attrs}];')
    for e in G.edges():
        color = _DOT_COLORS[e.ref_index % len(_DOT_COLORS)]
        lines.append(
            f'  "{det.format_det(e.source)}" -> "{det.format_det(e.target)}"'
            f' [color={color}, label="{det.format_det(e.label)}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
