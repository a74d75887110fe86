"""Excitation and de-excitation operators, cluster operators and the
exponential/logarithm map between cluster amplitudes and CI coefficients.

Wavefunctions are dense numpy vectors (or column blocks) over the graph's
:class:`~ccgraph.determinant.DeterminantBasis`.  Single operators are applied
straight from their definitions; cluster operators are assembled as scipy
sparse matrices from the per-label orbit tables of the graph.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
import scipy.sparse as sp

from . import determinant as det
from .errors import ConfigurationError, NotExcitationCompleteError, UnknownExcitationError
from .graph import ExcitationGraph, classify


class Amplitudes:
    """Real coefficients ``t_alpha`` indexed by the excitation set of one frame.

    Values are stored as a numpy vector ordered like ``graph.labels(m)``
    (by rank, then by index list).
    """

    def __init__(self, graph: ExcitationGraph, values=None, m: int = 0):
        self.graph = graph
        self.m = m
        self.labels = graph.labels(m)
        if values is None:
            values = np.zeros(len(self.labels))
        values = np.array(values, dtype=float).reshape(-1)
        if values.shape != (len(self.labels),):
            raise ConfigurationError(f"expected {len(self.labels)} amplitudes, got {values.shape[0]}")
        self.values = values

    @classmethod
    def zeros(cls, graph: ExcitationGraph, m: int = 0) -> Amplitudes:
        return cls(graph, None, m)

    @classmethod
    def random(cls, graph: ExcitationGraph, rng, scale: float = 1.0, m: int = 0) -> Amplitudes:
        n = len(graph.labels(m))
        return cls(graph, rng.uniform(-scale, scale, n), m)

    @classmethod
    def from_dict(cls, graph: ExcitationGraph, coeffs: Mapping[int, float], m: int = 0) -> Amplitudes:
        out = cls(graph, None, m)
        for alpha, v in coeffs.items():
            out[alpha] = v
        return out

    @classmethod
    def from_json(cls, graph: ExcitationGraph, doc: Mapping) -> Amplitudes:
        """Read ``{"ref": 1, "t": [{"alpha": [1, 4], "value": -0.03}, ...]}``."""
        try:
            m = int(doc.get("ref", 1)) - 1
            items = [(det.from_indices(e["alpha"], graph.K), float(e["value"])) for e in doc["t"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed amplitude document: {exc}") from None
        if not 0 <= m < graph.M:
            raise ConfigurationError(f"reference index {m + 1} out of range 1..{graph.M}")
        return cls.from_dict(graph, dict(items), m)

    def to_json(self, tol: float = 0.0) -> dict:
        return {
            "ref": self.m + 1,
            "t": [
                {"alpha": det.to_indices(a), "value": float(v)}
                for a, v in zip(self.labels, self.values)
                if abs(v) > tol
            ],
        }

    def to_dict(self) -> dict[int, float]:
        return {a: float(v) for a, v in zip(self.labels, self.values)}

    def _pos(self, alpha: int) -> int:
        try:
            return self.graph.label_index(self.m)[alpha]
        except KeyError:
            raise UnknownExcitationError(f"{det.format_det(alpha)} is not an excitation of this graph") from None

    def __getitem__(self, alpha: int) -> float:
        return float(self.values[self._pos(alpha)])

    def __setitem__(self, alpha: int, value: float):
        self.values[self._pos(alpha)] = value

    def __len__(self) -> int:
        return len(self.labels)

    def copy(self) -> Amplitudes:
        return Amplitudes(self.graph, self.values.copy(), self.m)

    def _like(self, values) -> Amplitudes:
        return Amplitudes(self.graph, values, self.m)

    def _check(self, other):
        if other.graph is not self.graph or other.m != self.m:
            raise ConfigurationError("amplitudes belong to different graphs or frames")

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, c):
        return self._like(c * self.values)

    __rmul__ = __mul__

    def norm(self, weights=None) -> float:
        """Euclidean norm, or the weighted one ``sqrt(sum w_alpha t_alpha^2)`` for reporting."""
        if weights is None:
            return float(np.linalg.norm(self.values))
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise ConfigurationError("norm weights must be positive")
        return float(np.sqrt(np.sum(w * self.values**2)))

    def ranks(self) -> np.ndarray:
        ref = self.graph.ref(self.m)
        return np.array([det.rank(a, ref) for a in self.labels], dtype=int)

    def rank_part(self, r: int) -> Amplitudes:
        return self._like(np.where(self.ranks() == r, self.values, 0.0))

    def __repr__(self) -> str:
        return f"Amplitudes(n={len(self)}, ref={det.format_det(self.graph.ref(self.m))}, norm={self.norm():.3g})"


def _as_vector(G: ExcitationGraph, psi) -> np.ndarray:
    if isinstance(psi, Mapping):
        return G.basis.from_dict(psi)
    psi = np.asarray(psi, dtype=float)
    if psi.shape[0] != G.basis.dim:
        raise ConfigurationError(f"wavefunction has length {psi.shape[0]}, basis dimension is {G.basis.dim}")
    return psi


def _check_label(G: ExcitationGraph, alpha: int, m: int):
    if alpha not in G.label_index(m):
        raise UnknownExcitationError(f"{det.format_det(alpha)} is not an excitation of frame {m + 1}")


# -- single operators --------------------------------------------------------


def apply_excitation(alpha: int, psi, G: ExcitationGraph, m: int = 0) -> np.ndarray:
    """``X_alpha psi``: each ``Phi_beta`` goes to ``sigma(alpha, beta) Phi_{alpha v beta}`` along an edge."""
    _check_label(G, alpha, m)
    psi = _as_vector(G, psi)
    out = np.zeros_like(psi)
    ref, idx = G.ref(m), G.basis.index
    for beta, gamma in G.orbit(alpha, m):
        out[idx[gamma]] += det.sign_sigma(alpha, beta, ref) * psi[idx[beta]]
    return out


def apply_deexcitation(alpha: int, psi, G: ExcitationGraph, m: int = 0) -> np.ndarray:
    """``X_alpha^dagger psi``: ``Phi_beta`` goes to ``sigma(alpha, lam) Phi_lam`` with ``lam = alpha^perp ^ beta``."""
    _check_label(G, alpha, m)
    psi = _as_vector(G, psi)
    out = np.zeros_like(psi)
    ref, idx = G.ref(m), G.basis.index
    comp = det.complement(alpha, G.K)
    for beta in G.vertices(m):
        c = psi[idx[beta]]
        if not np.any(c):
            continue
        lam = det.meet(comp, beta, ref)
        if lam in idx and det.join(alpha, lam, ref) == beta and G.has_edge(lam, beta, m):
            out[idx[lam]] += det.sign_sigma(alpha, lam, ref) * c
    return out


def excitation_matrix(alpha: int, G: ExcitationGraph, m: int = 0) -> sp.csr_matrix:
    _check_label(G, alpha, m)
    idx, ref = G.basis.index, G.ref(m)
    rows, cols, vals = [], [], []
    for beta, gamma in G.orbit(alpha, m):
        rows.append(idx[gamma])
        cols.append(idx[beta])
        vals.append(det.sign_sigma(alpha, beta, ref))
    n = G.basis.dim
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


# -- cluster operators -------------------------------------------------------


def cluster_matrix(t: Amplitudes) -> sp.csr_matrix:
    """Sparse matrix of ``T = sum_alpha t_alpha X_alpha``."""
    tab = t.graph.table(t.m)
    n = t.graph.basis.dim
    vals = tab.sign * t.values[tab.label_pos]
    return sp.csr_matrix((vals, (tab.dst, tab.src)), shape=(n, n))


def apply_cluster(t: Amplitudes, psi) -> np.ndarray:
    return cluster_matrix(t) @ _as_vector(t.graph, psi)


def apply_cluster_adjoint(t: Amplitudes, psi) -> np.ndarray:
    return cluster_matrix(t).T @ _as_vector(t.graph, psi)


def _exp_series(T, psi, N: int, sign: float = 1.0) -> np.ndarray:
    out = psi.copy()
    term = psi
    for k in range(1, N + 1):
        term = (sign / k) * (T @ term)
        if not np.any(term):
            break
        out = out + term
    return out


def exp_apply(t: Amplitudes, psi) -> np.ndarray:
    """``e^T psi`` by the terminating series ``sum_{k<=N} T^k / k!``."""
    return _exp_series(cluster_matrix(t), _as_vector(t.graph, psi), t.graph.N)


def exp_adjoint_apply(t: Amplitudes, psi) -> np.ndarray:
    return _exp_series(cluster_matrix(t).T.tocsr(), _as_vector(t.graph, psi), t.graph.N)


def exp_matrix(t: Amplitudes, sign: float = 1.0) -> np.ndarray:
    """Dense ``e^{sign T}`` (for tests and small checks)."""
    n = t.graph.basis.dim
    return _exp_series(cluster_matrix(t), np.eye(n), t.graph.N, sign)


# -- amplitudes <-> wavefunctions --------------------------------------------


def _reference_vector(G: ExcitationGraph, m: int) -> np.ndarray:
    return G.basis.unit(G.ref(m))


def _extract(G: ExcitationGraph, vec: np.ndarray, m: int, what: str) -> Amplitudes:
    idx = G.basis.index
    labels = G.labels(m)
    pos = np.array([idx[a] for a in labels], dtype=np.intp)
    rest = vec.copy()
    rest[pos] = 0.0
    rest[idx[G.ref(m)]] = 0.0
    scale = max(1.0, float(np.max(np.abs(vec)))) if vec.size else 1.0
    if np.max(np.abs(rest), initial=0.0) > 1e-12 * scale:
        raise ConfigurationError(f"{what} has components outside the excitation set; use the full graph")
    return Amplitudes(G, vec[pos] if len(pos) else np.zeros(0), m)


def wavefunction_to_amplitudes(psi, G: ExcitationGraph, m: int = 0) -> tuple[float, Amplitudes]:
    """``(c0, c)`` with ``psi = c0 Phi_0 + sum c_alpha Phi_alpha``.

    Components on states outside ``{0} u Xi(G)`` are an error.
    """
    psi = _as_vector(G, psi)
    c0 = float(psi[G.basis.index[G.ref(m)]])
    return c0, _extract(G, psi, m, "wavefunction")


def amplitudes_to_wavefunction(c: Amplitudes, c0: float = 1.0) -> np.ndarray:
    return c0 * _reference_vector(c.graph, c.m) + apply_cluster(c, _reference_vector(c.graph, c.m))


def exp_cluster(t: Amplitudes) -> Amplitudes:
    """CI coefficients ``c`` with ``e^T Phi_0 = Phi_0 + C Phi_0``."""
    phi0 = _reference_vector(t.graph, t.m)
    return _extract(t.graph, exp_apply(t, phi0), t.m, "e^T Phi_0")


def log_cluster(c: Amplitudes) -> Amplitudes:
    """Cluster amplitudes ``t`` with ``e^T = I + C``, from ``T = sum_k (-1)^(k-1) C^k / k``."""
    C = cluster_matrix(c)
    phi0 = _reference_vector(c.graph, c.m)
    acc = np.zeros_like(phi0)
    power = phi0
    for k in range(1, c.graph.N + 1):
        power = C @ power
        if not np.any(power):
            break
        acc = acc + ((-1) ** (k - 1) / k) * power
    return _extract(c.graph, acc, c.m, "log(I + C) Phi_0")


def projected_exp_adjoint_solve(t: Amplitudes, rhs, sign: float = 1.0) -> np.ndarray:
    """Solve ``e^{sign T^dagger} x = rhs`` inside ``V0 = span{Phi_0} + V(G)``.

    Because ``T^dagger`` is nilpotent the solution is ``e^{-sign T^dagger} rhs``;
    excitation completeness guarantees it stays in ``V0``.
    """
    G = t.graph
    if not classify(G, t.m).excitation_complete:
        raise NotExcitationCompleteError("graph is not excitation complete; e^{T^dagger} does not preserve V0")
    rhs = _as_vector(G, rhs)
    _extract(G, rhs, t.m, "right-hand side")
    Tt = cluster_matrix(t).T.tocsr()
    x = _exp_series(Tt, rhs, G.N, -sign)
    _extract(G, x, t.m, "solution")
    return x


def commutator_norm(a: Amplitudes, b: Amplitudes) -> float:
    A, B = cluster_matrix(a), cluster_matrix(b)
    D = (A @ B - B @ A)
    return float(abs(D).max()) if D.nnz else 0.0

