"""Finite-basis Hamiltonians from one- and two-electron integrals.

Two-electron integrals use chemists' notation, so that

    H = e_core + sum_pq h_pq a+_p a_q + 1/2 sum_pqrs (pq|rs) a+_p a+_r a_s a_q

Matrix elements follow the Slater-Condon rules with determinants written as
ascending orbital strings.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from . import determinant as det
from .determinant import DeterminantBasis
from .errors import ConfigurationError, DimensionError, IntegralParseError

DEFAULT_MAX_DIM = 5000


def max_dense_dim() -> int:
    """Dense-matrix cap, overridable with ``CCGRAPH_MAX_DIM``."""
    raw = os.environ.get("CCGRAPH_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"CCGRAPH_MAX_DIM must be an integer, got {raw!r}") from None


def check_dense(dim: int) -> None:
    cap = max_dense_dim()
    if dim > cap:
        raise DimensionError(f"dense dimension {dim} exceeds the cap {cap} (set CCGRAPH_MAX_DIM to raise it)")


def _g_images(p, q, r, s):
    return {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
            (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}


@dataclass
class IntegralSet:
    """Core energy, symmetric ``h`` (K x K) and 8-fold symmetric ``g`` (K^4)."""

    K: int
    e_core: float
    h: np.ndarray
    g: np.ndarray
    nelec: int | None = None

    def __post_init__(self):
        det.check_norb(self.K)
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.h.shape != (self.K,) * 2 or self.g.shape != (self.K,) * 4:
            raise ConfigurationError("integral arrays do not match K")

    @classmethod
    def zeros(cls, K: int) -> IntegralSet:
        return cls(K, 0.0, np.zeros((K, K)), np.zeros((K,) * 4))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        g = self.g
        return (
            np.allclose(self.h, self.h.T, atol=tol)
            and np.allclose(g, g.transpose(1, 0, 2, 3), atol=tol)
            and np.allclose(g, g.transpose(0, 1, 3, 2), atol=tol)
            and np.allclose(g, g.transpose(2, 3, 0, 1), atol=tol)
        )

    def symmetrized(self) -> IntegralSet:
        h = 0.5 * (self.h + self.h.T)
        g = self.g
        g = (g + g.transpose(1, 0, 2, 3)) / 2
        g = (g + g.transpose(0, 1, 3, 2)) / 2
        g = (g + g.transpose(2, 3, 0, 1)) / 2
        return IntegralSet(self.K, self.e_core, h, g, self.nelec)

    def rotated(self, C: np.ndarray) -> IntegralSet:
        """Integrals in the orbital basis given by the columns of the orthogonal ``C``."""
        h = C.T @ self.h @ C
        g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", self.g, C, C, C, C, optimize=True)
        return IntegralSet(self.K, self.e_core, h, g, self.nelec)


def random_integrals(K: int, rng, scale: float = 1.0, spacing: float = 0.0) -> IntegralSet:
    """Random real integrals with the full 8-fold symmetry.

    ``spacing`` adds ``p * spacing`` to ``h_pp`` (0-based p), which orders the
    orbitals and makes low determinants dominant.
    """
    h = rng.normal(scale=scale, size=(K, K)) + np.diag(spacing * np.arange(K))
    g = rng.normal(scale=scale, size=(K,) * 4)
    return IntegralSet(K, float(rng.normal()), h, g).symmetrized()


def direct_sum(a: IntegralSet, b: IntegralSet) -> IntegralSet:
    """Integrals of two noninteracting subsystems; orbitals of ``b`` follow those of ``a``."""
    K = a.K + b.K
    h = np.zeros((K, K))
    g = np.zeros((K,) * 4)
    h[: a.K, : a.K] = a.h
    h[a.K :, a.K :] = b.h
    g[: a.K, : a.K, : a.K, : a.K] = a.g
    g[a.K :, a.K :, a.K :, a.K :] = b.g
    return IntegralSet(K, a.e_core + b.e_core, h, g)


# -- FCIDUMP -------------------------------------------------------------------

_HEADER_KEY = re.compile(r"([A-Za-z_]\w*)\s*=")


def _header_fields(text: str) -> dict[str, str]:
    """``KEY=value`` pairs of a namelist header; values run up to the next key."""
    text = re.sub(r"&\w+|/", " ", text)
    keys = list(_HEADER_KEY.finditer(text))
    out = {}
    for k, nxt in zip(keys, keys[1:] + [None]):
        end = nxt.start() if nxt is not None else len(text)
        out[k.group(1).upper()] = text[k.end() : end].strip().strip(",").strip()
    return out


def parse_integrals(source, norb: int | None = None) -> IntegralSet:
    """Read an FCIDUMP-style integral file (path or text).

    The header ``&FCI NORB=<K> NELEC=<N> &END`` fixes K; without a header the
    orbital count must be passed as ``norb``.  Records are ``value i j k l``:
    ``k = l = 0`` gives ``h_ij``, all zero gives the core energy and anything
    else gives ``(ij|kl)``.  Records ``value i 0 0 0`` (orbital energies) are
    skipped.  Every record also sets its symmetric images.
    """
    text = _read_text(source)
    lines = text.splitlines()
    K = norb
    nelec = None
    pos = 0

    # header
    while pos < len(lines) and (not lines[pos].split("#", 1)[0].strip()):
        pos += 1
    if pos < len(lines) and lines[pos].lstrip().upper().startswith("&FCI"):
        header = []
        while pos < len(lines):
            raw = lines[pos].split("#", 1)[0]
            header.append(raw)
            pos += 1
            up = raw.upper()
            if "&END" in up or raw.strip().endswith("/") or raw.strip() == "/":
                break
            if pos < len(lines) and _looks_numeric(lines[pos]):
                break
        fields = _header_fields(" ".join(header))
        if "NORB" not in fields:
            raise IntegralParseError("header lacks NORB", pos)
        try:
            K = int(fields["NORB"])
            if "NELEC" in fields:
                nelec = int(fields["NELEC"])
        except ValueError:
            raise IntegralParseError("NORB/NELEC must be integers", pos) from None
    elif K is None:
        raise IntegralParseError("missing '&FCI NORB=... &END' header", pos + 1)
    try:
        det.check_norb(K)
    except ConfigurationError as exc:
        raise IntegralParseError(str(exc), pos) from None

    h = np.zeros((K, K))
    g = np.zeros((K,) * 4)
    e_core = 0.0
    for lineno in range(pos + 1, len(lines) + 1):
        raw = lines[lineno - 1].split("#", 1)[0].strip()
        if not raw:
            continue
        parts = raw.split()
        if len(parts) != 5:
            raise IntegralParseError(f"expected 'value i j k l', got {raw!r}", lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise IntegralParseError(f"cannot parse record {raw!r}", lineno) from None
        if any(x < 0 or x > K for x in (i, j, k, l)):
            raise IntegralParseError(f"orbital index out of range 1..{K} in {raw!r}", lineno)
        if i == j == k == l == 0:
            e_core = value
        elif k == 0 and l == 0:
            if j == 0:
                continue
            if i == 0:
                raise IntegralParseError(f"malformed one-electron record {raw!r}", lineno)
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise IntegralParseError(f"malformed two-electron record {raw!r}", lineno)
        else:
            for idx in _g_images(i - 1, j - 1, k - 1, l - 1):
                g[idx] = value
    return IntegralSet(K, e_core, h, g, nelec)


def _looks_numeric(line: str) -> bool:
    parts = line.split("#", 1)[0].split()
    if len(parts) != 5:
        return False
    try:
        float(parts[0].replace("D", "E"))
        [int(x) for x in parts[1:]]
    except ValueError:
        return False
    return True


def _read_text(source) -> str:
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source and os.path.exists(source)):
        with open(source) as fh:
            return fh.read()
    if hasattr(source, "read"):
        return source.read()
    return str(source)


def format_integrals(ints: IntegralSet, nelec: int | None = None, tol: float = 1e-14) -> str:
    """FCIDUMP text with one record per symmetry-unique integral."""
    nelec = ints.nelec if nelec is None else nelec
    out = [f"&FCI NORB={ints.K}" + (f",NELEC={nelec}" if nelec is not None else "") + ", &END"]
    K = ints.K
    for i in range(K):
        for j in range(i + 1):
            for k in range(K):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = ints.g[i, j, k, l]
                    if abs(v) > tol:
                        out.append(f"{v:.16e} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(K):
        for j in range(i + 1):
            if abs(ints.h[i, j]) > tol:
                out.append(f"{ints.h[i, j]:.16e} {i + 1} {j + 1} 0 0")
    out.append(f"{ints.e_core:.16e} 0 0 0 0")
    return "\n".join(out) + "\n"


def write_integrals(ints: IntegralSet, path, nelec: int | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_integrals(ints, nelec))


# -- Hamiltonian ---------------------------------------------------------------


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _phase(state: int, annihilate, create) -> tuple[int, int]:
    """Apply ``a_q`` for q in ``annihilate`` then ``a+_p`` for p in ``create`` (0-based), in order."""
    sign = 1
    for q in annihilate:
        if (state >> q & 1) == 0:
            return 0, 0
        if (state & ((1 << q) - 1)).bit_count() & 1:
            sign = -sign
        state ^= 1 << q
    for p in create:
        if state >> p & 1:
            return 0, 0
        if (state & ((1 << p) - 1)).bit_count() & 1:
            sign = -sign
        state |= 1 << p
    return sign, state


class Hamiltonian:
    """The N-particle Hamiltonian of an :class:`IntegralSet` on the determinant basis."""

    def __init__(self, integrals: IntegralSet, N: int):
        self.integrals = integrals
        self.K = integrals.K
        self.N = N
        self.basis = DeterminantBasis(self.K, N)
        self._matrix = None

    def diagonal_element(self, alpha: int) -> float:
        h, g = self.integrals.h, self.integrals.g
        occ = _bits(alpha)
        e = self.integrals.e_core + sum(h[i, i] for i in occ)
        for i, j in combinations(occ, 2):
            e += g[i, i, j, j] - g[i, j, j, i]
        return float(e)

    def matrix_element(self, alpha: int, beta: int) -> float:
        """``<Phi_alpha | H | Phi_beta>`` by the Slater-Condon rules."""
        diff = det.hamming_distance(alpha, beta)
        if diff == 0:
            return self.diagonal_element(alpha)
        if diff > 4 or alpha.bit_count() != beta.bit_count():
            return 0.0
        h, g = self.integrals.h, self.integrals.g
        removed = _bits(beta & ~alpha)
        added = _bits(alpha & ~beta)
        if diff == 2:
            (i,), (a,) = removed, added
            sign, _ = _phase(beta, [i], [a])
            v = h[a, i]
            for j in _bits(beta & alpha):
                v += g[a, i, j, j] - g[a, j, j, i]
            return float(sign * v)
        (i, j), (a, b) = removed, added
        sign, _ = _phase(beta, [i, j], [b, a])
        return float(sign * (g[a, i, b, j] - g[a, j, b, i]))

    def connected(self, beta: int):
        """Yield ``(alpha, value)`` for every nonzero off-diagonal element in column ``beta``."""
        h, g = self.integrals.h, self.integrals.g
        occ = _bits(beta)
        vir = [p for p in range(self.K) if not beta >> p & 1]
        for i in occ:
            rest = [j for j in occ if j != i]
            for a in vir:
                sign, alpha = _phase(beta, [i], [a])
                v = h[a, i] + sum(g[a, i, j, j] - g[a, j, j, i] for j in rest)
                if v:
                    yield alpha, float(sign * v)
        for i, j in combinations(occ, 2):
            for a, b in combinations(vir, 2):
                v = g[a, i, b, j] - g[a, j, b, i]
                if v:
                    sign, alpha = _phase(beta, [i, j], [b, a])
                    yield alpha, float(sign * v)

    @property
    def matrix(self) -> sp.csr_matrix:
        """Sparse Hamiltonian matrix (built once)."""
        if self._matrix is None:
            idx = self.basis.index
            rows, cols, vals = [], [], []
            for col, beta in enumerate(self.basis.states):
                rows.append(col)
                cols.append(col)
                vals.append(self.diagonal_element(beta))
                for alpha, v in self.connected(beta):
                    rows.append(idx[alpha])
                    cols.append(col)
                    vals.append(v)
            n = self.basis.dim
            self._matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return self._matrix

    def apply(self, psi) -> np.ndarray:
        return self.matrix @ np.asarray(psi, dtype=float)

    def dense(self) -> np.ndarray:
        check_dense(self.basis.dim)
        return self.matrix.toarray()

    def expectation(self, psi) -> float:
        psi = np.asarray(psi, dtype=float)
        return float(psi @ self.apply(psi) / (psi @ psi))

    def __repr__(self) -> str:
        return f"Hamiltonian(K={self.K}, N={self.N}, dim={self.basis.dim})"


# -- similarity transform ------------------------------------------------------


def bch_term(H: Hamiltonian, T, psi, j: int) -> np.ndarray:
    """The ``j``-fold commutator ``[..[H, T], .., T] psi = sum_k (-1)^k C(j,k) T^k H T^(j-k) psi``."""
    psi = np.asarray(psi, dtype=float)
    powers = [psi]
    for _ in range(j):
        powers.append(T @ powers[-1])
    out = np.zeros_like(psi)
    for k in range(j + 1):
        v = H.apply(powers[j - k])
        for _ in range(k):
            v = T @ v
        out += (-1) ** k * comb(j, k) * v
    return out


def similarity_apply(H: Hamiltonian, t, psi, method: str = "bch", order: int = 4) -> np.ndarray:
    """``e^{-T} H e^{T} psi``.

    ``method="bch"`` sums the commutator series up to ``order`` (four suffices
    for a two-body Hamiltonian); ``method="naive"`` composes the exponentials.
    """
    from .operators import cluster_matrix, exp_apply

    psi = np.asarray(psi, dtype=float)
    if method == "naive":
        return exp_apply(-t, H.apply(exp_apply(t, psi)))
    if method != "bch":
        raise ConfigurationError(f"unknown similarity method {method!r}")
    T = cluster_matrix(t)
    out = np.zeros_like(psi)
    fact = 1.0
    for j in range(order + 1):
        if j:
            fact *= j
        out += bch_term(H, T, psi, j) / fact
    return out


# -- built-in models -----------------------------------------------------------


def _zeeman(ints: IntegralSet, field: float) -> None:
    # odd orbitals (1-based) are spin up, even ones spin down
    idx = np.arange(ints.K)
    ints.h[idx, idx] += np.where(idx % 2 == 0, -0.5 * field, 0.5 * field)


def pairing_model(K: int, g: float = 0.5, spacing: float = 1.0, field: float = 0.0) -> IntegralSet:
    """Doubly degenerate equally spaced levels with pair coupling.

    Orbitals ``2p-1`` and ``2p`` (1-based) form level ``p`` with energy
    ``(p - 1) * spacing``.  The pair integrals ``(p+ q+ | p- q-) = -g`` are
    stored with their full real-orbital symmetry.  A nonzero ``field`` shifts
    up and down orbitals by ``-field/2`` and ``+field/2``, which lifts the spin
    degeneracy of odd-N ground states.
    """
    if K < 2 or K % 2:
        raise ConfigurationError("the pairing model needs an even number of orbitals K >= 2")
    ints = IntegralSet.zeros(K)
    for p in range(K // 2):
        ints.h[2 * p, 2 * p] = ints.h[2 * p + 1, 2 * p + 1] = p * spacing
    for p in range(K // 2):
        for q in range(K // 2):
            for idx in _g_images(2 * p, 2 * q, 2 * p + 1, 2 * q + 1):
                ints.g[idx] = -g
    _zeeman(ints, field)
    return ints


def hubbard_chain(sites: int, U: float = 1.0, t: float = 1.0, periodic: bool = False, basis: str = "site",
                  field: float = 0.0) -> IntegralSet:
    """One-dimensional Hubbard chain in spin orbitals ``2i-1`` (up) and ``2i`` (down).

    With ``basis="mo"`` the integrals are rotated to the eigenvectors of the
    hopping matrix, which makes the lowest orbitals a good reference.
    ``field`` is a Zeeman splitting as in :func:`pairing_model`.
    """
    if sites < 1:
        raise ConfigurationError("the Hubbard chain needs at least one site")
    hop = np.zeros((sites, sites))
    for i in range(sites - 1):
        hop[i, i + 1] = hop[i + 1, i] = -t
    if periodic and sites > 2:
        hop[0, -1] = hop[-1, 0] = -t
    K = 2 * sites
    ints = IntegralSet.zeros(K)
    for s in range(2):
        ints.h[s::2, s::2] = hop
    for i in range(sites):
        ints.g[2 * i, 2 * i, 2 * i + 1, 2 * i + 1] = U
        ints.g[2 * i + 1, 2 * i + 1, 2 * i, 2 * i] = U
    _zeeman(ints, field)
    if basis == "site":
        return ints
    if basis != "mo":
        raise ConfigurationError(f"unknown Hubbard basis {basis!r}; use 'site' or 'mo'")
    _, vecs = np.linalg.eigh(hop)
    C = np.zeros((K, K))
    for s in range(2):
        C[s::2, s::2] = vecs
    return ints.rotated(C)


MODELS = ("pairing", "hubbard-chain")


def builtin_model(name: str, **params) -> IntegralSet:
    """``pairing`` (K, g, spacing, field) or ``hubbard-chain`` (sites, U, t, periodic, basis, field)."""
    if name == "pairing":
        return pairing_model(**params)
    if name in ("hubbard-chain", "hubbard"):
        return hubbard_chain(**params)
    raise ConfigurationError(f"unknown model {name!r}; expected one of {MODELS}")
