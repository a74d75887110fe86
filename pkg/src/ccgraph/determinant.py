"""Determinants as orbital bit sets and the reference-relative lattice on them.

A determinant is a plain ``int`` whose bit ``p - 1`` is set when orbital ``p``
(1-based, as in all user-facing I/O) is occupied.  Every function here is pure.

Lattice operations are taken relative to a reference determinant ``ref``::

    occ(a)  = a & ref          virt(a) = a & ~ref
    join    = (occ a & occ b) | (virt a | virt b)
    meet    = (occ a | occ b) | (virt a & virt b)
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, NotComparableError, PauliViolationError

MAX_ORBITALS = 64


def check_norb(K: int) -> int:
    if not 0 <= K <= MAX_ORBITALS:
        raise ConfigurationError(f"number of orbitals must lie in 0..{MAX_ORBITALS}, got {K}")
    return K


def full_mask(K: int) -> int:
    return (1 << check_norb(K)) - 1


def from_indices(indices: Iterable[int], K: int | None = None) -> int:
    """Bit mask of a collection of 1-based orbital indices.

    >>> bin(from_indices([1, 3]))
    '0b101'
    """
    mask = 0
    for p in indices:
        p = int(p)
        if p < 1 or p > MAX_ORBITALS or (K is not None and p > K):
            raise ConfigurationError(f"orbital index {p} out of range")
        if mask >> (p - 1) & 1:
            raise ConfigurationError(f"orbital index {p} repeated")
        mask |= 1 << (p - 1)
    return mask


def to_indices(mask: int) -> list[int]:
    """Sorted 1-based indices of the set bits.

    >>> to_indices(0b10110)
    [2, 3, 5]
    """
    out = []
    p = 1
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return out


def popcount(mask: int) -> int:
    return mask.bit_count()


def format_det(mask: int) -> str:
    return "[" + ",".join(map(str, to_indices(mask))) + "]"


def enumerate_states(K: int, N: int) -> list[int]:
    """All N-subsets of ``{1..K}``, in lexicographic order of their index lists."""
    check_norb(K)
    if not 0 <= N <= K:
        raise ConfigurationError(f"need 0 <= N <= K, got N={N}, K={K}")
    return [sum(1 << p for p in c) for c in combinations(range(K), N)]


def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` (including 0 and ``mask`` itself)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


# -- lattice -----------------------------------------------------------------


def occ_virt_split(alpha: int, ref: int) -> tuple[int, int]:
    return alpha & ref, alpha & ~ref


def holes(alpha: int, ref: int) -> int:
    """Reference orbitals missing from ``alpha``."""
    return ref & ~alpha


def precedes(alpha: int, beta: int, ref: int) -> bool:
    """``alpha`` precedes ``beta``: occ(beta) within occ(alpha) and virt(alpha) within virt(beta)."""
    oa, va = alpha & ref, alpha & ~ref
    ob, vb = beta & ref, beta & ~ref
    return (ob & ~oa) == 0 and (va & ~vb) == 0


def join(alpha: int, beta: int, ref: int) -> int:
    return (alpha & beta & ref) | ((alpha | beta) & ~ref)


def meet(alpha: int, beta: int, ref: int) -> int:
    return ((alpha | beta) & ref) | (alpha & beta & ~ref)


def complement(alpha: int, K: int) -> int:
    return ~alpha & full_mask(K)


def rank(alpha: int, ref: int) -> int:
    return (alpha & ~ref).bit_count()


def hamming_distance(alpha: int, beta: int) -> int:
    return (alpha ^ beta).bit_count()


def solve_excitation(beta: int, gamma: int, ref: int, K: int) -> int:
    """The unique ``alpha`` with ``join(alpha, beta) == gamma``, namely ``meet(~beta, gamma)``."""
    if not precedes(beta, gamma, ref):
        raise NotComparableError(
            f"{format_det(beta)} does not precede {format_det(gamma)} w.r.t. {format_det(ref)}"
        )
    return meet(complement(beta, K), gamma, ref)


def is_edge_pair(alpha: int, beta: int, ref: int) -> bool:
    """Membership of ``(alpha, beta)`` in the edge-generating set of ``ref``.

    Both occupied parts together must exhaust the reference and the virtual
    parts must be disjoint.
    """
    return ((alpha | beta) & ref) == ref and (alpha & beta & ~ref) == 0


# -- signs -------------------------------------------------------------------


def _inversions(a: int, b: int) -> int:
    """Number of pairs ``(x in a, y in b)`` with ``x > y``."""
    n = 0
    while b:
        low = b & -b
        n += (a & ~((low << 1) - 1)).bit_count()
        b ^= low
    return n


def sort_sign(first: int, second: int) -> int:
    """Sign of the permutation sorting the concatenation ``(first<, second<)``.

    >>> sort_sign(0b0100, 0b1000), sort_sign(0b1000, 0b0100)
    (1, -1)
    """
    return -1 if _inversions(first, second) & 1 else 1


def ordering_sign(alpha: int, ref: int) -> int:
    """Sign relating the ascending orbital string of ``alpha`` to the string
    with its occupied part (w.r.t. ``ref``) moved in front of its virtual part."""
    return -1 if _inversions(alpha & ref, alpha & ~ref) & 1 else 1


def sign_sigma(alpha: int, beta: int, ref: int) -> int:
    """Phase of the excitation ``alpha`` acting on ``beta``.

    The virtual parts contribute the sign sorting ``(virt beta, virt alpha)``
    and the hole sets contribute the sign sorting ``(holes alpha, holes beta)``.
    When reference and virtual indices interleave, the ordering signs of the
    three determinants involved convert the result back to ascending strings.
    Together these reproduce the second-quantized phase of the excitation
    string normalised so that excitations acting on the reference carry +1.
    """
    va, vb = alpha & ~ref, beta & ~ref
    if va & vb:
        raise PauliViolationError(
            f"virtual parts of {format_det(alpha)} and {format_det(beta)} overlap"
        )
    ha, hb = ref & ~alpha, ref & ~beta
    parity = _inversions(vb, va) + _inversions(ha, hb)
    gamma = join(alpha, beta, ref)
    parity += _inversions(gamma & ref, gamma & ~ref)
    parity += _inversions(alpha & ref, va) + _inversions(beta & ref, vb)
    return -1 if parity & 1 else 1


def virtual_sort_sign(alpha: int, beta: int, ref: int) -> int:
    """Sign from the virtual parts alone, ``sort_sign(virt beta, virt alpha)``.

    Used on its own this sign makes two odd-rank excitations anticommute; it
    is kept for comparison with :func:`sign_sigma`.
    """
    va, vb = alpha & ~ref, beta & ~ref
    if va & vb:
        raise PauliViolationError(
            f"virtual parts of {format_det(alpha)} and {format_det(beta)} overlap"
        )
    return sort_sign(vb, va)


class DeterminantBasis:
    """Ordered enumeration of all N-particle states over K orbitals.

    Wavefunctions are numpy vectors indexed by this basis.
    """

    def __init__(self, K: int, N: int):
        self.K = check_norb(K)
        self.N = N
        self.states: list[int] = enumerate_states(K, N)
        self.index: dict[int, int] = {s: i for i, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, mask: int) -> bool:
        return mask in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, DeterminantBasis) and (self.K, self.N) == (other.K, other.N)

    def __hash__(self) -> int:
        return hash((self.K, self.N))

    def __repr__(self) -> str:
        return f"DeterminantBasis(K={self.K}, N={self.N}, dim={self.dim})"

    def unit(self, mask: int):
        v = np.zeros(self.dim)
        v[self.index[mask]] = 1.0
        return v

    def to_dict(self, vec, tol: float = 0.0) -> dict[int, float]:
        return {s: float(c) for s, c in zip(self.states, vec) if abs(c) > tol}

    def from_dict(self, coeffs: dict[int, float]):
        v = np.zeros(self.dim)
        for s, c in coeffs.items():
            v[self.index[s]] += c
        return v


def expected_dim(K: int, N: int) -> int:
    return comb(K, N)


def parse_det_list(items: Sequence[Sequence[int]], K: int | None = None) -> list[int]:
    return [from_indices(it, K) for it in items]
