import numpy as np

from ccgraph import determinant as det
from ccgraph import oracle
from ccgraph.hamiltonian import random_integrals

from conftest import ref_of


def test_pauli():
    assert oracle.create(1, oracle.create(1, oracle.vacuum())) == {}


def test_anticommutation_sign():
    a = oracle.create(1, oracle.create(2, oracle.vacuum()))
    b = oracle.create(2, oracle.create(1, oracle.vacuum()))
    (ka, va), = a.items()
    (kb, vb), = b.items()
    assert ka == kb and va == -vb


def test_ascending_slater_is_positive():
    for s in det.enumerate_states(5, 3):
        assert oracle.slater(det.to_indices(s)) == {s: 1}


def test_H_symmetric_and_one_particle(rng):
    ints = random_integrals(4, rng)
    H = oracle.oracle_H_matrix(ints, 2)
    assert np.allclose(H, H.T)
    H1 = oracle.oracle_H_matrix(ints, 1)
    assert np.allclose(H1, ints.h + ints.e_core * np.eye(4))


def test_enumeration_k5n2():
    edges = oracle.oracle_enumerate_graph(5, 2, [ref_of(2)])
    assert len(edges) == 21


def test_path_dfs():
    edges = oracle.oracle_enumerate_graph(5, 2, [ref_of(2)])
    gamma = det.from_indices([3, 4])
    assert oracle.oracle_count_paths(edges, ref_of(2), gamma, 1) == 1
    assert oracle.oracle_count_paths(edges, ref_of(2), gamma, 2) == 4


def test_oracle_cover_small():
    f = det.from_indices
    cost, chosen = oracle.oracle_cover(6, 3, [f([1, 2, 3]), f([4, 5, 6])], 1)
    assert cost == 2 and len(chosen) == 2
