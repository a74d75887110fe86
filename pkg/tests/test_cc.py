import numpy as np
import pytest

from ccgraph import determinant as det
from ccgraph.cc import (
    CCProblem,
    SolverOptions,
    cc_energy,
    cc_jacobian,
    cc_jacobian_apply,
    cc_residual,
    fcc_fci_comparison,
    fci_cluster_amplitudes,
    newton_step,
    solve_cc,
    solve_ci_projected,
    solve_fci,
)
from ccgraph.errors import ConfigurationError, NotExcitationCompleteError, SingularJacobianError
from ccgraph.graph import ExcitationGraph, GraphSpec
from ccgraph.hamiltonian import Hamiltonian, IntegralSet, pairing_model, random_integrals
from ccgraph.operators import Amplitudes

from conftest import ref_of


@pytest.fixture(scope="module")
def system():
    rng = np.random.default_rng(5)
    H = Hamiltonian(random_integrals(6, rng, 0.1, spacing=1.0), 2)
    return H, CCProblem.build(H)


def test_fci_diagonal():
    ints = IntegralSet.zeros(4)
    ints.h[:] = np.diag([0.3, -0.2, 0.1, 0.7])
    H = Hamiltonian(ints, 1)
    assert [e for e, _ in solve_fci(H, 4)] == pytest.approx([-0.2, 0.1, 0.3, 0.7])


def test_fci_pairing_decoupled():
    (e, _), = solve_fci(Hamiltonian(pairing_model(8, g=0.0), 4))
    assert e == pytest.approx(0 + 0 + 1 + 1)


def test_fci_eigen_residual(system):
    H, _ = system
    for e, v in solve_fci(H, 3):
        assert np.linalg.norm(H.apply(v) - e * v) <= 1e-10


def test_energy_at_zero(system):
    H, p = system
    assert cc_energy(p.zeros(), H) == pytest.approx(H.matrix_element(p.ref, p.ref))


def test_energy_formulas_agree(system, rng):
    H, p = system
    for _ in range(5):
        t = Amplitudes.random(p.graph, rng, 0.3)
        assert cc_energy(t, H) == pytest.approx(cc_energy(t, H, "similarity"), abs=1e-12)


def test_residual_at_zero(system):
    H, p = system
    col = H.dense()[:, H.basis.index[p.ref]]
    assert np.allclose(cc_residual(p.zeros(), p).values, col[p.positions], atol=1e-15)


def test_residual_vanishes_at_fci_amplitudes(system):
    H, p = system
    t = fci_cluster_amplitudes(H, p.graph)
    assert np.linalg.norm(cc_residual(t, p).values) <= 1e-10
    assert cc_energy(t, H) == pytest.approx(solve_fci(H)[0][0], abs=1e-10)


def test_jacobian_apply_zero_and_linear(system, rng):
    _, p = system
    t = Amplitudes.random(p.graph, rng, 0.1)
    assert not cc_jacobian_apply(t, p.zeros(), p).values.any()
    u, w = Amplitudes.random(p.graph, rng), Amplitudes.random(p.graph, rng)
    lhs = cc_jacobian_apply(t, u * 2.0 + w, p).values
    rhs = 2.0 * cc_jacobian_apply(t, u, p).values + cc_jacobian_apply(t, w, p).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_analytic_jacobian_matches_finite_differences(system, rng):
    H, p = system
    fd = CCProblem(H, p.graph, SolverOptions(jacobian_mode="finite-difference"))
    t = Amplitudes.random(p.graph, rng, 0.2)
    Ja, Jf = cc_jacobian(t, p), cc_jacobian(t, fd)
    assert np.allclose(Ja, Jf, atol=1e-7 * np.abs(Jf).max())
    u = Amplitudes.random(p.graph, rng)
    assert np.allclose(Ja @ u.values, cc_jacobian_apply(t, u, p).values, atol=1e-12)
    assert np.allclose(cc_jacobian_apply(t, u, fd).values, Ja @ u.values, atol=1e-6)


def test_diagonal_hamiltonian_gives_zero_amplitudes():
    H = Hamiltonian(pairing_model(6, g=0.0), 2)
    p = CCProblem.build(H)
    sol = solve_cc(p)
    assert sol.converged and not sol.t.values.any()
    assert sol.energy == pytest.approx(H.matrix_element(p.ref, p.ref))


def test_full_cc_equals_fci_pairing():
    H = Hamiltonian(pairing_model(6, g=0.5), 2)
    rep = fcc_fci_comparison(H)
    assert rep.converged and not rep.reference_orthogonal
    assert rep.energy_error <= 1e-9
    assert rep.max_vector_diff <= 1e-8


def test_ccsd_is_full_cc_for_two_particles(system):
    H, _ = system
    p = CCProblem.build(H, GraphSpec.truncated(1, 2))
    sol = solve_cc(p)
    assert sol.converged
    assert sol.energy == pytest.approx(solve_fci(H)[0][0], abs=1e-10)


def test_projected_ci(system):
    H, p = system
    e_full, v = solve_ci_projected(H, p.graph)
    assert e_full == pytest.approx(solve_fci(H)[0][0], abs=1e-12)
    assert v[H.basis.index[p.ref]] > 0
    H3 = Hamiltonian(pairing_model(8, 0.4), 3)
    es = [solve_ci_projected(H3, ExcitationGraph(8, 3, [ref_of(3)], spec))[0]
          for spec in (GraphSpec.full(), GraphSpec.truncated(1, 2), GraphSpec.truncated(1))]
    assert es[0] <= es[1] + 1e-12 and es[1] <= es[2] + 1e-12


def test_problem_validation():
    H = Hamiltonian(pairing_model(6), 3)
    with pytest.raises(NotExcitationCompleteError):
        CCProblem.build(H, GraphSpec.truncated(1, 3))
    with pytest.raises(ConfigurationError):
        CCProblem(H, ExcitationGraph(6, 3, [ref_of(3), det.from_indices([1, 2, 4])]))
    with pytest.raises(ConfigurationError):
        CCProblem(H, ExcitationGraph(6, 2, [ref_of(2)]))
    with pytest.raises(ConfigurationError):
        SolverOptions(damping=0.0)
    with pytest.raises(ConfigurationError):
        SolverOptions(jacobian_mode="secant")


def test_singular_newton_step():
    with pytest.raises(SingularJacobianError):
        newton_step(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_iteration_cap_reports_nonconvergence(system):
    H, p = system
    sol = solve_cc(CCProblem(H, p.graph, SolverOptions(max_iter=1, tol_residual=1e-15)))
    assert not sol.converged and sol.iterations == 1
    assert len(sol.history) == 2


def test_solution_json(system):
    _, p = system
    doc = solve_cc(p).to_json()
    assert set(doc) == {"energy", "iterations", "residual_norm", "converged"}
