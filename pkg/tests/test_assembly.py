"""Assembled matrices against hand-integrated oracles.

The interval oracles below are the full matrices worked out by hand for
4 cells of width 1/4 with A = 2, endpoint absorption beta = -0.1 and shift
alpha = 2.  The triangle oracle integrates one nonsymmetric coefficient
matrix against the closed-form hat gradients of the reference triangle.
Everything is compared entrywise at 1e-12 or tighter.
"""

import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from robinheat import (
    AssembledSystem,
    BoundaryOperatorSpec,
    CoefficientField,
    Mesh,
    assemble_boundary_mass,
    assemble_boundary_term,
    assemble_consistent_mass,
    assemble_lumped_mass,
    assemble_stiffness,
    assemble_system,
    build_box_mesh,
    check_accretivity,
    check_continuity,
    compute_trace_norm,
    trace_matrix,
)

ENTRY_TOL = 1e-12


def tridiag(lower, diag, upper, n):
    return (np.diag(np.full(n - 1, lower), -1)
            + np.diag(np.full(n, diag))
            + np.diag(np.full(n - 1, upper), 1))


# -- interval hand oracles ----------------------------------------------

def test_interval_stiffness_oracle(interval4):
    # per cell: (A/h) [[1, -1], [-1, 1]] with A = 2, h = 1/4
    field = CoefficientField.isotropic(interval4, 2.0)
    K = assemble_stiffness(interval4, field)
    expected = 8.0 * tridiag(-1.0, 2.0, -1.0, 5)
    expected[0, 0] = 8.0
    expected[4, 4] = 8.0
    assert np.abs(K - expected).max() <= ENTRY_TOL


def test_interval_mass_oracles(interval4):
    mass = assemble_lumped_mass(interval4)
    assert np.abs(mass - np.array([0.125, 0.25, 0.25, 0.25, 0.125])).max() \
        <= ENTRY_TOL
    M = assemble_consistent_mass(interval4)
    # per cell: (h/6) [[2, 1], [1, 2]]
    expected = tridiag(1.0 / 24, 1.0 / 6, 1.0 / 24, 5)
    expected[0, 0] = 1.0 / 12
    expected[4, 4] = 1.0 / 12
    assert np.abs(M - expected).max() <= ENTRY_TOL


def test_interval_boundary_pieces(interval4):
    ids, weights = assemble_boundary_mass(interval4)
    assert list(ids) == [0, 4]
    assert np.abs(weights - 1.0).max() <= ENTRY_TOL
    G = trace_matrix(interval4)
    expected = np.zeros((2, 5))
    expected[0, 0] = 1.0
    expected[1, 4] = 1.0
    assert np.array_equal(G, expected)
    spec = BoundaryOperatorSpec.multiplication(interval4, -0.1)
    Bw = assemble_boundary_term(interval4, spec)
    assert np.abs(Bw - np.diag([-0.1, -0.1])).max() <= ENTRY_TOL


def test_interval_full_system_oracle(interval4_robin_system):
    system = interval4_robin_system
    K = 8.0 * tridiag(-1.0, 2.0, -1.0, 5)
    K[0, 0] = 8.0
    K[4, 4] = 8.0
    mass = np.array([0.125, 0.25, 0.25, 0.25, 0.125])

    form_a = K.copy()
    form_a[0, 0] -= 0.1
    form_a[4, 4] -= 0.1
    assert np.abs(system.FormA - form_a).max() <= ENTRY_TOL

    form_shifted = form_a + 2.0 * np.diag(mass)
    assert np.abs(system.FormAtilde - form_shifted).max() <= ENTRY_TOL
    # spot values: 8.15 at the absorbing ends, 16.5 inside
    assert_allclose(system.FormAtilde[0, 0], 8.15, rtol=0, atol=ENTRY_TOL)
    assert_allclose(system.FormAtilde[2, 2], 16.5, rtol=0, atol=ENTRY_TOL)

    K_id = 4.0 * tridiag(-1.0, 2.0, -1.0, 5)
    K_id[0, 0] = 4.0
    K_id[4, 4] = 4.0
    assert np.abs(system.H1 - (K_id + np.diag(mass))).max() <= ENTRY_TOL

    # multiplication operators are self-adjoint and A is scalar here
    assert np.abs(system.FormAtilde_adj - system.FormAtilde).max() <= ENTRY_TOL


# -- single reference triangle ------------------------------------------

def test_reference_triangle_nonsymmetric_stiffness():
    """One-cell quadrature check: gradients (-1,-1), (1,0), (0,1) and
    area 1/2 against A = [[2, 1], [0, 3]], multiplied out by hand."""
    mesh = Mesh(2, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                np.array([[0, 1, 2]]))
    field = CoefficientField.matrix(mesh, np.array([[2.0, 1.0], [0.0, 3.0]]))
    K = assemble_stiffness(mesh, field)
    expected = np.array([[3.0, -1.0, -2.0],
                         [-1.5, 1.0, 0.5],
                         [-1.5, 0.0, 1.5]])
    assert np.abs(K - expected).max() <= ENTRY_TOL
    # rows and columns sum to zero: constants are in both kernels
    assert np.abs(K.sum(axis=0)).max() <= ENTRY_TOL
    assert np.abs(K.sum(axis=1)).max() <= ENTRY_TOL


def test_stiffness_transpose_identity(cube2):
    entries = np.array([[2.0, 0.5, 0.0],
                        [-0.5, 2.0, 0.3],
                        [0.0, -0.3, 2.0]])
    field = CoefficientField.matrix(cube2, entries)
    K = assemble_stiffness(cube2, field)
    Kt = assemble_stiffness(cube2, field.transposed())
    assert np.abs(K.T - Kt).max() <= 1e-14


def test_adjoint_form_is_transpose(cube2):
    entries = np.array([[2.0, 0.5, 0.0],
                        [-0.5, 2.0, 0.3],
                        [0.0, -0.3, 2.0]])
    field = CoefficientField.matrix(cube2, entries)
    spec = BoundaryOperatorSpec.multiplication(cube2, -0.02)
    system = assemble_system(cube2, field, spec)
    assert np.abs(system.FormAtilde_adj - system.FormAtilde.T).max() <= 1e-13
    assert np.abs(system.FormA_adj - system.FormA.T).max() <= 1e-13


def test_kernel_adjoint_form_is_transpose(cube2):
    from robinheat import build_boundary_operator
    field = CoefficientField.isotropic(cube2, 2.0)
    spec = build_boundary_operator(
        cube2, {"kind": "kernel", "profile": "cosine", "scale": 0.005})
    system = assemble_system(cube2, field, spec)
    assert np.abs(system.FormAtilde_adj - system.FormAtilde.T).max() <= 1e-13


# -- mass and quadrature relations --------------------------------------

def test_lumping_dominates_consistent_mass(cube2):
    lumped = np.diag(assemble_lumped_mass(cube2))
    consistent = assemble_consistent_mass(cube2)
    # row-sum lumping preserves row sums, so the difference is a weakly
    # diagonally dominant symmetric matrix, hence positive semidefinite
    assert np.abs(lumped.sum(axis=1) - consistent.sum(axis=1)).max() <= 1e-14
    eigs = np.linalg.eigvalsh(lumped - consistent)
    assert eigs.min() >= -1e-14


def test_mass_sums_to_volume(cube2, interval4):
    for mesh in (cube2, interval4):
        assert_allclose(assemble_lumped_mass(mesh).sum(), mesh.volume,
                        rtol=1e-13, atol=0)
        assert_allclose(assemble_consistent_mass(mesh).sum(), mesh.volume,
                        rtol=1e-13, atol=0)


# -- trace norm ----------------------------------------------------------

def dense_trace_norm(system):
    S = system.Gamma.T @ (system.boundary_weights[:, None] * system.Gamma)
    eigs = scipy.linalg.eigh(S, system.H1, eigvals_only=True)
    return float(eigs[-1])


def test_trace_norm_matches_dense_solver(interval4_robin_system,
                                         cube2_neumann_system):
    for system in (interval4_robin_system, cube2_neumann_system):
        expected = dense_trace_norm(system)
        assert_allclose(system.trace_norm_sq, expected, rtol=1e-10, atol=0)


def test_trace_norm_interval_frozen_value(interval4_robin_system):
    # value computed once from the dense generalized eigensolver and frozen
    assert_allclose(interval4_robin_system.trace_norm_sq, 2.1519813519813518,
                    rtol=1e-9, atol=0)


def test_trace_norm_converges_to_continuum_limit():
    """On [0, 1] the largest trace-to-H1 ratio is coth(1/2), attained by
    cosh(x - 1/2); the lumped P1 value converges at second order."""
    mesh = build_box_mesh((1.0,), (1024,))
    field = CoefficientField.isotropic(mesh, 1.0)
    system = assemble_system(mesh, field, BoundaryOperatorSpec.zero(mesh))
    continuum = 1.0 / math.tanh(0.5)
    assert abs(system.trace_norm_sq - continuum) <= 1e-5


def test_trace_norm_rejects_bad_iteration_budget(interval4_robin_system):
    system = interval4_robin_system
    S = system.Gamma.T @ (system.boundary_weights[:, None] * system.Gamma)
    with pytest.raises(RuntimeError, match="did not converge"):
        compute_trace_norm(S, system.H1, tol=0.0, max_iterations=3)


# -- form inequalities ---------------------------------------------------

def test_accretivity_report(interval4_robin_system):
    report = check_accretivity(interval4_robin_system)
    assert report.status == "passed"
    assert report.lambda_min >= -1e-10 * report.scale
    payload = report.as_dict()
    assert set(payload) >= {"status", "lambda_min", "scale"}


def test_accretivity_gates_on_hypothesis(interval4):
    # beta = -2 needs alpha >= 1 + 2 * trace_norm_sq ~ 5.3; alpha = 1 is
    # far outside, so the check must refuse rather than fail
    field = CoefficientField.isotropic(interval4, 1.0)
    spec = BoundaryOperatorSpec.multiplication(interval4, -2.0)
    system = assemble_system(interval4, field, spec)
    assert not system.admissibility.accretive
    report = check_accretivity(system)
    assert report.status == "hypothesis unmet"


def test_shifted_form_dominates_h1(cube2_neumann_system):
    diff = cube2_neumann_system.FormAtilde - cube2_neumann_system.H1
    eigs = np.linalg.eigvalsh(0.5 * (diff + diff.T))
    scale = np.linalg.norm(cube2_neumann_system.FormAtilde, 2)
    assert eigs.min() >= -1e-10 * scale


def test_continuity_report(interval4_robin_system):
    report = check_continuity(interval4_robin_system, samples=100, seed=11)
    assert report.passed
    assert report.max_ratio <= 1.0 + 1e-10
    assert report.samples == 100


def test_form_with_boundary_matches_direct_assembly(interval4_robin_system):
    system = interval4_robin_system
    rebuilt = system.form_with_boundary(system.spec)
    assert np.abs(rebuilt - system.FormAtilde).max() <= 1e-14


def test_norm_helpers(interval4_robin_system):
    system = interval4_robin_system
    u = np.array([1.0, -2.0, 3.0, -4.0, 5.0])
    assert_allclose(system.l2_norm(u),
                    math.sqrt(float(system.mass @ (u * u))), rtol=0, atol=0)
    assert_allclose(system.l1_norm(u), float(system.mass @ np.abs(u)),
                    rtol=0, atol=0)
    assert system.h1_norm(u) > system.l2_norm(u)
