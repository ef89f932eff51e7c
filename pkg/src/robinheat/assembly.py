"""P1 finite element assembly of the shifted boundary-coupled forms.

All matrices are dense; the laboratory targets a few hundred to a few
thousand unknowns where dense algebra is exact enough to check operator
inequalities at tolerances near machine precision.  Stiffness uses exact
one-point quadrature (piecewise constant coefficients, piecewise constant
gradients); volume and boundary mass are lumped.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .coefficients import CoefficientField, check_admissibility

__all__ = [
    "assemble_stiffness",
    "assemble_lumped_mass",
    "assemble_consistent_mass",
    "assemble_boundary_mass",
    "trace_matrix",
    "assemble_boundary_term",
    "AssembledSystem",
    "assemble_system",
    "compute_trace_norm",
    "AccretivityReport",
    "check_accretivity",
    "ContinuityReport",
    "check_continuity",
    "export_coordinate_format",
]


def _barycentric_gradients(pts):
    """Gradients of the d+1 hat functions on one simplex, rows of (d+1, d)."""
    edges = (pts[1:] - pts[0]).T            # columns v_i - v_0
    inv = np.linalg.inv(edges)
    grads = np.empty((len(pts), pts.shape[1]))
    grads[1:] = inv
    grads[0] = -inv.sum(axis=0)
    return grads


def assemble_stiffness(mesh, field):
    """K with v^t K u = sum_cells |cell| (A_c grad u) . grad v.

    Works for nonsymmetric cell matrices; the entry convention is
    K[i, j] = |cell| grad(phi_i)^t A_c grad(phi_j).
    """
    n = mesh.n_vertices
    K = np.zeros((n, n))
    for cell, vol, A in zip(mesh.cells, mesh.cell_volumes, field.per_cell):
        grads = _barycentric_gradients(mesh.vertices[cell])
        Kloc = vol * grads @ A @ grads.T
        K[np.ix_(cell, cell)] += Kloc
    return K


def assemble_lumped_mass(mesh):
    """Diagonal of the lumped mass matrix as a vector: each cell spreads its
    volume equally over its d+1 vertices."""
    m = np.zeros(mesh.n_vertices)
    for cell, vol in zip(mesh.cells, mesh.cell_volumes):
        m[cell] += vol / (mesh.dim + 1)
    return m


def assemble_consistent_mass(mesh):
    """Exact P1 mass matrix (for quadrature comparisons)."""
    n = mesh.n_vertices
    d = mesh.dim
    M = np.zeros((n, n))
    scale = 1.0 / ((d + 1) * (d + 2))
    for cell, vol in zip(mesh.cells, mesh.cell_volumes):
        loc = vol * scale * (np.ones((d + 1, d + 1)) + np.eye(d + 1))
        M[np.ix_(cell, cell)] += loc
    return M


def assemble_boundary_mass(mesh):
    """Lumped boundary measure: (boundary vertex ids, weights)."""
    return mesh.boundary_vertices.copy(), mesh.boundary_vertex_weights()


def trace_matrix(mesh):
    """0/1 restriction matrix from vertex values to boundary vertex values."""
    nb = len(mesh.boundary_vertices)
    G = np.zeros((nb, mesh.n_vertices))
    G[np.arange(nb), mesh.boundary_vertices] = 1.0
    return G


def assemble_boundary_term(mesh, spec):
    """Weighted boundary coupling Bw = diag(w) @ T so that the boundary part
    of the form is (trace v)^t Bw (trace u)."""
    return mesh.boundary_vertex_weights()[:, None] * spec.matrix()


# ----------------------------------------------------------------------
class AssembledSystem:
    """All matrices of the shifted form on one mesh.

    Attributes
    ----------
    K, K_id : (n, n)
        Stiffness for the coefficient field and for the identity field.
    mass : (n,)
        Lumped mass diagonal.
    M_consistent : (n, n)
    Gamma : (nb, n), Bw : (nb, nb)
    FormA, FormAtilde : (n, n)
        Boundary-coupled form and its alpha-shifted version.
    FormA_adj, FormAtilde_adj : (n, n)
        Same built from the transposed field and the weighted adjoint of
        the boundary operator; equals the transpose entrywise.
    H1 : (n, n)
        Discrete H1 Gram matrix K_id + diag(mass).
    trace_norm_sq : float
        Largest generalized eigenvalue of (Gamma^t diag(w) Gamma, H1).
    admissibility : AdmissibilityReport
    """

    def __init__(self, mesh, field, spec, alpha):
        self.mesh = mesh
        self.field = field
        self.spec = spec
        self.alpha = float(alpha)

        self.K = assemble_stiffness(mesh, field)
        self.K_id = assemble_stiffness(
            mesh, CoefficientField.isotropic(mesh, 1.0))
        self.mass = assemble_lumped_mass(mesh)
        self.M_consistent = assemble_consistent_mass(mesh)
        self.Gamma = trace_matrix(mesh)
        self.boundary_weights = mesh.boundary_vertex_weights()
        self.Bw = assemble_boundary_term(mesh, spec)

        Mdiag = np.diag(self.mass)
        self.FormA = self.K + self.Gamma.T @ self.Bw @ self.Gamma
        self.FormAtilde = self.FormA + self.alpha * Mdiag
        self.H1 = self.K_id + Mdiag

        K_adj = assemble_stiffness(mesh, field.transposed())
        Bw_adj = self.boundary_weights[:, None] * spec.adjoint_matrix()
        self.FormA_adj = K_adj + self.Gamma.T @ Bw_adj @ self.Gamma
        self.FormAtilde_adj = self.FormA_adj + self.alpha * Mdiag

        S = self.Gamma.T @ (self.boundary_weights[:, None] * self.Gamma)
        self.trace_norm_sq = compute_trace_norm(S, self.H1)
        self.admissibility = check_admissibility(
            spec, self.alpha, self.trace_norm_sq)

    @property
    def n(self):
        return self.mesh.n_vertices

    def form_with_boundary(self, spec):
        """FormAtilde rebuilt with a different boundary operator, same field
        and shift."""
        Bw = self.boundary_weights[:, None] * spec.matrix()
        return (self.K + self.Gamma.T @ Bw @ self.Gamma
                + self.alpha * np.diag(self.mass))

    def h1_norm(self, u):
        return math.sqrt(max(float(u @ self.H1 @ u), 0.0))

    def l2_norm(self, u):
        return math.sqrt(float(self.mass @ (u * u)))

    def l1_norm(self, u):
        return float(self.mass @ np.abs(u))


def assemble_system(mesh, field, spec, alpha=None):
    """Assemble every matrix of the laboratory on one mesh.

    ``alpha`` defaults to the field's certified ellipticity constant, which
    is the only value for which the shifted-form inequalities are claimed.
    """
    if alpha is None:
        alpha = field.alpha
    return AssembledSystem(mesh, field, spec, alpha)


# ----------------------------------------------------------------------
def compute_trace_norm(S, H1, tol=1e-10, max_iterations=10000, shift=0.0):
    """Largest generalized eigenvalue of (S, H1) by power iteration on the
    H1-solve, with an optional spectral shift.

    Both matrices must be symmetric and H1 positive definite; the pencil
    then has a real nonnegative spectrum and the Rayleigh quotient
    converges monotonically up to roundoff.
    """
    factor = cho_factor(H1)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(len(H1))
    x /= math.sqrt(float(x @ H1 @ x))
    value = float(x @ S @ x)
    for _ in range(max_iterations):
        y = cho_solve(factor, S @ x) + shift * x
        norm = math.sqrt(float(y @ H1 @ y))
        if norm == 0.0:
            return 0.0
        x = y / norm
        new_value = float(x @ S @ x) / float(x @ H1 @ x)
        if abs(new_value - value) <= tol * abs(new_value):
            return float(new_value)
        value = new_value
    raise RuntimeError(
        f"trace norm power iteration did not converge within "
        f"{max_iterations} iterations (last value {value:.6g})")


# ----------------------------------------------------------------------
@dataclass
class AccretivityReport:
    status: str                 # "passed" | "failed" | "hypothesis unmet"
    lambda_min: float
    scale: float
    tolerance: float

    def as_dict(self):
        return {
            "status": self.status,
            "lambda_min": self.lambda_min,
            "scale": self.scale,
            "tolerance": self.tolerance,
        }


def check_accretivity(system, tol=1e-10):
    """Verify that the shifted form dominates the H1 Gram matrix:
    sym(FormAtilde - H1) must be positive semidefinite up to
    tol * ||FormAtilde||.

    Requires the weaker admissibility condition; otherwise the check is
    reported as hypothesis unmet rather than failed.
    """
    scale = float(np.linalg.norm(system.FormAtilde, 2))
    if not system.admissibility.accretive:
        return AccretivityReport("hypothesis unmet", math.nan, scale, tol)
    diff = system.FormAtilde - system.H1
    lam = float(np.linalg.eigvalsh(0.5 * (diff + diff.T)).min())
    status = "passed" if lam >= -tol * scale else "failed"
    return AccretivityReport(status, lam, scale, tol)


@dataclass
class ContinuityReport:
    max_ratio: float
    bound_constant: float
    samples: int
    seed: int
    passed: bool

    def as_dict(self):
        return {
            "max_ratio": self.max_ratio,
            "bound_constant": self.bound_constant,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
        }


def check_continuity(system, samples=200, seed=2024):
    """Sampled check of the continuity bound

        |v^t FormAtilde u| <= (d^2 sup|A| + norm2 tr^2) |u|_H1 |v|_H1
                              + alpha |u|_L2 |v|_L2.

    Reports the largest observed ratio of left to right side.
    """
    d = system.mesh.dim
    const = (d * d * system.field.sup_norm
             + system.spec.norm2 * system.trace_norm_sq)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = rng.standard_normal(system.n)
        v = rng.standard_normal(system.n)
        lhs = abs(float(v @ system.FormAtilde @ u))
        rhs = (const * system.h1_norm(u) * system.h1_norm(v)
               + system.alpha * system.l2_norm(u) * system.l2_norm(v))
        worst = max(worst, lhs / rhs)
    return ContinuityReport(
        max_ratio=float(worst),
        bound_constant=float(const),
        samples=samples,
        seed=seed,
        passed=bool(worst <= 1.0 + 1e-10),
    )


# ----------------------------------------------------------------------
def export_coordinate_format(matrix, target):
    """Write nonzero entries as ``row col value`` lines (17 significant
    digits, row-major)."""
    matrix = np.asarray(matrix)
    lines = []
    for i, j in zip(*np.nonzero(matrix)):
        lines.append(f"{i} {j} {matrix[i, j]:.17g}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text
