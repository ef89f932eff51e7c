"""Diffusion coefficients and boundary operators.

A coefficient field is one (possibly nonsymmetric) d x d matrix per cell
with a certified ellipticity constant.  A boundary operator acts on values
at boundary vertices; its discrete L2 and Linf norms on the weighted
boundary space are computed exactly and stored alongside a positive
comparison operator ("bar") that dominates it entrywise.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoefficientField",
    "certify_ellipticity",
    "BoundaryOperatorSpec",
    "build_boundary_operator",
    "coefficient_field_from_config",
    "AdmissibilityReport",
    "check_admissibility",
]


# ----------------------------------------------------------------------
class CoefficientField:
    """Per-cell diffusion matrices with certified ellipticity.

    Parameters
    ----------
    mesh : Mesh
    per_cell : (n_cells, d, d) float array
        One matrix per cell; symmetry is not assumed.

    Attributes
    ----------
    alpha : float
        Certified ellipticity constant: the smallest eigenvalue of the
        symmetric part over all cells.
    sup_norm : float
        Largest absolute matrix entry over all cells.
    """

    def __init__(self, mesh, per_cell):
        per_cell = np.asarray(per_cell, dtype=float)
        d = mesh.dim
        if per_cell.shape != (mesh.n_cells, d, d):
            raise ValueError(
                f"need shape {(mesh.n_cells, d, d)}, got {per_cell.shape}")
        self.mesh = mesh
        self.per_cell = per_cell
        self.alpha = certify_ellipticity(self)
        self.sup_norm = float(np.abs(per_cell).max())

    @classmethod
    def isotropic(cls, mesh, value):
        """value * identity on every cell."""
        value = float(value)
        eye = np.eye(mesh.dim)
        return cls(mesh, np.tile(value * eye, (mesh.n_cells, 1, 1)))

    @classmethod
    def diagonal(cls, mesh, values):
        """Constant diagonal matrix diag(values) on every cell."""
        mat = np.diag(np.asarray(values, dtype=float))
        if mat.shape != (mesh.dim, mesh.dim):
            raise ValueError(f"need {mesh.dim} diagonal values")
        return cls(mesh, np.tile(mat, (mesh.n_cells, 1, 1)))

    @classmethod
    def matrix(cls, mesh, entries):
        """Full matrix coefficient: one d x d matrix for the whole domain
        or one per cell."""
        entries = np.asarray(entries, dtype=float)
        if entries.shape == (mesh.dim, mesh.dim):
            entries = np.tile(entries, (mesh.n_cells, 1, 1))
        return cls(mesh, entries)

    @property
    def is_isotropic(self):
        """True when every cell matrix is a scalar multiple of the identity."""
        d = self.mesh.dim
        scal = self.per_cell[:, 0, 0]
        target = scal[:, None, None] * np.eye(d)
        return bool(np.allclose(self.per_cell, target, rtol=0.0, atol=1e-14))

    def transposed(self):
        """Field with every cell matrix transposed."""
        out = CoefficientField.__new__(CoefficientField)
        out.mesh = self.mesh
        out.per_cell = np.transpose(self.per_cell, (0, 2, 1)).copy()
        out.alpha = self.alpha          # sym part unchanged
        out.sup_norm = self.sup_norm
        return out


def certify_ellipticity(field):
    """Smallest eigenvalue of the symmetric part over all cells.

    Raises ``ValueError`` if the field is not uniformly elliptic.
    """
    sym = 0.5 * (field.per_cell + np.transpose(field.per_cell, (0, 2, 1)))
    eigs = np.linalg.eigvalsh(sym)
    alpha = float(eigs.min())
    if alpha <= 0.0:
        worst = int(np.argmin(eigs[:, 0]))
        raise ValueError(
            f"coefficient is not elliptic: symmetric part has eigenvalue "
            f"{alpha:.6g} on cell {worst}")
    return alpha


def coefficient_field_from_config(mesh, config):
    """Build a field from a flat config mapping (kind + numbers)."""
    kind = config.get("kind", "isotropic")
    if kind == "isotropic":
        return CoefficientField.isotropic(mesh, config["value"])
    if kind == "diagonal":
        return CoefficientField.diagonal(mesh, config["values"])
    if kind == "matrix":
        entries = np.asarray(config["entries"], dtype=float)
        return CoefficientField.matrix(mesh, entries.reshape(mesh.dim, mesh.dim))
    raise ValueError(f"unknown coefficient kind {kind!r}")


# ----------------------------------------------------------------------
class BoundaryOperatorSpec:
    """Boundary operator on values at boundary vertices.

    The operator is stored through its application matrix ``T`` mapping
    boundary vertex values to boundary vertex values:

    * ``zero``            T = 0
    * ``multiplication``  T = diag(beta)
    * ``kernel``          T = Kmat @ diag(w), integration of k(x, y)
                          against the lumped boundary measure w
    * ``dense``           T = Bm, a raw matrix on vertex values

    ``norm2`` / ``norm_inf`` are the exact operator norms of ``T`` on the
    w-weighted L2 and the Linf boundary spaces.  ``bar`` data describes the
    positive comparison operator with entrywise absolute kernel.
    """

    def __init__(self, kind, coords, weights, application, bar_application,
                 label=""):
        self.kind = kind
        self.coords = coords
        self.weights = np.asarray(weights, dtype=float)
        self._T = np.asarray(application, dtype=float)
        self._Tbar = np.asarray(bar_application, dtype=float)
        self.label = label or kind

        self.norm2, self.norm_inf = _operator_norms(self._T, self.weights)
        self.norm2_bar, self.norm_inf_bar = _operator_norms(
            self._Tbar, self.weights)

    # -- construction ---------------------------------------------------
    @classmethod
    def zero(cls, mesh):
        nb = len(mesh.boundary_vertices)
        z = np.zeros((nb, nb))
        return cls("zero", mesh.vertices[mesh.boundary_vertices],
                   mesh.boundary_vertex_weights(), z, z)

    @classmethod
    def multiplication(cls, mesh, beta):
        coords = mesh.vertices[mesh.boundary_vertices]
        nb = len(coords)
        beta = np.broadcast_to(np.asarray(beta, dtype=float), (nb,)).copy()
        return cls("multiplication", coords, mesh.boundary_vertex_weights(),
                   np.diag(beta), np.diag(np.abs(beta)),
                   label=f"multiplication({_short(beta)})")

    @classmethod
    def kernel(cls, mesh, values):
        """``values``: (nb, nb) samples k(x_i, x_j) or a callable k(x, y)."""
        coords = mesh.vertices[mesh.boundary_vertices]
        w = mesh.boundary_vertex_weights()
        nb = len(coords)
        if callable(values):
            kmat = np.empty((nb, nb))
            for i in range(nb):
                for j in range(nb):
                    kmat[i, j] = values(coords[i], coords[j])
        else:
            kmat = np.asarray(values, dtype=float)
            if kmat.shape != (nb, nb):
                raise ValueError(f"kernel samples must have shape {(nb, nb)}")
        return cls("kernel", coords, w, kmat * w[None, :],
                   np.abs(kmat) * w[None, :], label="kernel")

    @classmethod
    def dense(cls, mesh, matrix):
        coords = mesh.vertices[mesh.boundary_vertices]
        matrix = np.asarray(matrix, dtype=float)
        nb = len(coords)
        if matrix.shape != (nb, nb):
            raise ValueError(f"dense operator must have shape {(nb, nb)}")
        return cls("dense", coords, mesh.boundary_vertex_weights(),
                   matrix, np.abs(matrix), label="dense")

    # -- operator data --------------------------------------------------
    def matrix(self):
        """Application matrix on boundary vertex values."""
        return self._T.copy()

    def bar_matrix(self):
        return self._Tbar.copy()

    def adjoint_matrix(self):
        """Adjoint on the w-weighted boundary space: W^-1 T^t W."""
        w = self.weights
        return (self._T.T * w[None, :]) / w[:, None]

    # -- derived operators ----------------------------------------------
    def bar(self):
        """The positive comparison operator itself."""
        return BoundaryOperatorSpec(
            self.kind, self.coords, self.weights, self._Tbar, self._Tbar,
            label=f"bar[{self.label}]")

    def dominating(self):
        """Negated comparison operator; its semigroup dominates this one's."""
        return BoundaryOperatorSpec(
            self.kind, self.coords, self.weights, -self._Tbar, self._Tbar,
            label=f"dominating[{self.label}]")

    def shifted_bar(self, sign):
        """norm_inf_bar * identity +/- bar, as a dense operator."""
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        nb = len(self.weights)
        comb = self.norm_inf_bar * np.eye(nb) + sign * self._Tbar
        tag = "+" if sign > 0 else "-"
        return BoundaryOperatorSpec(
            "dense", self.coords, self.weights, comb, np.abs(comb),
            label=f"inf_shift{tag}[{self.label}]")


def _operator_norms(T, w):
    """Exact discrete operator norms of the application matrix ``T``.

    L2 norm on the w-weighted space comes from the largest singular value
    of W^(1/2) T W^(-1/2); the Linf norm is the max absolute row sum.
    """
    if not np.any(T):
        return 0.0, 0.0
    root = np.sqrt(w)
    scaled = (T * root[:, None]) / root[None, :]
    norm2 = float(np.linalg.norm(scaled, 2))
    norm_inf = float(np.abs(T).sum(axis=1).max())
    return norm2, norm_inf


def _short(arr):
    vals = np.unique(arr)
    if len(vals) == 1:
        return f"{vals[0]:g}"
    return f"{arr.min():g}..{arr.max():g}"


# ----------------------------------------------------------------------
def build_boundary_operator(mesh, config):
    """Build an operator from a config mapping.

    Recognized kinds: ``zero``; ``multiplication`` with ``beta`` (scalar or
    per-boundary-vertex array); ``kernel`` with a ``profile`` selector
    (``constant``, ``gaussian`` with ``width``, ``cosine``) and ``scale``;
    ``dense`` with an inline row-major ``entries`` array.
    """
    kind = config.get("kind", "zero")
    if kind == "zero":
        return BoundaryOperatorSpec.zero(mesh)
    if kind == "multiplication":
        return BoundaryOperatorSpec.multiplication(mesh, config["beta"])
    if kind == "kernel":
        profile = config.get("profile", "constant")
        scale = float(config.get("scale", 1.0))
        if profile == "constant":
            func = lambda x, y: scale
        elif profile == "gaussian":
            width = float(config["width"])
            func = lambda x, y: scale * np.exp(
                -np.sum((x - y) ** 2) / (2.0 * width ** 2))
        elif profile == "cosine":
            if mesh.dim < 2:
                raise ValueError("cosine kernel needs dim >= 2")
            func = lambda x, y: scale * (
                np.cos(np.pi * x[0]) * np.cos(np.pi * y[1])
                - np.cos(np.pi * x[1]) * np.cos(np.pi * y[0]))
        else:
            raise ValueError(f"unknown kernel profile {profile!r}")
        spec = BoundaryOperatorSpec.kernel(mesh, func)
        spec.label = f"kernel({profile}, scale={scale:g})"
        return spec
    if kind == "dense":
        nb = len(mesh.boundary_vertices)
        entries = np.asarray(config["entries"], dtype=float).reshape(nb, nb)
        return BoundaryOperatorSpec.dense(mesh, entries)
    raise ValueError(f"unknown boundary operator kind {kind!r}")


# ----------------------------------------------------------------------
@dataclass
class AdmissibilityReport:
    """Outcome of the coupling condition between diffusion strength and
    boundary operator size.

    ``admissible`` uses the comparison operator's norms (the hypothesis of
    the smoothing theory); ``accretive`` is the weaker condition with the
    operator's own L2 norm that already makes the shifted form coercive.
    """

    alpha: float
    trace_norm_sq: float
    admissible: bool
    margin: float
    accretive: bool
    accretive_margin: float

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "trace_norm_sq": self.trace_norm_sq,
            "admissible": self.admissible,
            "margin": self.margin,
            "accretive": self.accretive,
            "accretive_margin": self.accretive_margin,
        }


def check_admissibility(spec, alpha, trace_norm_sq):
    """Check 1 + (norm_inf_bar + norm2_bar) * trace_norm_sq <= alpha and the
    weaker variant 1 + norm2 * trace_norm_sq <= alpha.
    """
    alpha = float(alpha)
    trace_norm_sq = float(trace_norm_sq)
    margin = alpha - 1.0 - (spec.norm_inf_bar + spec.norm2_bar) * trace_norm_sq
    accretive_margin = alpha - 1.0 - spec.norm2 * trace_norm_sq
    return AdmissibilityReport(
        alpha=alpha,
        trace_norm_sq=trace_norm_sq,
        admissible=bool(margin >= 0.0),
        margin=float(margin),
        accretive=bool(accretive_margin >= 0.0),
        accretive_margin=float(accretive_margin),
    )
