"""Structured simplicial meshes of boxes and L-shaped domains.

Vertices are numbered lexicographically by grid index, cells are oriented
positively, and boundary facets are recovered from cell connectivity (a
facet is on the boundary iff it belongs to exactly one cell).  In one
dimension the two endpoint "facets" carry the counting measure, so facet
area is 1 there.
"""

import math

import numpy as np

__all__ = [
    "Mesh",
    "MeshError",
    "build_box_mesh",
    "build_lshape_mesh",
    "dump_mesh",
]

# permutations of (0, 1, 2) with their parity; a hexahedron splits into the
# six path tetrahedra corner -> corner + e_a -> ... -> opposite corner
_HEX_PERMUTATIONS = [
    ((0, 1, 2), +1),
    ((0, 2, 1), -1),
    ((1, 0, 2), -1),
    ((1, 2, 0), +1),
    ((2, 0, 1), +1),
    ((2, 1, 0), -1),
]


class MeshError(Exception):
    """Raised for invalid mesh topology or geometry."""


class Mesh:
    """Simplicial mesh: vertex coordinates plus cell connectivity.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    vertices : (n, dim) float array
        Vertex coordinates.
    cells : (m, dim + 1) int array
        Vertex indices per cell, positively oriented.

    Derived data (boundary facets with owning cell, facet areas, cell
    volumes) is computed eagerly so invalid input fails fast.
    """

    def __init__(self, dim, vertices, cells):
        if dim not in (1, 2, 3):
            raise MeshError(f"unsupported dimension {dim}")
        self.dim = dim
        self.vertices = np.asarray(vertices, dtype=float)
        self.cells = np.asarray(cells, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != dim:
            raise MeshError("vertex array must have shape (n, dim)")
        if self.cells.ndim != 2 or self.cells.shape[1] != dim + 1:
            raise MeshError("cell array must have shape (m, dim + 1)")
        if self.cells.size and (self.cells.min() < 0
                                or self.cells.max() >= len(self.vertices)):
            raise MeshError("cell refers to a vertex that does not exist")

        self.cell_volumes = self._compute_volumes()
        if np.any(self.cell_volumes <= 0.0):
            bad = int(np.argmax(self.cell_volumes <= 0.0))
            raise MeshError(f"cell {bad} is degenerate or negatively oriented")

        self.boundary_facets, self.facet_cells = self._extract_boundary()
        self.facet_areas = self._compute_facet_areas()
        self.boundary_vertices = np.unique(self.boundary_facets)

    # ------------------------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def volume(self):
        return float(self.cell_volumes.sum())

    @property
    def boundary_area(self):
        return float(self.facet_areas.sum())

    @property
    def mesh_size(self):
        """Largest cell diameter (max pairwise vertex distance per cell)."""
        h = 0.0
        for cell in self.cells:
            pts = self.vertices[cell]
            for a in range(len(cell)):
                for b in range(a + 1, len(cell)):
                    h = max(h, float(np.linalg.norm(pts[a] - pts[b])))
        return h

    @property
    def min_edge_length(self):
        """Shortest cell edge; squared, this is the smallest diffusion time
        the mesh can resolve."""
        h = math.inf
        for cell in self.cells:
            pts = self.vertices[cell]
            for a in range(len(cell)):
                for b in range(a + 1, len(cell)):
                    h = min(h, float(np.linalg.norm(pts[a] - pts[b])))
        return h

    def boundary_vertex_weights(self):
        """Lumped boundary measure: each facet spreads its area equally
        over its ``dim`` vertices.  Returns weights aligned with
        ``boundary_vertices``.
        """
        acc = np.zeros(self.n_vertices)
        for facet, area in zip(self.boundary_facets, self.facet_areas):
            acc[facet] += area / self.dim
        return acc[self.boundary_vertices]

    # ------------------------------------------------------------------
    def _compute_volumes(self):
        d = self.dim
        vols = np.empty(len(self.cells))
        for c, cell in enumerate(self.cells):
            pts = self.vertices[cell]
            edges = pts[1:] - pts[0]
            vols[c] = np.linalg.det(edges) / math.factorial(d)
        return vols

    def _extract_boundary(self):
        d = self.dim
        seen = {}
        for c, cell in enumerate(self.cells):
            for omit in range(d + 1):
                facet = tuple(sorted(np.delete(cell, omit)))
                seen.setdefault(facet, []).append(c)
        facets, owners = [], []
        for c, cell in enumerate(self.cells):
            for omit in range(d + 1):
                facet = tuple(sorted(np.delete(cell, omit)))
                hits = seen[facet]
                if len(hits) == 1:
                    facets.append(facet)
                    owners.append(c)
                elif len(hits) > 2:
                    raise MeshError(f"facet {facet} shared by {len(hits)} cells")
        return (np.array(facets, dtype=int).reshape(len(facets), d),
                np.array(owners, dtype=int))

    def _compute_facet_areas(self):
        d = self.dim
        areas = np.empty(len(self.boundary_facets))
        for f, facet in enumerate(self.boundary_facets):
            pts = self.vertices[facet]
            if d == 1:
                areas[f] = 1.0        # counting measure on the endpoints
            elif d == 2:
                areas[f] = float(np.linalg.norm(pts[1] - pts[0]))
            else:
                cross = np.cross(pts[1] - pts[0], pts[2] - pts[0])
                areas[f] = 0.5 * float(np.linalg.norm(cross))
        return areas


# ----------------------------------------------------------------------
def _grid_vertices(extents, divisions):
    axes = [np.linspace(0.0, ext, div + 1) for ext, div in zip(extents, divisions)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _simplices_from_boxes(dim, divisions, keep):
    """Split the kept grid boxes into simplices.

    ``keep`` maps a box multi-index to True/False.  Returns cell
    connectivity in terms of grid vertex ids (C-order ravel).
    """
    shape = tuple(div + 1 for div in divisions)

    def vid(idx):
        return int(np.ravel_multi_index(idx, shape))

    cells = []
    for box in np.ndindex(*divisions):
        if not keep(box):
            continue
        if dim == 1:
            i = box[0]
            cells.append((vid((i,)), vid((i + 1,))))
        elif dim == 2:
            i, j = box
            v00 = vid((i, j))
            v10 = vid((i + 1, j))
            v01 = vid((i, j + 1))
            v11 = vid((i + 1, j + 1))
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
        else:
            corner = np.array(box)
            for perm, parity in _HEX_PERMUTATIONS:
                steps = [corner.copy()]
                for axis in perm:
                    nxt = steps[-1].copy()
                    nxt[axis] += 1
                    steps.append(nxt)
                tet = [vid(tuple(s)) for s in steps]
                if parity < 0:
                    tet[2], tet[3] = tet[3], tet[2]
                cells.append(tuple(tet))
    return np.array(cells, dtype=int)


def build_box_mesh(extents, divisions):
    """Mesh the box [0, e_1] x ... x [0, e_d].

    Parameters
    ----------
    extents : sequence of float
        Positive side lengths; the length fixes the dimension.
    divisions : sequence of int
        Cells per axis, one positive entry per side.

    Returns
    -------
    Mesh
        Intervals (d = 1), two triangles per grid square (d = 2) or six
        tetrahedra per grid box (d = 3), all positively oriented.
    """
    extents = tuple(float(e) for e in np.atleast_1d(extents))
    divisions = tuple(int(n) for n in np.atleast_1d(divisions))
    if len(extents) != len(divisions):
        raise ValueError("extents and divisions must have equal length")
    dim = len(extents)
    if dim not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
    if any(e <= 0 for e in extents):
        raise ValueError(f"extents must be positive, got {extents}")
    if any(n <= 0 for n in divisions):
        raise ValueError(f"divisions must be positive, got {divisions}")

    vertices = _grid_vertices(extents, divisions)
    cells = _simplices_from_boxes(dim, divisions, lambda box: True)
    return Mesh(dim, vertices, cells)


def build_lshape_mesh(divisions, dim=2):
    """Mesh [0, 1]^d with the closed corner box [1/2, 1]^d removed.

    Parameters
    ----------
    divisions : int
        Cells per axis of the full unit box; must be even and >= 2 so the
        notch boundary lies on grid planes.
    dim : int
        2 or 3.
    """
    divisions = int(divisions)
    if dim not in (2, 3):
        raise ValueError(f"L-shaped domains need dim 2 or 3, got {dim}")
    if divisions < 2:
        raise ValueError(f"divisions must be >= 2, got {divisions}")
    if divisions % 2 != 0:
        raise ValueError(f"divisions must be even, got {divisions}")

    half = divisions // 2
    all_divs = (divisions,) * dim
    vertices = _grid_vertices((1.0,) * dim, all_divs)
    cells = _simplices_from_boxes(
        dim, all_divs, lambda box: not all(b >= half for b in box))

    used = np.unique(cells)            # ascending == lexicographic grid order
    remap = -np.ones(len(vertices), dtype=int)
    remap[used] = np.arange(len(used))
    return Mesh(dim, vertices[used], remap[cells])


# ----------------------------------------------------------------------
def dump_mesh(mesh, target):
    """Write a plain text dump: one ``v x ...`` line per vertex followed by
    one ``c i0 ...`` line per cell.  Coordinates use shortest round-trip
    decimals.
    """
    lines = []
    for vert in mesh.vertices:
        lines.append("v " + " ".join(repr(float(x)) for x in vert))
    for cell in mesh.cells:
        lines.append("c " + " ".join(str(int(i)) for i in cell))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text
