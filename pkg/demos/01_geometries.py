"""Tour of the built-in geometries.

Every mesh is a simplicial subdivision of an axis-aligned box, or of an
L-shape obtained by removing one quadrant (octant in 3d) from a box.
Each box cell is split into dim! simplices along its main diagonal, so
counts, volumes, and boundary areas all have closed forms that the
printed table can be checked against by hand.
"""

import io

from robinheat import build_box_mesh, build_lshape_mesh, dump_mesh


def describe(label, mesh):
    print(f"{label:<22} dim={mesh.dim}  vertices={mesh.n_vertices:>5}  "
          f"cells={mesh.n_cells:>6}  volume={mesh.volume:.4f}  "
          f"boundary={mesh.boundary_area:.4f}  "
          f"min_edge={mesh.min_edge_length:.4f}")


def main():
    describe("interval, 8 cells", build_box_mesh((1.0,), (8,)))
    describe("unit square, 4x4", build_box_mesh((1.0, 1.0), (4, 4)))
    describe("tall rectangle", build_box_mesh((1.0, 3.0), (4, 12)))
    describe("unit cube, 6^3", build_box_mesh((1.0, 1.0, 1.0), (6, 6, 6)))
    describe("L-shape, planar", build_lshape_mesh(4))
    describe("L-shape, solid", build_lshape_mesh(4, dim=3))

    print()
    print("text dump of the 2-cell unit square, the smallest 2d mesh:")
    buffer = io.StringIO()
    dump_mesh(build_box_mesh((1.0, 1.0), (1, 1)), buffer)
    print(buffer.getvalue())


if __name__ == "__main__":
    main()
