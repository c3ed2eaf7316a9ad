"""Produce the imported ball mesh asset (data/sphere_bulk.mesh).

Builds a Kuhn tetrahedral lattice on [-1,1]^3 and maps it onto the unit
ball with the radial max-norm/2-norm scaling x -> x * |x|_inf / |x|_2,
which sends cube shells to spheres.  The solver library never generates
ball meshes itself; this one-off script exists so the committed asset
has reproducible provenance.

Usage: python3 scripts/make_sphere_mesh.py [n] [outfile]
"""

import sys

import numpy as np

sys.path.insert(0, "src")

from rdfem.mesh import Mesh, cell_volumes, check_conforming, save_mesh, total_volume
from rdfem.mesh import unit_cube_mesh


def ball_mesh(n: int) -> Mesh:
    cube = unit_cube_mesh(n)
    pts = 2.0 * cube.vertices - 1.0  # [-1,1]^3
    norm_inf = np.abs(pts).max(axis=1)
    norm_2 = np.linalg.norm(pts, axis=1)
    scale = np.divide(norm_inf, norm_2, out=np.ones_like(norm_2), where=norm_2 > 0)
    mapped = pts * scale[:, None]
    return Mesh(dim=3, vertices=mapped, cells=cube.cells)


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    out = sys.argv[2] if len(sys.argv) > 2 else "data/sphere_bulk.mesh"
    mesh = ball_mesh(n)
    check_conforming(mesh)
    vols = cell_volumes(mesh)
    print(f"n={n}: {mesh.n_vertices} vertices, {mesh.n_cells} tets, "
          f"min vol {vols.min():.3e}, total {total_volume(mesh):.6f} "
          f"(exact ball {4 * np.pi / 3:.6f})")
    save_mesh(mesh, out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
