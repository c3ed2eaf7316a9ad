"""Simplicial meshes of the computational domains.

Generates structured triangulations of the unit square and unit cube,
reads/writes a plain ASCII mesh format (so externally produced meshes,
e.g. a tetrahedralized ball, can be imported), and provides the
geometric queries the assembly and convergence studies need.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mesh",
    "MeshSpacing",
    "MeshFormatError",
    "MeshValidationError",
    "unit_square_mesh",
    "unit_cube_mesh",
    "load_mesh",
    "save_mesh",
    "mesh_spacing",
    "cell_volumes",
    "total_volume",
    "check_conforming",
]


class MeshFormatError(ValueError):
    """Raised when a mesh file cannot be parsed; carries the offending line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MeshValidationError(ValueError):
    """Raised when mesh data violates a structural invariant."""


@dataclass(eq=False)
class Mesh:
    """Simplicial triangulation: triangles (dim=2) or tetrahedra (dim=3).

    Vertices and cells are read-only arrays; a mesh never changes after
    construction, so it is safe to share across threads.
    """

    dim: int
    vertices: np.ndarray  # (n_vertices, dim) float
    cells: np.ndarray     # (n_cells, dim+1) int
    struct_n: int | None = field(default=None)  # 1/h spacing of generated grids

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        self.cells = np.ascontiguousarray(np.asarray(self.cells, dtype=np.int64))
        self.vertices.setflags(write=False)
        self.cells.setflags(write=False)
        _validate(self)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]


@dataclass(frozen=True)
class MeshSpacing:
    """Mesh resolution: h_max is the longest edge, h_struct the grid spacing 1/n
    (None for imported meshes)."""

    h_max: float
    h_struct: float | None


def _validate(mesh: Mesh) -> None:
    if mesh.dim not in (2, 3):
        raise MeshValidationError(f"dim must be 2 or 3, got {mesh.dim}")
    if mesh.vertices.ndim != 2 or mesh.vertices.shape[1] != mesh.dim:
        raise MeshValidationError("vertices must have shape (n_vertices, dim)")
    if mesh.cells.ndim != 2 or mesh.cells.shape[1] != mesh.dim + 1:
        raise MeshValidationError("cells must have shape (n_cells, dim+1)")
    if not np.isfinite(mesh.vertices).all():
        raise MeshValidationError("non-finite vertex coordinate")
    n = mesh.vertices.shape[0]
    if mesh.cells.size:
        if mesh.cells.min() < 0 or mesh.cells.max() >= n:
            raise MeshValidationError("cell vertex index out of range")
        sorted_cells = np.sort(mesh.cells, axis=1)
        if (np.diff(sorted_cells, axis=1) == 0).any():
            raise MeshValidationError("cell with repeated vertex index")
        vols = cell_volumes(mesh)
        if (vols <= 0.0).any():
            bad = int(np.argmin(vols))
            raise MeshValidationError(
                f"cell {bad} has non-positive volume {vols[bad]:.3e}"
            )


def cell_volumes(mesh: Mesh) -> np.ndarray:
    """Signed volumes (areas in 2D) of all cells; positive for valid meshes."""
    v = mesh.vertices[mesh.cells]  # (nc, dim+1, dim)
    edges = v[:, 1:, :] - v[:, :1, :]  # (nc, dim, dim)
    det = np.linalg.det(edges)
    return det / (2.0 if mesh.dim == 2 else 6.0)


def total_volume(mesh: Mesh) -> float:
    return float(cell_volumes(mesh).sum())


def unit_square_mesh(n: int, diagonal: str = "alternating") -> Mesh:
    """Uniform triangulation of [0,1]^2: n*n squares of side 1/n, each split
    into two triangles. (n+1)^2 vertices, 2n^2 cells.

    diagonal='alternating' (default) flips the split direction on a
    checkerboard, which keeps the triangulation symmetric and its L2 error
    free of the odd-order term a one-direction split introduces;
    diagonal='same' uses one direction everywhere.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if diagonal not in ("alternating", "same"):
        raise ValueError(f"unknown diagonal pattern {diagonal!r}")
    xs = np.linspace(0.0, 1.0, n + 1)
    yy, xx = np.meshgrid(xs, xs, indexing="ij")  # vertex id = j*(n+1) + i
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    main = np.ones(len(i), dtype=bool)  # diagonal v00 -> v11, both triangles CCW
    if diagonal == "alternating":
        main = (i + j) % 2 == 0
    cells = np.empty((2 * len(i), 3), dtype=np.int64)
    cells[0::2][main] = np.column_stack([v00, v10, v11])[main]
    cells[1::2][main] = np.column_stack([v00, v11, v01])[main]
    anti = ~main
    cells[0::2][anti] = np.column_stack([v00, v10, v01])[anti]
    cells[1::2][anti] = np.column_stack([v10, v11, v01])[anti]
    return Mesh(dim=2, vertices=vertices, cells=cells, struct_n=n)


# Kuhn split of the unit cube: one tetrahedron per permutation of the axes,
# all sharing the main diagonal.  Translation-invariant, hence conforming
# across cube faces.
_KUHN_PERMS = list(itertools.permutations(range(3)))


def unit_cube_mesh(n: int) -> Mesh:
    """Tetrahedral mesh of [0,1]^3: n^3 cubes, 6 tetrahedra each (Kuhn
    decomposition). (n+1)^3 vertices, 6n^3 cells."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    xs = np.linspace(0.0, 1.0, n + 1)
    zz, yy, xx = np.meshgrid(xs, xs, xs, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def vid(ix, iy, iz):
        return (iz * (n + 1) + iy) * (n + 1) + ix

    corners = np.arange(n)
    ix, iy, iz = [a.ravel() for a in np.meshgrid(corners, corners, corners, indexing="ij")]

    cell_blocks = []
    for perm in _KUHN_PERMS:
        offs = np.zeros((4, 3), dtype=np.int64)
        for step, axis in enumerate(perm):
            offs[step + 1 :, axis] = 1  # walk the cube along perm's axis order
        tet = np.stack(
            [vid(ix + o[0], iy + o[1], iz + o[2]) for o in offs], axis=1
        )
        # odd permutations produce negatively oriented tets; swap to fix
        parity = _perm_parity(perm)
        if parity < 0:
            tet = tet[:, [0, 2, 1, 3]]
        cell_blocks.append(tet)
    cells = np.vstack(cell_blocks)
    return Mesh(dim=3, vertices=vertices, cells=cells, struct_n=n)


def _perm_parity(perm) -> int:
    inversions = sum(
        1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


def mesh_spacing(mesh: Mesh) -> MeshSpacing:
    """Longest edge over all cells, plus the structured spacing when known."""
    edges = _cell_edges(mesh.dim)
    v = mesh.vertices[mesh.cells]
    h_max = 0.0
    for a, b in edges:
        lengths = np.linalg.norm(v[:, a, :] - v[:, b, :], axis=1)
        h_max = max(h_max, float(lengths.max()))
    h_struct = 1.0 / mesh.struct_n if mesh.struct_n else None
    return MeshSpacing(h_max=h_max, h_struct=h_struct)


def _cell_edges(dim: int):
    return list(itertools.combinations(range(dim + 1), 2))


def save_mesh(mesh: Mesh, path) -> None:
    """Write the ASCII mesh format.

    Line 1: ``dim n_vertices n_cells``; then one vertex per line
    (shortest round-trip decimals), then one cell per line (zero-based
    indices).  Reproducible byte-for-byte for a given mesh.
    """
    lines = [f"{mesh.dim} {mesh.n_vertices} {mesh.n_cells}"]
    for vtx in mesh.vertices:
        lines.append(" ".join(repr(float(c)) for c in vtx))
    for cell in mesh.cells:
        lines.append(" ".join(str(int(i)) for i in cell))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Read the ASCII mesh format; blank lines and ``#`` comments ignored.

    Raises FileNotFoundError for a missing file, MeshFormatError (with the
    line number) for malformed content, MeshValidationError for meshes
    that parse but violate invariants (bad indices, degenerate cells).
    """
    with open(path) as fh:
        raw = fh.readlines()

    records = [
        (no, line.strip())
        for no, line in enumerate(raw, start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not records:
        raise MeshFormatError("empty mesh file")

    no, header = records[0]
    parts = header.split()
    if len(parts) != 3:
        raise MeshFormatError("header must be 'dim n_vertices n_cells'", no)
    try:
        dim, n_vertices, n_cells = (int(p) for p in parts)
    except ValueError:
        raise MeshFormatError("non-integer header field", no) from None
    if dim not in (2, 3):
        raise MeshFormatError(f"dim must be 2 or 3, got {dim}", no)
    if len(records) != 1 + n_vertices + n_cells:
        raise MeshFormatError(
            f"expected {1 + n_vertices + n_cells} records, found {len(records)}",
            records[-1][0],
        )

    vertices = np.empty((n_vertices, dim))
    for row, (no, line) in enumerate(records[1 : 1 + n_vertices]):
        parts = line.split()
        if len(parts) != dim:
            raise MeshFormatError(f"expected {dim} coordinates", no)
        try:
            vertices[row] = [float(p) for p in parts]
        except ValueError:
            raise MeshFormatError("non-numeric coordinate", no) from None

    cells = np.empty((n_cells, dim + 1), dtype=np.int64)
    for row, (no, line) in enumerate(records[1 + n_vertices :]):
        parts = line.split()
        if len(parts) != dim + 1:
            raise MeshFormatError(f"expected {dim + 1} vertex indices", no)
        try:
            cells[row] = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError("non-integer vertex index", no) from None

    return Mesh(dim=dim, vertices=vertices, cells=cells)


def check_conforming(mesh: Mesh) -> None:
    """Verify facet conformity: every facet (edge in 2D, face in 3D) is
    shared by exactly one or two cells. Raises MeshValidationError."""
    d = mesh.dim
    facets = {}
    for ci, cell in enumerate(mesh.cells):
        for drop in range(d + 1):
            facet = tuple(sorted(np.delete(cell, drop)))
            facets[facet] = facets.get(facet, 0) + 1
    worst = max(facets.values())
    if worst > 2:
        raise MeshValidationError(
            f"non-conforming mesh: a facet is shared by {worst} cells"
        )
