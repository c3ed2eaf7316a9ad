"""P1 finite-element assembly on simplicial meshes.

Builds the mass matrix M, stiffness matrix A, the state-dependent
coupling matrix B(a,b) with entries sum_k sum_l a_k b_l int(phi_k phi_l
phi_i phi_j), and the load vector with entries int(phi_j).  Nodal fields
are plain numpy arrays (one value per mesh vertex); matrices are
scipy CSR.

All quadrature is exact to degree 4, which integrates the quartic
B-integrand exactly; monomial exactness is validated in the test suite.
Assembly scatters element contributions in a fixed order, so repeated
runs produce bit-identical matrices.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "QuadratureRule",
    "EvaluationError",
    "triangle_rule",
    "tetrahedron_rule",
    "quadrature_rule",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_nonlinear_b",
    "assemble_unit_load",
    "interpolate",
    "l2_norm",
    "l2_error_exact",
    "source_load",
    "dump_matrix_market",
    "NonlinearAssembler",
]


class EvaluationError(ValueError):
    """A user-supplied scalar function produced a non-finite value."""


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature on the reference simplex.

    points: barycentric coordinates, shape (nq, dim+1);
    weights: positive, summing to the reference-element volume;
    degree: highest polynomial degree integrated exactly.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        if (self.weights <= 0).any():
            raise ValueError("quadrature weights must be positive")


def triangle_rule() -> QuadratureRule:
    """Six-point degree-4 rule on the reference triangle (Dunavant)."""
    a, b = 0.445948490915965, 0.108103018168070
    c, e = 0.091576213509771, 0.816847572980459
    w1, w2 = 0.223381589678011, 0.109951743655322
    pts = np.array(
        [
            [b, a, a], [a, b, a], [a, a, b],
            [e, c, c], [c, e, c], [c, c, e],
        ]
    )
    wts = np.array([w1, w1, w1, w2, w2, w2]) * 0.5  # reference area 1/2
    return QuadratureRule(dim=2, points=pts, weights=wts, degree=4)


def tetrahedron_rule(n1d: int = 3) -> QuadratureRule:
    """Conical-product Gauss rule on the reference tetrahedron.

    n1d points per direction gives degree 2*n1d-1 >= 5 for the default,
    27 points, all weights positive.
    """
    xj2, wj2 = roots_jacobi(n1d, 2, 0)
    xj1, wj1 = roots_jacobi(n1d, 1, 0)
    xl, wl = roots_legendre(n1d)
    # map [-1,1] with weight (1-x)^alpha onto [0,1]
    t1, w1 = (xj2 + 1) / 2, wj2 / 2**3
    t2, w2 = (xj1 + 1) / 2, wj1 / 2**2
    t3, w3 = (xl + 1) / 2, wl / 2

    pts = []
    wts = []
    for i in range(n1d):
        for j in range(n1d):
            for k in range(n1d):
                x = t1[i]
                y = t2[j] * (1 - t1[i])
                z = t3[k] * (1 - t1[i]) * (1 - t2[j])
                pts.append([1 - x - y - z, x, y, z])
                wts.append(w1[i] * w2[j] * w3[k])
    return QuadratureRule(
        dim=3, points=np.array(pts), weights=np.array(wts), degree=2 * n1d - 1
    )


def quadrature_rule(dim: int, degree: int = 4) -> QuadratureRule:
    if dim == 2:
        if degree > 4:
            raise ValueError("only degree <= 4 available on triangles")
        return triangle_rule()
    if dim == 3:
        return tetrahedron_rule(max(3, (degree + 1 + 1) // 2))
    raise ValueError(f"unsupported dim {dim}")


def reference_monomial_integral(dim: int, exponents) -> float:
    """Exact integral of a barycentric monomial over the reference simplex."""
    total = sum(exponents)
    value = math.factorial(dim) * (1.0 / math.factorial(dim))
    num = 1.0
    for e in exponents:
        num *= math.factorial(e)
    return value * num / math.factorial(total + dim)


class _MeshGeometry:
    """Per-mesh precomputation shared by all assembly routines."""

    def __init__(self, mesh):
        self.mesh = mesh
        d = mesh.dim
        cells = mesh.cells
        v = mesh.vertices[cells]  # (nc, d+1, d)
        edges = np.swapaxes(v[:, 1:, :] - v[:, :1, :], 1, 2)  # (nc, d, d) columns
        self.detj = np.linalg.det(edges)
        self.vols = self.detj / math.factorial(d)
        inv = np.linalg.inv(edges)  # rows of inv are grad(lambda_1..d)
        grads = np.empty((cells.shape[0], d + 1, d))
        grads[:, 1:, :] = inv
        grads[:, 0, :] = -inv.sum(axis=1)
        self.grads = grads

        self.rule = quadrature_rule(d)
        self.phi = self.rule.points  # P1 basis values = barycentric coords
        self.qweights = self.rule.weights
        # physical quadrature points: (nc, nq, d)
        self.qpoints = np.einsum("qi,cid->cqd", self.phi, v)

        nloc = d + 1
        rows = np.repeat(cells, nloc, axis=1).ravel()
        cols = np.tile(cells, (1, nloc)).ravel()
        order = np.lexsort((cols, rows))
        rs, cs = rows[order], cols[order]
        boundary = np.ones(len(rs), dtype=bool)
        boundary[1:] = (rs[1:] != rs[:-1]) | (cs[1:] != cs[:-1])
        unique_id = np.cumsum(boundary) - 1
        # destination CSR slot for each (cell, i, j) contribution
        self.dest = np.empty(len(rows), dtype=np.int64)
        self.dest[order] = unique_id
        self.nnz = int(unique_id[-1]) + 1
        self.indices = cs[boundary]
        counts = np.bincount(rs[boundary], minlength=mesh.n_vertices)
        self.indptr = np.concatenate([[0], np.cumsum(counts)])

        self._mass = None
        self._stiffness = None
        self._load = None

    def scatter(self, local: np.ndarray) -> sp.csr_matrix:
        """Sum per-element (nloc x nloc) blocks into the shared CSR pattern."""
        data = np.zeros(self.nnz)
        np.add.at(data, self.dest, local.ravel())
        return sp.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()),
            shape=(self.mesh.n_vertices, self.mesh.n_vertices),
        )

    @property
    def mass(self) -> sp.csr_matrix:
        if self._mass is None:
            d = self.mesh.dim
            nloc = d + 1
            base = (np.ones((nloc, nloc)) + np.eye(nloc)) / ((d + 1) * (d + 2))
            local = self.vols[:, None, None] * base[None, :, :]
            self._mass = self.scatter(local)
            self._mass.data.setflags(write=False)
        return self._mass

    @property
    def stiffness(self) -> sp.csr_matrix:
        if self._stiffness is None:
            local = self.vols[:, None, None] * np.einsum(
                "cid,cjd->cij", self.grads, self.grads
            )
            self._stiffness = self.scatter(local)
            self._stiffness.data.setflags(write=False)
        return self._stiffness

    @property
    def unit_load(self) -> np.ndarray:
        if self._load is None:
            d = self.mesh.dim
            contrib = np.repeat(self.vols[:, None] / (d + 1), d + 1, axis=1)
            load = np.zeros(self.mesh.n_vertices)
            np.add.at(load, self.mesh.cells, contrib)
            load.setflags(write=False)
            self._load = load
        return self._load

    def nonlinear(self, a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
        cells = self.mesh.cells
        sa = a[cells] @ self.phi.T  # (nc, nq): a_h at quadrature points
        sb = b[cells] @ self.phi.T
        coeff = (self.qweights[None, :] * self.detj[:, None]) * sa * sb
        local = np.einsum("cq,qi,qj->cij", coeff, self.phi, self.phi)
        return self.scatter(local)

    def function_load(self, f, t: float) -> np.ndarray:
        coords = [self.qpoints[:, :, k] for k in range(self.mesh.dim)]
        vals = np.asarray(f(*coords, t), dtype=float)
        if vals.shape != self.qpoints.shape[:2]:
            vals = np.broadcast_to(vals, self.qpoints.shape[:2])
        if not np.isfinite(vals).all():
            raise EvaluationError("source function produced non-finite values")
        contrib = np.einsum(
            "cq,qi->ci", vals * self.qweights[None, :] * self.detj[:, None], self.phi
        )
        load = np.zeros(self.mesh.n_vertices)
        np.add.at(load, self.mesh.cells, contrib)
        return load


_geometry_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def geometry(mesh) -> _MeshGeometry:
    geo = _geometry_cache.get(mesh)
    if geo is None:
        geo = _MeshGeometry(mesh)
        _geometry_cache[mesh] = geo
    return geo


def assemble_mass(mesh) -> sp.csr_matrix:
    """M_ij = int(phi_i phi_j); symmetric positive definite."""
    return geometry(mesh).mass


def assemble_stiffness(mesh) -> sp.csr_matrix:
    """A_ij = int(grad phi_i . grad phi_j); symmetric PSD, constants in kernel."""
    return geometry(mesh).stiffness


def assemble_unit_load(mesh) -> np.ndarray:
    """Load vector with entries int(phi_j); equals M @ ones."""
    return geometry(mesh).unit_load


class NonlinearAssembler:
    """Reusable assembler for B(a,b); amortizes the mesh precomputation."""

    def __init__(self, mesh):
        self._geo = geometry(mesh)
        self.n = mesh.n_vertices

    def __call__(self, a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
        if len(a) != self.n or len(b) != self.n:
            raise ValueError("coefficient vector length does not match mesh")
        return self._geo.nonlinear(np.asarray(a, float), np.asarray(b, float))


def assemble_nonlinear_b(mesh, a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
    """B(a,b)_ij = sum_k sum_l a_k b_l int(phi_k phi_l phi_i phi_j).

    Assembled element-locally with a degree-4 rule (the integrand is
    quartic, so this is exact).  Satisfies B(a,b) = B(b,a) and the cyclic
    identity B(a,b)c = B(a,c)b = B(c,b)a.
    """
    return NonlinearAssembler(mesh)(a, b)


def interpolate(mesh, f, t: float = 0.0) -> np.ndarray:
    """Nodal interpolant: values f(x_i, t) at the mesh vertices.

    f is called vectorized as f(x, y, t) in 2D or f(x, y, z, t) in 3D.
    """
    coords = [mesh.vertices[:, k] for k in range(mesh.dim)]
    vals = np.asarray(f(*coords, t), dtype=float)
    if vals.ndim == 0:
        vals = np.full(mesh.n_vertices, float(vals))
    if vals.shape != (mesh.n_vertices,):
        raise ValueError(f"interpolant has shape {vals.shape}")
    if not np.isfinite(vals).all():
        raise EvaluationError("function produced non-finite nodal values")
    return vals


def l2_norm(mesh, w: np.ndarray) -> float:
    """Discrete L2 function norm sqrt(w' M w) of a nodal field."""
    w = np.asarray(w, float)
    if w.shape != (mesh.n_vertices,):
        raise ValueError("vector length does not match mesh")
    m = geometry(mesh).mass
    return math.sqrt(max(float(w @ (m @ w)), 0.0))


def l2_error_exact(mesh, w: np.ndarray, f, t: float) -> float:
    """||w_h - f(., t)||_L2 by element quadrature (degree-4 exact)."""
    w = np.asarray(w, float)
    if w.shape != (mesh.n_vertices,):
        raise ValueError("vector length does not match mesh")
    geo = geometry(mesh)
    wh = w[mesh.cells] @ geo.phi.T  # (nc, nq)
    coords = [geo.qpoints[:, :, k] for k in range(mesh.dim)]
    fv = np.asarray(f(*coords, t), dtype=float)
    if fv.shape != wh.shape:
        fv = np.broadcast_to(fv, wh.shape)
    diff2 = (wh - fv) ** 2
    total = float(np.einsum("cq,q,c->", diff2, geo.qweights, geo.detj))
    return math.sqrt(max(total, 0.0))


def dump_matrix_market(path, mat, symmetry: str = "general") -> None:
    """Write a sparse matrix in Matrix Market coordinate format."""
    scipy.io.mmwrite(path, sp.coo_matrix(mat), symmetry=symmetry)
