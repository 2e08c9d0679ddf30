"""Structured quadrilateral finite elements (Q1/Q2 Lagrange).

Meshes are tensor grids of axis-aligned rectangles, optionally with a cell
mask so that cross- or L-shaped domains can be represented on the same grid.
Node and element ordering is lexicographic, x-fastest, which fixes the
assembled matrices bit-for-bit.

Coefficients ("space functions") are passed as scalars, vectorized callables
f(x, y), or per-element constant arrays; they are evaluated at quadrature
points, not nodally interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "StructuredMesh",
    "DofPartition",
    "BoundaryEdge",
    "assemble_stiffness",
    "assemble_convection",
    "assemble_mass",
    "assemble_supg",
    "assemble_load",
    "assemble_neumann",
    "supg_tau",
    "boundary_edges",
    "select_edges",
    "nodes_on_line",
    "partition_dofs",
    "dirichlet_columns",
    "match_nodes",
    "restriction_indices",
    "l2_norm",
    "l2_error",
    "write_vtk",
]


def _shape_1d(degree: int, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lagrange values and derivatives on [-1, 1] at points s; (npts, degree+1)."""
    s = np.asarray(s, dtype=float)
    if degree == 1:
        vals = np.stack([(1 - s) / 2, (1 + s) / 2], axis=-1)
        ders = np.stack([-0.5 * np.ones_like(s), 0.5 * np.ones_like(s)], axis=-1)
    elif degree == 2:
        vals = np.stack([s * (s - 1) / 2, 1 - s**2, s * (s + 1) / 2], axis=-1)
        ders = np.stack([s - 0.5, -2 * s, s + 0.5], axis=-1)
    else:
        raise ValueError("only degree 1 and 2 elements are supported")
    return vals, ders


def gauss_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


class StructuredMesh:
    """Tensor grid of rectangles with optional active-cell mask."""

    def __init__(self, x_breaks, y_breaks, degree: int = 1, mask=None):
        self.x_breaks = np.asarray(x_breaks, dtype=float)
        self.y_breaks = np.asarray(y_breaks, dtype=float)
        if np.any(np.diff(self.x_breaks) <= 0) or np.any(np.diff(self.y_breaks) <= 0):
            raise ValueError("grid lines must be strictly increasing")
        if degree not in (1, 2):
            raise ValueError("degree must be 1 or 2")
        self.degree = degree
        ncx, ncy = self.x_breaks.size - 1, self.y_breaks.size - 1
        if mask is None:
            mask = np.ones((ncx, ncy), dtype=bool)
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.shape != (ncx, ncy):
            raise ValueError(f"mask shape must be {(ncx, ncy)}")
        self._build()

    def _build(self):
        d = self.degree
        # per-direction node coordinates: cell boundaries plus interior nodes
        self._xs = _refine_breaks(self.x_breaks, d)
        self._ys = _refine_breaks(self.y_breaks, d)
        nxn = self._xs.size
        cells = np.argwhere(self.mask)          # (n_elems, 2) as (ix, iy)
        order = np.lexsort((cells[:, 0], cells[:, 1]))  # y-major, x-fastest
        self.cells = cells[order]
        nloc = d + 1
        locx, locy = np.meshgrid(np.arange(nloc), np.arange(nloc), indexing="xy")
        locx, locy = locx.ravel(), locy.ravel()  # local ordering, x-fastest
        full = (
            (self.cells[:, 1][:, None] * d + locy[None, :]) * nxn
            + self.cells[:, 0][:, None] * d
            + locx[None, :]
        )
        used = np.unique(full)
        renum = -np.ones(nxn * self._ys.size, dtype=np.int64)
        renum[used] = np.arange(used.size)
        self.connectivity = renum[full]
        gx, gy = np.meshgrid(self._xs, self._ys, indexing="xy")
        self.coords = np.column_stack([gx.ravel()[used], gy.ravel()[used]])
        self.hx = np.diff(self.x_breaks)[self.cells[:, 0]]
        self.hy = np.diff(self.y_breaks)[self.cells[:, 1]]

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elems(self) -> int:
        return self.cells.shape[0]

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.x_breaks[-1] - self.x_breaks[0],
                              self.y_breaks[-1] - self.y_breaks[0]))

    def element_origin(self, e=None) -> tuple[np.ndarray, np.ndarray]:
        """Lower-left corner coordinates of each element."""
        c = self.cells if e is None else self.cells[e]
        return self.x_breaks[c[..., 0]], self.y_breaks[c[..., 1]]

    def quad_coords(self, xi: np.ndarray, eta: np.ndarray):
        """Physical coordinates of reference points (xi, eta) in every element."""
        x0, y0 = self.element_origin()
        xq = x0[:, None] + (xi[None, :] + 1) * 0.5 * self.hx[:, None]
        yq = y0[:, None] + (eta[None, :] + 1) * 0.5 * self.hy[:, None]
        return xq, yq

    def centroids(self):
        x0, y0 = self.element_origin()
        return x0 + 0.5 * self.hx, y0 + 0.5 * self.hy

    def contains(self, x, y, tol: float = 1e-10) -> np.ndarray:
        """Vectorized point-in-active-domain test.

        A point on a grid line (or corner) counts as inside if any touching
        cell is active.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        pad = tol * max(1.0, self.diameter)
        inside = (
            (x >= self.x_breaks[0] - pad) & (x <= self.x_breaks[-1] + pad)
            & (y >= self.y_breaks[0] - pad) & (y <= self.y_breaks[-1] + pad)
        )

        def cells(breaks, v):
            hi = np.clip(np.searchsorted(breaks, v + pad, side="right") - 1,
                         0, breaks.size - 2)
            lo = np.clip(np.searchsorted(breaks, v - pad, side="right") - 1,
                         0, breaks.size - 2)
            return lo, hi

        ix_lo, ix_hi = cells(self.x_breaks, x)
        iy_lo, iy_hi = cells(self.y_breaks, y)
        ok = (self.mask[ix_lo, iy_lo] | self.mask[ix_lo, iy_hi]
              | self.mask[ix_hi, iy_lo] | self.mask[ix_hi, iy_hi])
        return inside & ok


def _refine_breaks(breaks: np.ndarray, degree: int) -> np.ndarray:
    if degree == 1:
        return breaks.copy()
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    out = np.empty(breaks.size + mids.size)
    out[0::2] = breaks
    out[1::2] = mids
    return out


def _quad_rule(mesh: StructuredMesh, npts: int | None):
    if npts is None:
        npts = 2 if mesh.degree == 1 else 3
    g, w = gauss_points(npts)
    xi, eta = np.meshgrid(g, g, indexing="xy")
    xi, eta = xi.ravel(), eta.ravel()
    wq = np.outer(w, w).ravel()
    return xi, eta, wq


def _tensor_shapes(mesh: StructuredMesh, xi, eta):
    """Shape values and reference derivatives at the quad points; (nq, nloc)."""
    vx, dx = _shape_1d(mesh.degree, xi)
    vy, dy = _shape_1d(mesh.degree, eta)
    nloc = mesh.degree + 1
    ix, iy = np.meshgrid(np.arange(nloc), np.arange(nloc), indexing="xy")
    ix, iy = ix.ravel(), iy.ravel()
    n = vx[:, ix] * vy[:, iy]
    dxi = dx[:, ix] * vy[:, iy]
    deta = vx[:, ix] * dy[:, iy]
    return n, dxi, deta


def _eval_coeff(coeff, mesh, xq, yq):
    """Coefficient values at quadrature points, shape (n_elems, nq)."""
    if callable(coeff):
        return np.broadcast_to(np.asarray(coeff(xq, yq), dtype=float), xq.shape)
    arr = np.asarray(coeff, dtype=float)
    if arr.ndim == 0:
        return np.full(xq.shape, float(arr))
    if arr.shape == (mesh.n_elems,):
        return np.broadcast_to(arr[:, None], xq.shape)
    raise ValueError("coefficient must be scalar, callable, or per-element array")


def _scatter(mesh: StructuredMesh, ke: np.ndarray) -> sp.csr_matrix:
    conn = mesh.connectivity
    nloc = conn.shape[1]
    rows = np.repeat(conn, nloc, axis=1).ravel()
    cols = np.tile(conn, (1, nloc)).ravel()
    a = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))
    return a.tocsr()


def _grad_factors(mesh):
    return 2.0 / mesh.hx, 2.0 / mesh.hy


def assemble_stiffness(mesh: StructuredMesh, coeff=1.0, anisotropy=None,
                       npts: int | None = None) -> sp.csr_matrix:
    """Matrix of the weighted diffusion form: integral of coeff * grad v . (A grad w).

    `anisotropy` is an optional 2x2 matrix of space functions (nested sequence);
    identity when omitted.
    """
    xi, eta, wq = _quad_rule(mesh, npts)
    _, dxi, deta = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    c = _eval_coeff(coeff, mesh, xq, yq)
    jac = 0.25 * mesh.hx * mesh.hy
    fx, fy = _grad_factors(mesh)
    gx = fx[:, None, None] * dxi[None, :, :]   # (n_elems, nq, nloc)
    gy = fy[:, None, None] * deta[None, :, :]
    wdet = (c * wq[None, :]) * jac[:, None]
    if anisotropy is None:
        ke = np.einsum("eq,eqi,eqj->eij", wdet, gx, gx)
        ke += np.einsum("eq,eqi,eqj->eij", wdet, gy, gy)
    else:
        a = [[_eval_coeff(anisotropy[r][s], mesh, xq, yq) for s in range(2)]
             for r in range(2)]
        ke = np.einsum("eq,eqi,eqj->eij", wdet * a[0][0], gx, gx)
        ke += np.einsum("eq,eqi,eqj->eij", wdet * a[0][1], gx, gy)
        ke += np.einsum("eq,eqi,eqj->eij", wdet * a[1][0], gy, gx)
        ke += np.einsum("eq,eqi,eqj->eij", wdet * a[1][1], gy, gy)
    return _scatter(mesh, ke)


def assemble_convection(mesh: StructuredMesh, velocity,
                        npts: int | None = None) -> sp.csr_matrix:
    """Matrix of the transport form: integral of (velocity . grad w) v."""
    xi, eta, wq = _quad_rule(mesh, npts)
    n, dxi, deta = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    vx, vy = velocity(xq, yq)
    vx = np.broadcast_to(np.asarray(vx, dtype=float), xq.shape)
    vy = np.broadcast_to(np.asarray(vy, dtype=float), xq.shape)
    jac = 0.25 * mesh.hx * mesh.hy
    fx, fy = _grad_factors(mesh)
    gx = fx[:, None, None] * dxi[None, :, :]
    gy = fy[:, None, None] * deta[None, :, :]
    wdet = wq[None, :] * jac[:, None]
    ke = np.einsum("eq,qi,eqj->eij", wdet * vx, n, gx)
    ke += np.einsum("eq,qi,eqj->eij", wdet * vy, n, gy)
    return _scatter(mesh, ke)


def assemble_mass(mesh: StructuredMesh, coeff=1.0,
                  npts: int | None = None) -> sp.csr_matrix:
    """Matrix of the reaction form: integral of coeff * v w."""
    xi, eta, wq = _quad_rule(mesh, npts)
    n, _, _ = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    c = _eval_coeff(coeff, mesh, xq, yq)
    jac = 0.25 * mesh.hx * mesh.hy
    wdet = (c * wq[None, :]) * jac[:, None]
    ke = np.einsum("eq,qi,qj->eij", wdet, n, n)
    return _scatter(mesh, ke)


def assemble_supg(mesh: StructuredMesh, velocity, tau, left_scale=1.0,
                  right_scale=1.0, npts: int | None = None) -> sp.csr_matrix:
    """Streamline stabilization matrix, element interiors only.

    Entry (i, j) integrates tau * (velocity . S_l grad w_j)(velocity . S_r grad v_i)
    where S_l and S_r scale the x-derivative of the trial and test function by
    `left_scale` and `right_scale`; with unit scales this is the standard
    streamline-diffusion term.
    """
    xi, eta, wq = _quad_rule(mesh, npts)
    _, dxi, deta = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    vx, vy = velocity(xq, yq)
    vx = np.broadcast_to(np.asarray(vx, dtype=float), xq.shape)
    vy = np.broadcast_to(np.asarray(vy, dtype=float), xq.shape)
    t = _eval_coeff(tau, mesh, xq, yq)
    if np.any(t < -1e-14):
        raise ValueError("stabilization parameter must be non-negative")
    ls = _eval_coeff(left_scale, mesh, xq, yq)
    rs = _eval_coeff(right_scale, mesh, xq, yq)
    jac = 0.25 * mesh.hx * mesh.hy
    fx, fy = _grad_factors(mesh)
    gx = fx[:, None, None] * dxi[None, :, :]
    gy = fy[:, None, None] * deta[None, :, :]
    # streamline derivative of the trial (j) and test (i) functions
    sj = (vx * ls)[:, :, None] * gx + vy[:, :, None] * gy
    si = (vx * rs)[:, :, None] * gx + vy[:, :, None] * gy
    wdet = (t * wq[None, :]) * jac[:, None]
    ke = np.einsum("eq,eqi,eqj->eij", wdet, si, sj)
    return _scatter(mesh, ke)


def assemble_load(mesh: StructuredMesh, source, npts: int | None = None) -> np.ndarray:
    """Load vector: integral of source * v."""
    xi, eta, wq = _quad_rule(mesh, npts)
    n, _, _ = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    c = _eval_coeff(source, mesh, xq, yq)
    jac = 0.25 * mesh.hx * mesh.hy
    wdet = (c * wq[None, :]) * jac[:, None]
    fe = np.einsum("eq,qi->ei", wdet, n)
    out = np.zeros(mesh.n_nodes)
    np.add.at(out, mesh.connectivity.ravel(), fe.ravel())
    return out


@dataclass(frozen=True)
class BoundaryEdge:
    elem: int
    side: str                  # left | right | bottom | top
    nodes: tuple[int, ...]     # global node ids along the edge
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def midpoint(self) -> tuple[float, float]:
        return (0.5 * (self.p0[0] + self.p1[0]), 0.5 * (self.p0[1] + self.p1[1]))

    @property
    def length(self) -> float:
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))


_SIDE_STEPS = {"left": (-1, 0), "right": (1, 0), "bottom": (0, -1), "top": (0, 1)}


def boundary_edges(mesh: StructuredMesh) -> list[BoundaryEdge]:
    """Element faces not shared with another active cell, in element order."""
    ncx, ncy = mesh.mask.shape
    d = mesh.degree
    nloc = d + 1
    out = []
    local = {
        "left": [k * nloc for k in range(nloc)],
        "right": [k * nloc + d for k in range(nloc)],
        "bottom": list(range(nloc)),
        "top": [d * nloc + k for k in range(nloc)],
    }
    for e, (ix, iy) in enumerate(mesh.cells):
        x0, x1 = mesh.x_breaks[ix], mesh.x_breaks[ix + 1]
        y0, y1 = mesh.y_breaks[iy], mesh.y_breaks[iy + 1]
        corners = {
            "left": ((x0, y0), (x0, y1)),
            "right": ((x1, y0), (x1, y1)),
            "bottom": ((x0, y0), (x1, y0)),
            "top": ((x0, y1), (x1, y1)),
        }
        for side, (sx, sy) in _SIDE_STEPS.items():
            jx, jy = ix + sx, iy + sy
            if 0 <= jx < ncx and 0 <= jy < ncy and mesh.mask[jx, jy]:
                continue
            nodes = tuple(int(mesh.connectivity[e, l]) for l in local[side])
            out.append(BoundaryEdge(e, side, nodes, *corners[side]))
    return out


def select_edges(mesh: StructuredMesh, predicate) -> list[BoundaryEdge]:
    """Boundary edges whose midpoint satisfies predicate(x, y)."""
    return [ed for ed in boundary_edges(mesh) if predicate(*ed.midpoint)]


def assemble_neumann(mesh: StructuredMesh, edges, flux,
                     npts: int | None = None) -> np.ndarray:
    """Boundary load vector: edge integral of flux * v over the given edges."""
    if npts is None:
        npts = 2 if mesh.degree == 1 else 3
    g, w = gauss_points(npts)
    vals, _ = _shape_1d(mesh.degree, g)
    out = np.zeros(mesh.n_nodes)
    for ed in edges:
        half = 0.5 * ed.length
        xs = 0.5 * (ed.p0[0] + ed.p1[0]) + 0.5 * g * (ed.p1[0] - ed.p0[0])
        ys = 0.5 * (ed.p0[1] + ed.p1[1]) + 0.5 * g * (ed.p1[1] - ed.p0[1])
        f = flux(xs, ys) if callable(flux) else np.full_like(xs, float(flux))
        contrib = (w * f * half) @ vals
        for local, node in enumerate(ed.nodes):
            out[node] += contrib[local]
    return out


def supg_tau(mesh: StructuredMesh, velocity, mu1: float,
             h: np.ndarray | None = None) -> np.ndarray:
    """Element-wise streamline stabilization parameter.

    Uses the horizontal element size (overridable via `h`, e.g. to keep the
    reference size on a stretched mesh) and the horizontal velocity component
    at the element centroid; the local Peclet number is evaluated at the
    frozen coefficient value `mu1`.  Elements with zero horizontal velocity
    get zero (no streamline direction to stabilize).
    """
    cx, cy = mesh.centroids()
    vx, _ = velocity(cx, cy)
    a1 = np.abs(np.broadcast_to(np.asarray(vx, dtype=float), cx.shape))
    h = mesh.hx if h is None else np.broadcast_to(np.asarray(h, float), (mesh.n_elems,))
    tau = np.zeros(mesh.n_elems)
    nz = a1 > 0
    pe = a1[nz] * h[nz] * mu1 / 2.0
    exponent = -1.0 / (4.0 * a1[nz])
    tau[nz] = h[nz] * np.exp(exponent * np.log1p(9.0 / pe**2))
    return tau


@dataclass(frozen=True)
class DofPartition:
    """Disjoint split of mesh nodes: interior, named interfaces, external Dirichlet."""

    interior: np.ndarray
    interfaces: dict[str, np.ndarray]
    dirichlet: np.ndarray
    n_nodes: int = field(default=0)

    def interface_all(self) -> np.ndarray:
        if not self.interfaces:
            return np.array([], dtype=np.int64)
        return np.concatenate([self.interfaces[k] for k in self.interfaces])

    def validate(self):
        parts = [self.interior, self.dirichlet, self.interface_all()]
        allidx = np.concatenate([p for p in parts])
        if np.unique(allidx).size != allidx.size:
            raise ValueError("partition sets are not disjoint")
        if allidx.size != self.n_nodes:
            raise ValueError("partition does not cover all nodes")


def partition_dofs(mesh: StructuredMesh, interfaces: dict[str, np.ndarray],
                   dirichlet_nodes) -> DofPartition:
    """Build a partition; interface nodes that are externally constrained are
    reassigned to the Dirichlet set."""
    dirichlet = np.unique(np.asarray(dirichlet_nodes, dtype=np.int64))
    cleaned = {}
    for name, nodes in interfaces.items():
        nodes = np.asarray(nodes, dtype=np.int64)
        cleaned[name] = nodes[~np.isin(nodes, dirichlet)]
    taken = np.concatenate([dirichlet] + [v for v in cleaned.values()])
    if np.unique(taken).size != taken.size:
        raise ValueError("interfaces overlap each other")
    interior = np.setdiff1d(np.arange(mesh.n_nodes), taken)
    part = DofPartition(interior, cleaned, dirichlet, mesh.n_nodes)
    part.validate()
    return part


def nodes_on_line(mesh: StructuredMesh, axis: str, value: float,
                  tol: float = 1e-10) -> np.ndarray:
    """Node ids on the line x=value (axis='x') or y=value, sorted along the line."""
    pad = tol * max(1.0, mesh.diameter)
    if axis == "x":
        hit = np.abs(mesh.coords[:, 0] - value) <= pad
        order = np.argsort(mesh.coords[hit, 1])
    elif axis == "y":
        hit = np.abs(mesh.coords[:, 1] - value) <= pad
        order = np.argsort(mesh.coords[hit, 0])
    else:
        raise ValueError("axis must be 'x' or 'y'")
    return np.flatnonzero(hit)[order]


def dirichlet_columns(matrix: sp.spmatrix, interior: np.ndarray,
                      dofs) -> dict[int, np.ndarray]:
    """Lifting vectors -A[interior, q] for each constrained dof q."""
    csc = sp.csc_matrix(matrix)
    out = {}
    for q in np.asarray(dofs, dtype=np.int64):
        col = np.asarray(csc[:, int(q)].todense()).ravel()
        out[int(q)] = -col[interior]
    return out


def match_nodes(source_coords: np.ndarray, target_coords: np.ndarray,
                tol: float) -> np.ndarray:
    """Index into source_coords of the node coincident with each target node.

    Matching is by coordinate rounding at resolution tol; an unmatched target
    node raises (non-conforming meshes are a configuration error).
    """
    def keys(c):
        return [tuple(k) for k in np.round(np.asarray(c) / tol).astype(np.int64)]

    lookup = {}
    for i, k in enumerate(keys(source_coords)):
        lookup[k] = i
    idx = np.empty(len(target_coords), dtype=np.int64)
    for j, k in enumerate(keys(target_coords)):
        if k not in lookup:
            raise ValueError(
                f"no source node matches target node at {tuple(target_coords[j])}"
            )
        idx[j] = lookup[k]
    return idx


def restriction_indices(donor_mesh: StructuredMesh, interface_coords: np.ndarray,
                        tol_rel: float = 1e-10) -> np.ndarray:
    """Donor node ids geometrically coincident with the interface nodes."""
    tol = tol_rel * max(1.0, donor_mesh.diameter)
    return match_nodes(donor_mesh.coords, interface_coords, tol)


def _nodal_quad(mesh: StructuredMesh, npts: int):
    xi, eta, wq = _quad_rule(mesh, npts)
    n, _, _ = _tensor_shapes(mesh, xi, eta)
    xq, yq = mesh.quad_coords(xi, eta)
    jac = 0.25 * mesh.hx * mesh.hy
    return n, xq, yq, wq[None, :] * jac[:, None]


def l2_norm(mesh: StructuredMesh, nodal_values: np.ndarray, npts: int = 3) -> float:
    n, _, _, wdet = _nodal_quad(mesh, npts)
    uq = nodal_values[mesh.connectivity] @ n.T
    return float(np.sqrt(np.sum(wdet * uq**2)))


def l2_error(mesh: StructuredMesh, nodal_values: np.ndarray, exact,
             npts: int = 3, relative: bool = True) -> float:
    """L2 distance between the FE field and a callable exact(x, y)."""
    n, xq, yq, wdet = _nodal_quad(mesh, npts)
    uq = nodal_values[mesh.connectivity] @ n.T
    eq = exact(xq, yq)
    err = float(np.sqrt(np.sum(wdet * (uq - eq) ** 2)))
    if not relative:
        return err
    ref = float(np.sqrt(np.sum(wdet * eq**2)))
    return err / ref if ref > 0 else err


def write_vtk(path, mesh: StructuredMesh, point_data: dict[str, np.ndarray] | None = None,
              title: str = "field export"):
    """Legacy ASCII VTK unstructured-grid export (quads; Q2 cells subdivided)."""
    d = mesh.degree
    if d == 1:
        quads = mesh.connectivity[:, [0, 1, 3, 2]]
    else:
        c = mesh.connectivity
        quads = np.vstack([
            c[:, [0, 1, 4, 3]], c[:, [1, 2, 5, 4]],
            c[:, [3, 4, 7, 6]], c[:, [4, 5, 8, 7]],
        ])
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_nodes} double",
    ]
    for x, y in mesh.coords:
        lines.append(f"{x:.16g} {y:.16g} 0")
    lines.append(f"CELLS {quads.shape[0]} {quads.shape[0] * 5}")
    for q in quads:
        lines.append("4 " + " ".join(str(int(i)) for i in q))
    lines.append(f"CELL_TYPES {quads.shape[0]}")
    lines.extend(["9"] * quads.shape[0])
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, values in point_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.16g}" for v in np.asarray(values, dtype=float))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
