"""Benchmark definitions: subdomain problems, placements and oracles.

Three problems are shipped:

* ``test1``   -- parametric diffusion on a rectangle split into two overlapping
  subdomains, with a closed-form solution for error reporting.
* ``graetz``  -- convection-diffusion in a channel whose downstream length is a
  geometric parameter; the stretched subdomain is built on a reference mesh
  with the stretch pulled back into affine sectional coefficients, and the
  transport term is stabilized streamline-upwind.
* ``thermal`` -- nine cross-shaped modules with per-module conductivity,
  assembled from four reference subdomains by rigid quarter-turn placements.

A :class:`Benchmark` exposes everything the offline/online drivers need:
reference subdomain problems with active-set partitions, instance placements,
interface-block discovery, glue maps, and monolithic/DD-FEM oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem
from .config import BenchmarkConfig
from .fem import StructuredMesh, match_nodes, partition_dofs, nodes_on_line
from .grids import ParamAxis, make_uniform_axis
from .reference import FemDonor, analytic_test1, solve_dirichlet
from .schwarz import (GlueEntry, GlueMap, InterfaceBlock, InterfaceSystem,
                      SurrogateDonor)
from .subdomain import (DirichletTerm, LoadTerm, OperatorTerm, RigidPlacement,
                        StretchMap, SubdomainProblem, partition_active,
                        stretch_pullback_scales)

__all__ = ["Benchmark", "Instance", "build_benchmark"]

_MATCH_TOL = 1e-8


@dataclass
class Instance:
    """A physical subdomain: a reference problem plus a coordinate map."""

    name: str
    ref: str
    mapper: object | None = None       # None = identity placement

    def to_physical(self, coords, mu: dict) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if self.mapper is None:
            return coords.copy()
        if isinstance(self.mapper, StretchMap):
            return self.mapper.to_physical(coords, mu["mu2"])
        return self.mapper.to_physical(coords)

    def to_reference(self, coords, mu: dict) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if self.mapper is None:
            return coords.copy()
        if isinstance(self.mapper, StretchMap):
            return self.mapper.to_reference(coords, mu["mu2"])
        return self.mapper.to_reference(coords)


class Benchmark:
    """Problem family resolved from a configuration."""

    def __init__(self, cfg: BenchmarkConfig):
        self.cfg = cfg
        self.name = cfg.benchmark
        self.problems: dict[str, SubdomainProblem] = {}
        self.active_sets: dict[str, list[np.ndarray]] = {}
        self.instances: list[Instance] = []
        self.exact = None
        if self.name == "test1":
            _build_test1(self)
        elif self.name == "graetz":
            _build_graetz(self)
        elif self.name == "thermal":
            _build_thermal(self)
        else:  # pragma: no cover - config validation rejects this earlier
            raise ValueError(f"unknown benchmark {self.name!r}")

    # -- parameter handling ------------------------------------------------

    def resolve_mu(self, mu_arg) -> dict:
        """Normalize a CLI/API parameter request and check bounds."""
        if self.name == "thermal":
            if isinstance(mu_arg, str):
                if mu_arg not in self.cfg.cases:
                    raise ValueError(f"unknown case {mu_arg!r}; have "
                                     f"{sorted(self.cfg.cases)}")
                return {"case": mu_arg, **self.cfg.cases[mu_arg]}
            mu = dict(mu_arg)
            ax = self.cfg.axes["mu"]
            for inst in self.instances:
                if inst.name not in mu:
                    raise ValueError(f"conductivity for {inst.name!r} missing")
                if not ax.lo <= float(mu[inst.name]) <= ax.hi:
                    raise ValueError(f"conductivity {mu[inst.name]} for "
                                     f"{inst.name!r} outside [{ax.lo}, {ax.hi}]")
            return mu
        if isinstance(mu_arg, (int, float)):
            mu_arg = [float(mu_arg)]
        names = ["mu"] if self.name == "test1" else ["mu1", "mu2"]
        values = list(mu_arg) if not isinstance(mu_arg, dict) \
            else [mu_arg[n] for n in names]
        if len(values) != len(names):
            raise ValueError(f"{self.name} expects parameters {names}")
        mu = {}
        for n, v in zip(names, values):
            ax = self.cfg.axes[n]
            if not ax.lo <= float(v) <= ax.hi:
                raise ValueError(f"parameter {n}={v} outside [{ax.lo}, {ax.hi}]")
            mu[n] = float(v)
        return mu

    def instance_mu(self, inst: Instance, mu: dict) -> dict:
        """Values of the reference problem's parameter axes for one instance."""
        prob = self.problems[inst.ref]
        if self.name == "thermal":
            return {ax.name: float(mu[inst.name]) for ax in prob.mu_axes}
        return {ax.name: float(mu[ax.name]) for ax in prob.mu_axes}

    def mu_label(self, mu: dict) -> str:
        if self.name == "thermal" and "case" in mu:
            return str(mu["case"])
        names = ["mu"] if self.name == "test1" else ["mu1", "mu2"]
        return ",".join(repr(float(mu[n])) for n in names)

    # -- interface topology --------------------------------------------------

    def _nominal_mu(self) -> dict:
        out = {}
        for n, ax in self.cfg.axes.items():
            if n != "trace":
                out[n] = ax.lo
        for inst in self.instances:
            out.setdefault(inst.name, self.cfg.axes["mu"].lo if "mu" in self.cfg.axes else 1.0)
        return out

    def discover_blocks(self) -> tuple[list[InterfaceBlock], dict[str, dict[int, float]]]:
        """Geometric matching of every interface segment to its unique donor.

        Segments without a donor must lie on the outer boundary; their trace
        values are frozen at the configured outflow value.
        """
        mu0 = self._nominal_mu()
        blocks: list[InterfaceBlock] = []
        frozen: dict[str, dict[int, float]] = {}
        for inst in self.instances:
            prob = self.problems[inst.ref]
            offset = 0
            for tip, nodes in prob.partition.interfaces.items():
                coords_phys = inst.to_physical(prob.mesh.coords[nodes], mu0)
                positions = np.arange(offset, offset + nodes.size)
                offset += nodes.size
                donor = None
                donor_nodes = None
                for cand in self.instances:
                    if cand.name == inst.name:
                        continue
                    cprob = self.problems[cand.ref]
                    ref_coords = cand.to_reference(coords_phys, mu0)
                    if not np.all(cprob.mesh.contains(ref_coords[:, 0],
                                                      ref_coords[:, 1])):
                        continue
                    ids = match_nodes(cprob.mesh.coords, ref_coords, _MATCH_TOL)
                    if not np.all(np.isin(ids, cprob.partition.interior)):
                        continue
                    if donor is not None:
                        raise ValueError(
                            f"interface {inst.name}/{tip} has multiple donors "
                            f"({donor} and {cand.name})")
                    donor, donor_nodes = cand.name, ids
                if donor is None:
                    frozen.setdefault(inst.name, {}).update(
                        {int(p): self.cfg.outflow_value for p in positions})
                else:
                    blocks.append(InterfaceBlock(f"{inst.name}/{tip}", inst.name,
                                                 donor, positions, donor_nodes))
        return blocks, frozen

    def surrogate_system(self, models: dict, mu: dict,
                         gmres=None) -> InterfaceSystem:
        blocks, frozen = self.discover_blocks()
        donors = {inst.name: SurrogateDonor(models[inst.ref],
                                            self.instance_mu(inst, mu))
                  for inst in self.instances}
        return InterfaceSystem(blocks, donors, frozen, gmres or self.cfg.gmres)

    def fem_system(self, mu: dict, gmres=None) -> InterfaceSystem:
        blocks, frozen = self.discover_blocks()
        donors = {inst.name: FemDonor(self.problems[inst.ref],
                                      self.instance_mu(inst, mu))
                  for inst in self.instances}
        return InterfaceSystem(blocks, donors, frozen, gmres or self.cfg.gmres)

    # -- global mesh, gluing, oracles ---------------------------------------

    def global_mesh(self, mu: dict) -> StructuredMesh:
        return self._global_mesh(self, mu)

    def glue_map(self, mu: dict) -> GlueMap:
        gmesh = self.global_mesh(mu)
        entries = []
        for inst in self.instances:
            prob = self.problems[inst.ref]
            ref_coords = inst.to_reference(gmesh.coords, mu)
            inside = prob.mesh.contains(ref_coords[:, 0], ref_coords[:, 1])
            gids = np.flatnonzero(inside)
            lids = match_nodes(prob.mesh.coords, ref_coords[inside], _MATCH_TOL)
            entries.append(GlueEntry(inst.name, gids, lids))
        return GlueMap(gmesh, entries)

    def monolithic(self, mu: dict) -> tuple[StructuredMesh, np.ndarray]:
        """Single-mesh direct solve at one parameter point."""
        return self._monolithic(self, mu)


def build_benchmark(cfg: BenchmarkConfig) -> Benchmark:
    return Benchmark(cfg)


# ---------------------------------------------------------------------------
# test1: parametric diffusion with a synthetic solution
# ---------------------------------------------------------------------------

def _test1_sources():
    two_pi = 2 * np.pi

    def b1(x, y):
        return 8 * np.pi**2 * np.sin(two_pi * x) * np.sin(two_pi * y)

    def b2(x, y):
        return (two_pi * (2 * two_pi * x * np.sin(two_pi * x)
                          - np.cos(two_pi * x)) * np.sin(two_pi * y)
                - x * (x - 2.0) - y * (y - 1.0))

    def b3(x, y):
        return y * (y - 1.0) * (1.0 - 2.0 * x) - x**2 * (x - 2.0)

    return b1, b2, b3


def _test1_subdomain(name: str, x_breaks, y_breaks, iface_x: float,
                     mu_axis: ParamAxis, trace) -> SubdomainProblem:
    mesh = StructuredMesh(x_breaks, y_breaks, degree=1)
    iface = nodes_on_line(mesh, "x", iface_x)
    bnodes = sorted({n for e in fem.boundary_edges(mesh) for n in e.nodes})
    dirichlet = np.setdiff1d(np.asarray(bnodes), iface[1:-1])
    part = partition_dofs(mesh, {"gamma": iface}, dirichlet)
    k_const = fem.assemble_stiffness(mesh, 1.0)
    k_linear = fem.assemble_stiffness(mesh, lambda x, y: x)
    b1, b2, b3 = _test1_sources()
    loads = [
        LoadTerm(fem.assemble_load(mesh, b1, npts=3), {}, "source-const"),
        LoadTerm(fem.assemble_load(mesh, b2, npts=3),
                 {"mu": mu_axis.nodes.copy()}, "source-linear"),
        LoadTerm(fem.assemble_load(mesh, b3, npts=3),
                 {"mu": mu_axis.nodes**2}, "source-quadratic"),
    ]
    ops = [
        OperatorTerm(k_const, {}, "diffusion-const"),
        OperatorTerm(k_linear, {"mu": mu_axis.nodes.copy()}, "diffusion-x"),
    ]
    return SubdomainProblem(name, mesh, part, (mu_axis,), ops, loads, (),
                            trace.lo, trace.hi, trace.spacing)


def _build_test1(bench: Benchmark):
    cfg = bench.cfg
    hx = float(cfg.mesh.get("hx", 0.05))
    n_ov = int(cfg.mesh.get("overlap_n", 1))
    nx = int(round(2.0 / hx))
    ny = int(round(1.0 / hx))
    xs = np.linspace(0.0, 2.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    i_mid = int(round(1.0 / hx))
    if not 0 < i_mid - n_ov < i_mid + n_ov < nx:
        raise ValueError("overlap too wide for the mesh")
    mu_axis = make_uniform_axis("mu", cfg.axes["mu"].lo, cfg.axes["mu"].hi,
                                cfg.axes["mu"].spacing)
    trace = cfg.axes["trace"]
    left = _test1_subdomain("left", xs[: i_mid + n_ov + 1], ys,
                            xs[i_mid + n_ov], mu_axis, trace)
    right = _test1_subdomain("right", xs[i_mid - n_ov:], ys,
                             xs[i_mid - n_ov], mu_axis, trace)
    bench.problems = {"left": left, "right": right}
    m = cfg.max_active["max_active"]
    bench.active_sets = {k: partition_active(p.interface_dofs.size, m)
                         for k, p in bench.problems.items()}
    bench.instances = [Instance("left", "left"), Instance("right", "right")]
    bench.exact = lambda mu, x, y: analytic_test1(mu["mu"], x, y)
    bench._xs, bench._ys = xs, ys
    bench._global_mesh = lambda b, mu: StructuredMesh(b._xs, b._ys, degree=1)
    bench._monolithic = _test1_monolithic


def _test1_monolithic(bench: Benchmark, mu: dict):
    mesh = bench.global_mesh(mu)
    m = mu["mu"]
    A = fem.assemble_stiffness(mesh, lambda x, y: 1.0 + m * x)
    b1, b2, b3 = _test1_sources()
    f = fem.assemble_load(
        mesh, lambda x, y: b1(x, y) + m * b2(x, y) + m * m * b3(x, y), npts=3)
    bnodes = sorted({n for e in fem.boundary_edges(mesh) for n in e.nodes})
    u = solve_dirichlet(A, f, np.asarray(bnodes), np.zeros(len(bnodes)))
    return mesh, u


# ---------------------------------------------------------------------------
# graetz: stabilized convection-diffusion with a stretched subdomain
# ---------------------------------------------------------------------------

def _graded_breaks(n: int, grading: str) -> np.ndarray:
    if grading == "uniform":
        return np.linspace(0.0, 1.0, n + 1)
    if grading == "cosine":
        return 0.5 * (1.0 - np.cos(np.pi * np.arange(n + 1) / n))
    raise ValueError(f"unknown wall grading {grading!r}")


def _graetz_velocity(scale: float):
    def velocity(x, y):
        return scale * y * (1.0 - y), np.zeros_like(np.asarray(x, dtype=float))
    return velocity


def _build_graetz(bench: Benchmark):
    cfg = bench.cfg
    hx = float(cfg.mesh.get("hx", 0.05))
    hbar = float(cfg.mesh.get("hbar", 0.05))
    ny = int(cfg.mesh.get("ny", 20))
    grading = str(cfg.mesh.get("wall_grading", "cosine"))
    vscale = float(cfg.mesh.get("velocity_scale", 4.0))
    ys = _graded_breaks(ny, grading)
    velocity = _graetz_velocity(vscale)
    freeze = cfg.supg_freeze

    mu1 = make_uniform_axis("mu1", cfg.axes["mu1"].lo, cfg.axes["mu1"].hi,
                            cfg.axes["mu1"].spacing)
    mu2 = make_uniform_axis("mu2", cfg.axes["mu2"].lo, cfg.axes["mu2"].hi,
                            cfg.axes["mu2"].spacing)
    trace = cfg.axes["trace"]
    inv_mu1 = 1.0 / mu1.nodes

    # inlet subdomain [0, 1+hbar] x [0, 1], physical frame
    nx1 = int(round((1.0 + hbar) / hx))
    xs1 = np.linspace(0.0, 1.0 + hbar, nx1 + 1)
    mesh1 = StructuredMesh(xs1, ys, degree=1)
    tau1 = fem.supg_tau(mesh1, velocity, freeze)
    iface1 = nodes_on_line(mesh1, "x", 1.0 + hbar)
    walls1 = [n for e in fem.boundary_edges(mesh1) for n in e.nodes
              if e.side in ("bottom", "top")]
    left1 = nodes_on_line(mesh1, "x", 0.0)
    dirichlet1 = np.unique(np.concatenate([np.asarray(walls1), left1]))
    part1 = partition_dofs(mesh1, {"gamma": iface1}, dirichlet1)
    gvals1 = np.zeros(mesh1.n_nodes)
    hot1 = dirichlet1[mesh1.coords[dirichlet1, 0] > 1.0 + 1e-12]
    gvals1[hot1] = 1.0
    ops1 = [
        OperatorTerm(fem.assemble_stiffness(mesh1, 1.0, npts=3),
                     {"mu1": inv_mu1}, "diffusion"),
        OperatorTerm(fem.assemble_convection(mesh1, velocity, npts=3), {},
                     "transport"),
        OperatorTerm(fem.assemble_supg(mesh1, velocity, tau1, npts=3), {},
                     "stabilization"),
    ]
    prob1 = SubdomainProblem("inlet", mesh1, part1, (mu1,), ops1, (),
                             [DirichletTerm(gvals1, {}, "hot-walls")],
                             trace.lo, trace.hi, trace.spacing)

    # channel subdomain on the unit reference mesh; downstream part stretches
    nx2 = int(round((1.0 - hbar) / hx))
    xs2 = np.concatenate([[0.0], np.linspace(hbar, 1.0, nx2 + 1)])
    mesh2 = StructuredMesh(xs2, ys, degree=1)
    tau2 = fem.supg_tau(mesh2, velocity, freeze)
    cx, _ = mesh2.centroids()
    reg1 = (cx <= hbar).astype(float)        # rigidly attached slab
    reg2 = (cx > hbar).astype(float)         # stretched remainder
    inv_zeta, zeta = stretch_pullback_scales(StretchMap(hbar), mu2)
    iface2 = nodes_on_line(mesh2, "x", 0.0)
    walls2 = np.asarray(sorted({n for e in fem.boundary_edges(mesh2)
                                for n in e.nodes if e.side in ("bottom", "top")}))
    part2 = partition_dofs(mesh2, {"gamma": iface2}, walls2)
    gvals2 = np.zeros(mesh2.n_nodes)
    hot2 = walls2[mesh2.coords[walls2, 0] > 1e-12]
    gvals2[hot2] = 1.0
    dxx = [[1.0, 0.0], [0.0, 0.0]]
    dyy = [[0.0, 0.0], [0.0, 1.0]]
    ops2 = [
        OperatorTerm(fem.assemble_stiffness(mesh2, reg1, npts=3),
                     {"mu1": inv_mu1}, "diffusion-slab"),
        OperatorTerm(fem.assemble_stiffness(mesh2, reg2, anisotropy=dxx, npts=3),
                     {"mu1": inv_mu1, "mu2": inv_zeta}, "diffusion-stream"),
        OperatorTerm(fem.assemble_stiffness(mesh2, reg2, anisotropy=dyy, npts=3),
                     {"mu1": inv_mu1, "mu2": zeta}, "diffusion-cross"),
        OperatorTerm(fem.assemble_convection(mesh2, velocity, npts=3), {},
                     "transport"),
        OperatorTerm(fem.assemble_supg(mesh2, velocity, tau2 * reg1, npts=3), {},
                     "stabilization-slab"),
        OperatorTerm(fem.assemble_supg(mesh2, velocity, tau2 * reg2, npts=3),
                     {"mu2": inv_zeta}, "stabilization-stream"),
    ]
    prob2 = SubdomainProblem("channel", mesh2, part2, (mu1, mu2), ops2, (),
                             [DirichletTerm(gvals2, {}, "hot-walls")],
                             trace.lo, trace.hi, trace.spacing)

    bench.problems = {"inlet": prob1, "channel": prob2}
    bench.active_sets = {
        "inlet": partition_active(prob1.interface_dofs.size,
                                  cfg.max_active["max_active_inlet"]),
        "channel": partition_active(prob2.interface_dofs.size,
                                    cfg.max_active["max_active_channel"]),
    }
    bench.instances = [Instance("inlet", "inlet"),
                       Instance("channel", "channel", StretchMap(hbar, 1.0))]
    bench._ys = ys
    bench._velocity = velocity
    bench._hx = hx
    bench._hbar = hbar
    bench._global_mesh = _graetz_global_mesh
    bench._monolithic = _graetz_monolithic


def _graetz_global_mesh(bench: Benchmark, mu: dict) -> StructuredMesh:
    smap: StretchMap = bench.instances[1].mapper
    prob2 = bench.problems["channel"]
    mapped = smap.to_physical(
        np.column_stack([prob2.mesh.x_breaks, np.zeros_like(prob2.mesh.x_breaks)]),
        mu["mu2"])[:, 0]
    xs1 = bench.problems["inlet"].mesh.x_breaks
    xs = np.concatenate([xs1, mapped[mapped > xs1[-1] + 1e-12]])
    return StructuredMesh(xs, bench._ys, degree=1)


def _graetz_monolithic(bench: Benchmark, mu: dict):
    mesh = bench.global_mesh(mu)
    inv_mu1 = 1.0 / mu["mu1"]
    velocity = bench._velocity
    # stabilization uses the reference (unstretched) streamwise element size,
    # matching the pulled-back discretization of the channel subdomain
    tau = fem.supg_tau(mesh, velocity, bench.cfg.supg_freeze,
                       h=np.full(mesh.n_elems, bench._hx))
    A = (fem.assemble_stiffness(mesh, inv_mu1, npts=3)
         + fem.assemble_convection(mesh, velocity, npts=3)
         + fem.assemble_supg(mesh, velocity, tau, npts=3))
    f = np.zeros(mesh.n_nodes)
    walls = np.asarray(sorted({n for e in fem.boundary_edges(mesh)
                               for n in e.nodes if e.side in ("bottom", "top")}))
    inflow = nodes_on_line(mesh, "x", 0.0)
    dir_ids = np.unique(np.concatenate([walls, inflow]))
    vals = np.where(mesh.coords[dir_ids, 0] > 1.0 + 1e-12, 1.0, 0.0)
    u = solve_dirichlet(A, f, dir_ids, vals)
    return mesh, u


# ---------------------------------------------------------------------------
# thermal: modular multi-domain diffusion via rigid placements
# ---------------------------------------------------------------------------

def _cross_mesh(h_bulk: float, h_wing: float, wing: float) -> StructuredMesh:
    n_b = int(round(1.0 / h_bulk))
    n_w = int(round(wing / h_wing))
    inner = np.linspace(0.0, 1.0, n_b + 1)
    lo = np.linspace(-wing, 0.0, n_w + 1)[:-1]
    hi = np.linspace(1.0, 1.0 + wing, n_w + 1)[1:]
    xb = np.concatenate([lo, inner, hi])
    nc = xb.size - 1
    cx = 0.5 * (xb[:-1] + xb[1:])
    in_bulk = (cx > 0) & (cx < 1)
    mask = np.zeros((nc, nc), dtype=bool)
    mask[np.ix_(in_bulk, in_bulk)] = True
    mask[np.ix_(~in_bulk, in_bulk)] = True
    mask[np.ix_(in_bulk, ~in_bulk)] = True
    return StructuredMesh(xb, xb.copy(), degree=1, mask=mask)


_TIP_LINES = {"left": ("x", "lo"), "right": ("x", "hi"),
              "bottom": ("y", "lo"), "top": ("y", "hi")}


def _tip_nodes(mesh: StructuredMesh, tip: str, wing: float) -> np.ndarray:
    axis, which = _TIP_LINES[tip]
    value = -wing if which == "lo" else 1.0 + wing
    return nodes_on_line(mesh, axis, value)


def _tip_edges(mesh: StructuredMesh, tip: str, wing: float):
    axis, which = _TIP_LINES[tip]
    value = -wing if which == "lo" else 1.0 + wing
    coord = 0 if axis == "x" else 1
    return [e for e in fem.boundary_edges(mesh)
            if abs(e.midpoint[coord] - value) < 1e-12]


def _build_thermal(bench: Benchmark):
    cfg = bench.cfg
    h_bulk = float(cfg.mesh.get("h_bulk", 0.05))
    h_wing = float(cfg.mesh.get("h_wing", 0.0125))
    wing = float(cfg.mesh.get("wing", 0.2625))
    mesh = _cross_mesh(h_bulk, h_wing, wing)
    cx, cy = mesh.centroids()
    bulk = ((cx > 0) & (cx < 1) & (cy > 0) & (cy < 1)).astype(float)
    k_wing = fem.assemble_stiffness(mesh, 1.0 - bulk)
    k_bulk = fem.assemble_stiffness(mesh, bulk)
    mu_axis = make_uniform_axis("mu", cfg.axes["mu"].lo, cfg.axes["mu"].hi,
                                cfg.axes["mu"].spacing)
    trace = cfg.axes["trace"]

    for ref in cfg.references:
        interfaces = {t: _tip_nodes(mesh, t, wing) for t in ref.tips}
        part = partition_dofs(mesh, interfaces, np.array([], dtype=np.int64))
        loads = []
        if ref.flux_tip:
            fN = fem.assemble_neumann(mesh, _tip_edges(mesh, ref.flux_tip, wing), 1.0)
            loads.append(LoadTerm(fN, {}, "inflow"))
        ops = [OperatorTerm(k_wing, {}, "wings"),
               OperatorTerm(k_bulk, {"mu": mu_axis.nodes.copy()}, "bulk")]
        bench.problems[ref.name] = SubdomainProblem(
            ref.name, mesh, part, (mu_axis,), ops, loads, (),
            trace.lo, trace.hi, trace.spacing)

    m = cfg.max_active["max_active"]
    bench.active_sets = {k: partition_active(p.interface_dofs.size, m)
                         for k, p in bench.problems.items()}
    bench.instances = [
        Instance(p.name, p.ref, RigidPlacement(p.translate, p.quarter_turns))
        for p in cfg.placements
    ]
    bench._wing = wing
    bench._global_mesh = _thermal_global_mesh
    bench._monolithic = _thermal_monolithic


def _thermal_global_mesh(bench: Benchmark, mu: dict) -> StructuredMesh:
    ref_mesh = next(iter(bench.problems.values())).mesh
    xs, ys = set(), set()
    for inst in bench.instances:
        bx, by = np.meshgrid(ref_mesh.x_breaks, ref_mesh.y_breaks, indexing="xy")
        placed = inst.to_physical(np.column_stack([bx.ravel(), by.ravel()]), mu)
        xs.update(np.round(placed[:, 0], 9))
        ys.update(np.round(placed[:, 1], 9))
    xb = np.array(sorted(xs))
    yb = np.array(sorted(ys))
    cx = 0.5 * (xb[:-1] + xb[1:])
    cy = 0.5 * (yb[:-1] + yb[1:])
    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    mask = np.zeros(gx.shape, dtype=bool)
    for inst in bench.instances:
        prob = bench.problems[inst.ref]
        rc = inst.to_reference(np.column_stack([gx.ravel(), gy.ravel()]), mu)
        mask |= prob.mesh.contains(rc[:, 0], rc[:, 1], tol=1e-9).reshape(gx.shape)
    return StructuredMesh(xb, yb, degree=1, mask=mask)


def _thermal_conductivity(bench: Benchmark, mu: dict):
    # lattice position of each module's bulk follows from its translation
    pitch = 1.5
    ni = max(int(round(inst.mapper.translation[0] / pitch))
             for inst in bench.instances) + 1
    nj = max(int(round(inst.mapper.translation[1] / pitch))
             for inst in bench.instances) + 1
    vals = np.ones((nj, ni))
    for inst in bench.instances:
        tx, ty = inst.mapper.translation
        vals[int(round(ty / pitch)), int(round(tx / pitch))] = float(mu[inst.name])

    def coeff(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        i = np.clip(np.floor(x / pitch).astype(int), 0, ni - 1)
        j = np.clip(np.floor(y / pitch).astype(int), 0, nj - 1)
        dx, dy = x - pitch * i, y - pitch * j
        in_bulk = (dx >= 0.0) & (dx <= 1.0) & (dy >= 0.0) & (dy <= 1.0)
        return np.where(in_bulk, vals[j, i], 1.0)

    return coeff


def _thermal_monolithic(bench: Benchmark, mu: dict):
    mesh = bench.global_mesh(mu)
    A = fem.assemble_stiffness(mesh, _thermal_conductivity(bench, mu))
    _, frozen = bench.discover_blocks()
    mu0 = bench._nominal_mu()
    global_edges = fem.boundary_edges(mesh)
    edge_lookup = {(round(e.midpoint[0] / _MATCH_TOL),
                    round(e.midpoint[1] / _MATCH_TOL)): e for e in global_edges}
    f = np.zeros(mesh.n_nodes)
    dir_ids = []
    flux_edges = []
    for inst in bench.instances:
        prob = bench.problems[inst.ref]
        if inst.name in frozen:
            pos = np.array(sorted(frozen[inst.name].keys()))
            nodes = prob.interface_dofs[pos]
            phys = inst.to_physical(prob.mesh.coords[nodes], mu0)
            dir_ids.append(match_nodes(mesh.coords, phys, _MATCH_TOL))
        ref = next(r for r in bench.cfg.references if r.name == inst.ref)
        if ref.flux_tip:
            for e in _tip_edges(prob.mesh, ref.flux_tip, bench._wing):
                mid = inst.to_physical(np.array([e.midpoint]), mu0)[0]
                key = (round(mid[0] / _MATCH_TOL), round(mid[1] / _MATCH_TOL))
                if key not in edge_lookup:
                    raise ValueError("inflow edge not found on the global mesh")
                flux_edges.append(edge_lookup[key])
    if flux_edges:
        f += fem.assemble_neumann(mesh, flux_edges, 1.0)
    dir_ids = np.unique(np.concatenate(dir_ids)) if dir_ids else np.array([], int)
    u = solve_dirichlet(A, f, dir_ids, np.full(dir_ids.size, bench.cfg.outflow_value))
    return mesh, u
