"""Per-subdomain offline phase.

A subdomain problem carries assembled sectional matrices/vectors over the full
local DOF set together with a DOF partition (interior / interface / external
Dirichlet) and the parameter axes.  The offline build solves one source
subproblem (interface data frozen to zero) plus one subproblem per small set of
active interface parameters, embeds the interior solutions back to the full
DOF set, and adds the nodal Dirichlet lifts, so that evaluated traces are
exact at interface nodes.

Geometric maps (rigid quarter-turn placements and the one-directional channel
stretch) relate reference subdomains to physical ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import DofPartition, StructuredMesh, dirichlet_columns
from .grids import ParamAxis, ParamPoint, interp_mode, make_uniform_axis
from .pgd import PgdSettings, SolveReport, solve
from .separated import SeparatedOperator, SeparatedVector, append_term, evaluate

__all__ = [
    "OperatorTerm",
    "LoadTerm",
    "DirichletTerm",
    "SubdomainProblem",
    "BoundaryPart",
    "SurrogateModel",
    "partition_active",
    "build_parametric_system",
    "build_surrogate",
    "RigidPlacement",
    "StretchMap",
    "stretch_pullback_scales",
]


@dataclass(frozen=True)
class OperatorTerm:
    """One sectional matrix with per-axis nodal coefficients (default ones)."""

    matrix: sp.csr_matrix
    coeffs: dict[str, np.ndarray] = field(default_factory=dict)
    label: str = ""


@dataclass(frozen=True)
class LoadTerm:
    vector: np.ndarray
    coeffs: dict[str, np.ndarray] = field(default_factory=dict)
    label: str = ""


@dataclass(frozen=True)
class DirichletTerm:
    """Nodal boundary values (nonzero only at external Dirichlet nodes)."""

    values: np.ndarray
    coeffs: dict[str, np.ndarray] = field(default_factory=dict)
    label: str = ""


class SubdomainProblem:
    """Assembled local problem with parametric sectional data."""

    def __init__(self, name: str, mesh: StructuredMesh, partition: DofPartition,
                 mu_axes, operator_terms, load_terms=(), dirichlet_terms=(),
                 lam_lo: float = -1.0, lam_hi: float = 1.0,
                 lam_spacing: float = 0.1):
        self.name = name
        self.mesh = mesh
        self.partition = partition
        self.mu_axes = tuple(mu_axes)
        self.operator_terms = list(operator_terms)
        self.load_terms = list(load_terms)
        self.dirichlet_terms = list(dirichlet_terms)
        # one trace-value axis per interface DOF, ordered interface by interface
        self.interface_dofs = partition.interface_all()
        self.lam_axes = tuple(
            make_uniform_axis(f"{name}:lam{k}", lam_lo, lam_hi, lam_spacing)
            for k in range(self.interface_dofs.size)
        )
        n = mesh.n_nodes
        for t in self.operator_terms:
            if t.matrix.shape != (n, n):
                raise ValueError("operator term size mismatch")
        for t in self.load_terms:
            if t.vector.shape != (n,):
                raise ValueError("load term size mismatch")
        for t in self.dirichlet_terms:
            if t.values.shape != (n,):
                raise ValueError("dirichlet term size mismatch")

    def coeff_on(self, axis: ParamAxis, coeffs: dict[str, np.ndarray]) -> np.ndarray:
        c = coeffs.get(axis.name)
        if c is None:
            return np.ones(axis.n_nodes)
        c = np.asarray(c, dtype=float)
        if c.shape != (axis.n_nodes,):
            raise ValueError(f"coefficient on axis {axis.name!r} has wrong length")
        return c

    def operator_at(self, mu: dict[str, float]) -> sp.csr_matrix:
        """Full-DOF operator with coefficients interpolated at one mu point."""
        out = None
        pt = ParamPoint(dict(mu))
        for t in self.operator_terms:
            w = 1.0
            for ax in self.mu_axes:
                vals = self.coeff_on(ax, t.coeffs)
                w *= float(interp_mode(ax, vals, pt[ax.name]))
            out = w * t.matrix if out is None else out + w * t.matrix
        return out.tocsr()

    def rhs_at(self, mu: dict[str, float]) -> np.ndarray:
        out = np.zeros(self.mesh.n_nodes)
        for t in self.load_terms:
            w = 1.0
            for ax in self.mu_axes:
                w *= float(interp_mode(ax, self.coeff_on(ax, t.coeffs), mu[ax.name]))
            out += w * t.vector
        return out

    def dirichlet_values_at(self, mu: dict[str, float]) -> np.ndarray:
        out = np.zeros(self.mesh.n_nodes)
        for t in self.dirichlet_terms:
            w = 1.0
            for ax in self.mu_axes:
                w *= float(interp_mode(ax, self.coeff_on(ax, t.coeffs), mu[ax.name]))
            out += w * t.values
        return out


def partition_active(n_interface: int, max_active: int) -> list[np.ndarray]:
    """Greedy chunking of interface DOF positions into consecutive active sets."""
    if max_active < 1:
        raise ValueError("max_active must be >= 1")
    return [np.arange(s, min(s + max_active, n_interface))
            for s in range(0, n_interface, max_active)]


def build_parametric_system(problem: SubdomainProblem, which="source",
                            active: np.ndarray | None = None):
    """Interior-restricted separated operator and right-hand side.

    `which` is "source" for the data-dependent subproblem (loads plus external
    Dirichlet lift) or "boundary" with the active positions (into the
    interface DOF list) for a trace subproblem.
    """
    interior = problem.partition.interior
    if which == "boundary":
        if active is None:
            raise ValueError("boundary system requires the active positions")
        active = np.asarray(active, dtype=np.int64)
        axes = problem.mu_axes + tuple(problem.lam_axes[int(a)] for a in active)
    elif which == "source":
        axes = problem.mu_axes
    else:
        raise ValueError("which must be 'source' or 'boundary'")

    n_lam = len(axes) - len(problem.mu_axes)
    matrices = []
    op_coeffs = [[] for _ in axes]
    for t in problem.operator_terms:
        matrices.append(t.matrix[np.ix_(interior, interior)].tocsr())
        for k, ax in enumerate(problem.mu_axes):
            op_coeffs[k].append(problem.coeff_on(ax, t.coeffs))
        for k in range(n_lam):
            op_coeffs[len(problem.mu_axes) + k].append(np.ones(axes[len(problem.mu_axes) + k].n_nodes))
    op = SeparatedOperator(axes, matrices,
                           tuple(np.column_stack(c) for c in op_coeffs))

    terms = []
    if which == "source":
        for t in problem.load_terms:
            modes = [problem.coeff_on(ax, t.coeffs) for ax in problem.mu_axes]
            terms.append((t.vector[interior], modes))
        for d in problem.dirichlet_terms:
            for t in problem.operator_terms:
                vec = -(t.matrix[interior, :] @ d.values)
                modes = [problem.coeff_on(ax, t.coeffs) * problem.coeff_on(ax, d.coeffs)
                         for ax in problem.mu_axes]
                terms.append((vec, modes))
    else:
        for pos_k, pos in enumerate(active):
            node = int(problem.interface_dofs[int(pos)])
            for t in problem.operator_terms:
                vec = dirichlet_columns(t.matrix, interior, [node])[node]
                modes = [problem.coeff_on(ax, t.coeffs) for ax in problem.mu_axes]
                for k in range(n_lam):
                    ax = axes[len(problem.mu_axes) + k]
                    modes.append(ax.nodes.copy() if k == pos_k
                                 else np.ones(ax.n_nodes))
                terms.append((vec, modes))
    if terms:
        rhs = SeparatedVector.from_terms(axes, terms)
    else:
        rhs = SeparatedVector.zero(interior.size, axes)
    return op, rhs


@dataclass
class BoundaryPart:
    """Surrogate of one trace subproblem, including its nodal ramp lift."""

    active: np.ndarray            # positions into the interface DOF list
    vector: SeparatedVector       # axes: mu axes + active trace axes; full DOFs
    report: SolveReport


@dataclass
class SurrogateModel:
    """Source surrogate plus the family of boundary surrogates of a subdomain."""

    name: str
    source: SeparatedVector
    boundary: list[BoundaryPart]
    source_report: SolveReport
    mu_axes: tuple[ParamAxis, ...]
    lam_axes: tuple[ParamAxis, ...]
    interface_dofs: np.ndarray

    @property
    def n_space(self) -> int:
        return self.source.n_space

    def max_modes(self) -> int:
        counts = [self.source.n_terms] + [p.vector.n_terms for p in self.boundary]
        return max(counts)

    def _clamped(self, lam: np.ndarray, log: list | None):
        out = np.array(lam, dtype=float)
        for k, ax in enumerate(self.lam_axes):
            if out[k] < ax.lo or out[k] > ax.hi:
                if log is not None:
                    log.append((self.name, k, float(out[k])))
                out[k] = min(max(out[k], ax.lo), ax.hi)
        return out

    def boundary_field(self, mu: dict[str, float], lam: np.ndarray,
                       clamp_log: list | None = None) -> np.ndarray:
        """Nodal values of the trace-driven response at (mu, lam)."""
        lam = self._clamped(lam, clamp_log)
        values = dict(mu)
        for k, ax in enumerate(self.lam_axes):
            values[ax.name] = float(lam[k])
        pt = ParamPoint(values)
        out = np.zeros(self.n_space)
        for part in self.boundary:
            out += evaluate(part.vector, pt)
        return out

    def field(self, mu: dict[str, float], lam: np.ndarray,
              clamp_log: list | None = None) -> np.ndarray:
        """Full local solution: source response plus trace response."""
        pt = ParamPoint(dict(mu))
        return evaluate(self.source, pt) + self.boundary_field(mu, lam, clamp_log)


def _embed(interior_solution: SeparatedVector, interior: np.ndarray,
           n_nodes: int) -> SeparatedVector:
    if interior_solution.n_terms == 0:
        return SeparatedVector.zero(n_nodes, interior_solution.axes)
    spatial = np.zeros((n_nodes, interior_solution.n_terms))
    spatial[interior, :] = interior_solution.spatial
    return SeparatedVector(interior_solution.axes, spatial, interior_solution.modes)


def build_surrogate(problem: SubdomainProblem, active_sets, settings: PgdSettings,
                    on_report=None) -> SurrogateModel:
    """Offline build: source subproblem plus one subproblem per active set.

    Independent subproblems get independent deterministic seeds; trace lifts
    are appended after compression so interface values stay nodally exact.
    """
    interior = problem.partition.interior
    n = problem.mesh.n_nodes

    op, rhs = build_parametric_system(problem, "source")
    src_settings = _reseed(settings, problem.name, "source")
    u0, rep0 = solve(op, rhs, src_settings)
    source = _embed(u0, interior, n)
    for d in problem.dirichlet_terms:
        modes = [problem.coeff_on(ax, d.coeffs) for ax in problem.mu_axes]
        source = _append_full_term(source, d.values, modes)
    if on_report is not None:
        on_report(f"{problem.name}:source", rep0)

    parts = []
    for j, active in enumerate(active_sets):
        opj, rhsj = build_parametric_system(problem, "boundary", active)
        stj = _reseed(settings, problem.name, f"boundary{j}")
        uj, repj = solve(opj, rhsj, stj)
        vec = _embed(uj, interior, n)
        for pos_k, pos in enumerate(active):
            node = int(problem.interface_dofs[int(pos)])
            spatial = np.zeros(n)
            spatial[node] = 1.0
            modes = [np.ones(ax.n_nodes) for ax in problem.mu_axes]
            for k in range(active.size):
                ax = opj.axes[len(problem.mu_axes) + k]
                modes.append(ax.nodes.copy() if k == pos_k else np.ones(ax.n_nodes))
            vec = _append_full_term(vec, spatial, modes)
        parts.append(BoundaryPart(np.asarray(active), vec, repj))
        if on_report is not None:
            on_report(f"{problem.name}:boundary{j}", repj)
    return SurrogateModel(problem.name, source, parts, rep0, problem.mu_axes,
                          problem.lam_axes, problem.interface_dofs.copy())


def _append_full_term(v: SeparatedVector, spatial: np.ndarray, modes) -> SeparatedVector:
    return append_term(v, spatial, modes)


def _reseed(settings: PgdSettings, *tags) -> PgdSettings:
    mix = settings.seed
    for t in tags:
        for ch in str(t):
            mix = (mix * 1000003 + ord(ch)) % (2**31 - 1)
    return PgdSettings(settings.eps_enrich, settings.eps_compress,
                       settings.max_modes, settings.als_tol,
                       settings.als_max_iters, int(mix))


@dataclass(frozen=True)
class RigidPlacement:
    """Quarter-turn rotation about a pivot followed by a translation."""

    translation: tuple[float, float] = (0.0, 0.0)
    quarter_turns: int = 0
    pivot: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.quarter_turns % 1 != 0:
            raise ValueError("rotation must be a whole number of quarter turns")
        object.__setattr__(self, "quarter_turns", int(self.quarter_turns) % 4)

    def _rot(self, xy: np.ndarray, turns: int) -> np.ndarray:
        x, y = xy[..., 0], xy[..., 1]
        if turns == 0:
            return np.stack([x, y], axis=-1)
        if turns == 1:
            return np.stack([-y, x], axis=-1)
        if turns == 2:
            return np.stack([-x, -y], axis=-1)
        return np.stack([y, -x], axis=-1)

    def to_physical(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        p = np.asarray(self.pivot)
        out = self._rot(xy - p, self.quarter_turns) + p
        return out + np.asarray(self.translation)

    def to_reference(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        p = np.asarray(self.pivot)
        out = xy - np.asarray(self.translation) - p
        return self._rot(out, (-self.quarter_turns) % 4) + p


@dataclass(frozen=True)
class StretchMap:
    """Piecewise-linear streamwise stretch of the reference channel segment.

    Reference x in [0, 1] maps to [offset, offset + length]: the slab up to
    `split` is rigidly attached at `offset`, the rest stretches linearly so
    that x=1 lands at offset + length.
    """

    split: float
    offset: float = 1.0

    def zeta(self, length) -> np.ndarray:
        z = (np.asarray(length, dtype=float) - self.split) / (1.0 - self.split)
        if np.any(z <= 0):
            raise ValueError("stretch factor must stay positive on the axis")
        return z

    def to_physical(self, xy, length: float) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        x, y = xy[:, 0], xy[:, 1]
        z = float(self.zeta(length))
        xp = np.where(x <= self.split + 1e-14,
                      self.offset + x,
                      self.offset + self.split + z * (x - self.split))
        return np.column_stack([xp, y])

    def to_reference(self, xy, length: float) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        x, y = xy[:, 0], xy[:, 1]
        z = float(self.zeta(length))
        xr = np.where(x <= self.offset + self.split + 1e-14,
                      x - self.offset,
                      self.split + (x - self.offset - self.split) / z)
        return np.column_stack([xr, y])


def stretch_pullback_scales(smap: StretchMap, axis: ParamAxis):
    """Nodal coefficient vectors of the stretched-region sectional matrices.

    Returns (inv_zeta, zeta) on the axis controlling the physical length: the
    x-derivative (and streamline stabilization) blocks scale by 1/zeta, the
    y-derivative block by zeta, and the transport block is scale-free.
    """
    z = smap.zeta(axis.nodes)
    return 1.0 / z, z
