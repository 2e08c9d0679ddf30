"""One-dimensional parameter grids and linear interpolation of nodal modes.

Every parameter (physical coefficients as well as interface trace values) lives
on a compact interval discretized by collocation nodes.  Surrogate evaluation
between nodes is piecewise linear, so the only runtime primitives needed are
bracketing-interval lookup and two-point weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ParamAxis",
    "ParamPoint",
    "make_uniform_axis",
    "interp_weights",
    "interp_mode",
]


@dataclass(frozen=True)
class ParamAxis:
    """A named compact interval with a strictly increasing node set."""

    name: str
    nodes: np.ndarray
    uniform: bool = field(default=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError(f"axis {self.name!r}: need at least two nodes")
        if not np.all(np.isfinite(nodes)):
            raise ValueError(f"axis {self.name!r}: non-finite nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError(f"axis {self.name!r}: nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)

    def contains(self, x: float, rtol: float = 1e-12) -> bool:
        pad = rtol * max(1.0, abs(self.lo), abs(self.hi))
        return self.lo - pad <= x <= self.hi + pad


@dataclass(frozen=True)
class ParamPoint:
    """Axis-name -> value map identifying one point in parameter space."""

    values: dict[str, float]

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def subset(self, names) -> "ParamPoint":
        return ParamPoint({n: self.values[n] for n in names})


def make_uniform_axis(name: str, lo: float, hi: float, spacing: float) -> ParamAxis:
    """Equally spaced axis over [lo, hi] with node count floor((hi-lo)/spacing)+1.

    The division is rounded with a small tolerance so that floating-point
    representations of exact ratios (e.g. 49/0.001) do not drop an interval.
    When the ratio is not an integer the nodes are spread uniformly, which
    stretches the spacing slightly above the request.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(spacing)):
        raise ValueError(f"axis {name!r}: non-finite bounds or spacing")
    if not lo < hi:
        raise ValueError(f"axis {name!r}: lo must be < hi")
    if spacing <= 0:
        raise ValueError(f"axis {name!r}: spacing must be positive")
    if spacing >= hi - lo:
        raise ValueError(f"axis {name!r}: spacing {spacing} >= interval length {hi - lo}")
    ratio = (hi - lo) / spacing
    n_intervals = int(np.floor(ratio + 1e-9 * max(1.0, ratio)))
    nodes = np.linspace(lo, hi, n_intervals + 1)
    return ParamAxis(name, nodes, uniform=True)


def _bracket(axis: ParamAxis, x: float) -> int:
    """Index i of the interval [nodes[i], nodes[i+1]] containing x."""
    nodes = axis.nodes
    if axis.uniform:
        h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
        i = int((x - nodes[0]) / h)
    else:
        i = int(np.searchsorted(nodes, x, side="right") - 1)
    return min(max(i, 0), nodes.size - 2)


def interp_weights(axis: ParamAxis, x: float) -> tuple[int, int, float, float]:
    """Bracketing node indices and convex weights for linear interpolation at x."""
    if not axis.contains(x):
        raise ValueError(
            f"value {x} outside axis {axis.name!r} bounds [{axis.lo}, {axis.hi}]"
        )
    x = min(max(x, axis.lo), axis.hi)
    i = _bracket(axis, x)
    x0, x1 = axis.nodes[i], axis.nodes[i + 1]
    t = (x - x0) / (x1 - x0)
    return i, i + 1, 1.0 - t, t


def interp_mode(axis: ParamAxis, values, x: float) -> float:
    """Piecewise-linear interpolation of nodal values at x; exact at nodes."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != axis.n_nodes:
        raise ValueError(
            f"values length {values.shape[-1]} does not match axis "
            f"{axis.name!r} with {axis.n_nodes} nodes"
        )
    i0, i1, w0, w1 = interp_weights(axis, x)
    return w0 * values[..., i0] + w1 * values[..., i1]
