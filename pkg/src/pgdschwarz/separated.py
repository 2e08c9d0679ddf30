"""Separated (sum of rank-one terms) vectors and operators.

A separated vector over one spatial dimension and D parametric axes stores its
M terms in blocked form: one (n_space, M) matrix of spatial modes plus one
(n_k, M) matrix of nodal parametric modes per axis.  Parametric axes act by
pointwise collocation, so a separated operator carries one sparse spatial
matrix per term and a diagonal (nodal) coefficient vector per axis.

All values are immutable by convention: arithmetic returns new objects and the
arrays of a result are never views into mutable state shared with callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grids import ParamAxis, ParamPoint, interp_weights

__all__ = [
    "SeparatedVector",
    "SeparatedOperator",
    "evaluate",
    "apply_operator",
    "add",
    "scale",
    "append_term",
    "extend_dims",
    "amplitude",
    "amplitudes",
    "normalized",
    "inner",
    "norm",
    "compress",
    "dense_tensor",
    "operator_at",
]


@dataclass(frozen=True)
class SeparatedVector:
    """Rank-M separated vector: dim 0 spatial, dims >= 1 parametric."""

    axes: tuple[ParamAxis, ...]
    spatial: np.ndarray            # (n_space, M)
    modes: tuple[np.ndarray, ...]  # per axis, (axis.n_nodes, M)

    def __post_init__(self):
        spatial = np.atleast_2d(np.asarray(self.spatial, dtype=float))
        object.__setattr__(self, "spatial", spatial)
        object.__setattr__(self, "axes", tuple(self.axes))
        modes = tuple(np.atleast_2d(np.asarray(m, dtype=float)) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if len(modes) != len(self.axes):
            raise ValueError("one mode block per parametric axis required")
        m = spatial.shape[1]
        for ax, block in zip(self.axes, modes):
            if block.shape != (ax.n_nodes, m):
                raise ValueError(
                    f"mode block for axis {ax.name!r} has shape {block.shape}, "
                    f"expected {(ax.n_nodes, m)}"
                )

    @property
    def n_space(self) -> int:
        return self.spatial.shape[0]

    @property
    def n_terms(self) -> int:
        return self.spatial.shape[1]

    def axis_names(self) -> tuple[str, ...]:
        return tuple(ax.name for ax in self.axes)

    def term(self, m: int) -> tuple[np.ndarray, list[np.ndarray]]:
        return self.spatial[:, m].copy(), [blk[:, m].copy() for blk in self.modes]

    @staticmethod
    def zero(n_space: int, axes=()) -> "SeparatedVector":
        axes = tuple(axes)
        return SeparatedVector(
            axes,
            np.zeros((n_space, 0)),
            tuple(np.zeros((ax.n_nodes, 0)) for ax in axes),
        )

    @staticmethod
    def from_terms(axes, terms) -> "SeparatedVector":
        """Build from a list of (spatial_vector, [mode_vector per axis]) pairs."""
        axes = tuple(axes)
        if not terms:
            raise ValueError("from_terms needs at least one term; use zero()")
        spatial = np.column_stack([np.asarray(t[0], dtype=float) for t in terms])
        modes = tuple(
            np.column_stack([np.asarray(t[1][k], dtype=float) for t in terms])
        for k in range(len(axes)))
        return SeparatedVector(axes, spatial, modes)


@dataclass(frozen=True)
class SeparatedOperator:
    """Affine-parametric operator: sum over terms of coeff(params) * matrix."""

    axes: tuple[ParamAxis, ...]
    matrices: tuple            # per term, sparse (n, n) in CSR
    coeffs: tuple[np.ndarray, ...]  # per axis, (axis.n_nodes, L)

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        mats = tuple(sp.csr_matrix(m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        coeffs = tuple(np.atleast_2d(np.asarray(c, dtype=float)) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != len(self.axes):
            raise ValueError("one coefficient block per parametric axis required")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise ValueError("all spatial matrices must share the same shape")
        for ax, block in zip(self.axes, coeffs):
            if block.shape != (ax.n_nodes, len(mats)):
                raise ValueError(
                    f"coefficient block for axis {ax.name!r} has shape "
                    f"{block.shape}, expected {(ax.n_nodes, len(mats))}"
                )

    @property
    def n_space(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def n_terms(self) -> int:
        return len(self.matrices)

    def axis_names(self) -> tuple[str, ...]:
        return tuple(ax.name for ax in self.axes)


def _weights_at(axes, modes, point: ParamPoint) -> np.ndarray:
    """Product over axes of linearly interpolated mode rows at the point."""
    m = modes[0].shape[1] if modes else 0
    w = np.ones(m)
    for ax, block in zip(axes, modes):
        if ax.name not in point:
            raise KeyError(f"parameter point is missing axis {ax.name!r}")
        i0, i1, w0, w1 = interp_weights(ax, point[ax.name])
        w = w * (w0 * block[i0, :] + w1 * block[i1, :])
    return w


def evaluate(v: SeparatedVector, point: ParamPoint) -> np.ndarray:
    """Dense spatial vector of v at one parameter point (linear in-between nodes)."""
    if v.n_terms == 0:
        return np.zeros(v.n_space)
    return v.spatial @ _weights_at(v.axes, v.modes, point)


def operator_at(op: SeparatedOperator, point: ParamPoint):
    """Sparse spatial matrix of the operator collocated/interpolated at a point."""
    w = _weights_at(op.axes, op.coeffs, point)
    out = w[0] * op.matrices[0]
    for ell in range(1, op.n_terms):
        out = out + w[ell] * op.matrices[ell]
    return out.tocsr()


def apply_operator(op: SeparatedOperator, v: SeparatedVector) -> SeparatedVector:
    """Separated product op*v with op.n_terms * v.n_terms resulting terms."""
    if op.axis_names() != v.axis_names():
        raise ValueError(
            f"operator axes {op.axis_names()} do not match vector axes {v.axis_names()}"
        )
    if op.n_space != v.n_space:
        raise ValueError("spatial dimension mismatch between operator and vector")
    if v.n_terms == 0:
        return SeparatedVector.zero(v.n_space, v.axes)
    spatial = np.hstack([K @ v.spatial for K in op.matrices])
    modes = tuple(
        np.hstack([coeff[:, ell : ell + 1] * mode for ell in range(op.n_terms)])
        for coeff, mode in zip(op.coeffs, v.modes)
    )
    return SeparatedVector(v.axes, spatial, modes)


def add(a: SeparatedVector, b: SeparatedVector) -> SeparatedVector:
    """Term-list concatenation; no recompression."""
    if a.axis_names() != b.axis_names() or a.n_space != b.n_space:
        raise ValueError("cannot add separated vectors with different dims")
    if a.n_terms == 0:
        return b
    if b.n_terms == 0:
        return a
    return SeparatedVector(
        a.axes,
        np.hstack([a.spatial, b.spatial]),
        tuple(np.hstack([ma, mb]) for ma, mb in zip(a.modes, b.modes)),
    )


def scale(a: SeparatedVector, c: float) -> SeparatedVector:
    return SeparatedVector(a.axes, c * a.spatial, a.modes)


def append_term(a: SeparatedVector, spatial_vec, mode_vecs) -> SeparatedVector:
    term = SeparatedVector.from_terms(a.axes, [(spatial_vec, list(mode_vecs))])
    return add(a, term)


def extend_dims(v: SeparatedVector, target_axes) -> SeparatedVector:
    """Re-host v on a larger ordered axis list; new axes get constant-1 modes."""
    target_axes = tuple(target_axes)
    names = [ax.name for ax in target_axes]
    if len(set(names)) != len(names):
        raise ValueError("duplicate axis names in target ordering")
    own = {ax.name: k for k, ax in enumerate(v.axes)}
    missing = set(own) - set(names)
    if missing:
        raise ValueError(f"target ordering drops existing axes {sorted(missing)}")
    modes = []
    for ax in target_axes:
        if ax.name in own:
            modes.append(v.modes[own[ax.name]])
        else:
            modes.append(np.ones((ax.n_nodes, v.n_terms)))
    return SeparatedVector(target_axes, v.spatial, tuple(modes))


def amplitude(spatial_vec, mode_vecs) -> float:
    """Product of Euclidean norms of all sectional vectors of one term."""
    a = float(np.linalg.norm(spatial_vec))
    for m in mode_vecs:
        a *= float(np.linalg.norm(m))
    return a


def amplitudes(v: SeparatedVector) -> np.ndarray:
    a = np.linalg.norm(v.spatial, axis=0)
    for block in v.modes:
        a = a * np.linalg.norm(block, axis=0)
    return a


def normalized(v: SeparatedVector) -> SeparatedVector:
    """Unit-norm parametric sections, magnitudes folded into the spatial ones."""
    spatial = v.spatial.copy()
    modes = []
    for block in v.modes:
        nrm = np.linalg.norm(block, axis=0)
        safe = np.where(nrm > 0, nrm, 1.0)
        modes.append(block / safe)
        spatial = spatial * nrm
    return SeparatedVector(v.axes, spatial, tuple(modes))


def inner(a: SeparatedVector, b: SeparatedVector) -> float:
    """Canonical inner product: sum over term pairs of sectional dot products."""
    if a.axis_names() != b.axis_names() or a.n_space != b.n_space:
        raise ValueError("incompatible separated vectors")
    if a.n_terms == 0 or b.n_terms == 0:
        return 0.0
    gram = a.spatial.T @ b.spatial
    for ma, mb in zip(a.modes, b.modes):
        gram = gram * (ma.T @ mb)
    return float(gram.sum())


def norm(v: SeparatedVector) -> float:
    return float(np.sqrt(max(inner(v, v), 0.0)))


def _fit_rank_one(target: SeparatedVector, sweeps: int = 50, tol: float = 1e-12):
    """Best rank-one approximation (ALS least squares) of a separated vector.

    Initialized from the target's largest-amplitude term, hence deterministic.
    Returns (spatial, [modes], amp).
    """
    m0 = int(np.argmax(amplitudes(target)))
    spatial = target.spatial[:, m0].copy()
    modes = [blk[:, m0].copy() for blk in target.modes]
    ndim = len(modes)
    zero = (spatial * 0.0, [m * 0.0 for m in modes], 0.0)
    prev_amp = 0.0
    for _ in range(sweeps):
        w = np.ones(target.n_terms)
        den = 1.0
        for k in range(ndim):
            w = w * (modes[k] @ target.modes[k])
            den *= float(modes[k] @ modes[k])
        if den == 0.0:
            return zero
        spatial = (target.spatial @ w) / den
        for k in range(ndim):
            w = spatial @ target.spatial
            den = float(spatial @ spatial)
            for kk in range(ndim):
                if kk == k:
                    continue
                w = w * (modes[kk] @ target.modes[kk])
                den *= float(modes[kk] @ modes[kk])
            if den == 0.0:
                return zero
            modes[k] = (target.modes[k] @ w) / den
        amp = amplitude(spatial, modes)
        if amp == 0.0 or abs(amp - prev_amp) <= tol * max(amp, 1.0):
            break
        prev_amp = amp
    return spatial, modes, amplitude(spatial, modes)


def compress(v: SeparatedVector, eps_star: float) -> SeparatedVector:
    """Greedy rank-one re-approximation of v down to relative mismatch eps_star.

    The mismatch is measured in the canonical norm; the result never has more
    terms than v (worst case v itself is returned unchanged).
    """
    if eps_star <= 0:
        raise ValueError("eps_star must be positive")
    if v.n_terms <= 1:
        return v
    norm_v = norm(v)
    if norm_v == 0.0:
        return SeparatedVector.zero(v.n_space, v.axes)
    w = SeparatedVector.zero(v.n_space, v.axes)
    dot_vw = 0.0
    norm_w2 = 0.0
    for _ in range(v.n_terms - 1):
        resid = add(v, scale(w, -1.0)) if w.n_terms else v
        spatial, modes, amp = _fit_rank_one(resid)
        if amp <= 1e-14 * norm_v:
            break
        t = SeparatedVector.from_terms(v.axes, [(spatial, modes)])
        dot_vw += inner(v, t)
        norm_w2 += 2.0 * inner(w, t) + inner(t, t)
        w = add(w, normalized(t))
        mismatch2 = max(norm_v**2 - 2.0 * dot_vw + norm_w2, 0.0)
        if np.sqrt(mismatch2) <= eps_star * norm_v:
            return w
    return v


def dense_tensor(v: SeparatedVector, max_entries: int = 2_000_000) -> np.ndarray:
    """Full tensor (n_space, n_1, ..., n_D); intended for small oracle checks."""
    shape = (v.n_space,) + tuple(ax.n_nodes for ax in v.axes)
    if np.prod(shape) > max_entries:
        raise ValueError(f"dense expansion of shape {shape} is too large")
    out = np.zeros(shape)
    for m in range(v.n_terms):
        term = v.spatial[:, m]
        for blk in v.modes:
            term = np.multiply.outer(term, blk[:, m])
        out += term
    return out
