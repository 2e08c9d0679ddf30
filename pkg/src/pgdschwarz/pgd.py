"""Greedy rank-one enrichment for affine-parametric linear systems.

Solves K(p) u(p) = F(p) with K and F in separated form: each enrichment step
computes one rank-one term by an alternating-directions fixed point (spatial
sparse solve + pointwise collocation solves per parametric axis), and the
greedy loop stops when the amplitude of the new term relative to the first
drops below the enrichment tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .separated import (
    SeparatedOperator,
    SeparatedVector,
    add,
    amplitude,
    apply_operator,
    compress,
    normalized,
    scale,
)

__all__ = ["PgdSettings", "SolveReport", "residual", "enrich_once", "solve"]


@dataclass(frozen=True)
class PgdSettings:
    eps_enrich: float = 1e-4
    eps_compress: float | None = 1e-3
    max_modes: int = 200
    als_tol: float = 1e-4
    als_max_iters: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.eps_enrich <= 0 or self.als_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.eps_compress is not None and self.eps_compress <= 0:
            raise ValueError("eps_compress must be positive or None")
        if self.max_modes < 1 or self.als_max_iters < 1:
            raise ValueError("max_modes and als_max_iters must be >= 1")


@dataclass
class SolveReport:
    amplitudes: list[float] = field(default_factory=list)
    converged: bool = True
    n_modes_raw: int = 0
    n_modes: int = 0
    als_converged: list[bool] = field(default_factory=list)

    @property
    def relative_amplitudes(self) -> list[float]:
        if not self.amplitudes or self.amplitudes[0] == 0:
            return [0.0 for _ in self.amplitudes]
        a0 = self.amplitudes[0]
        return [a / a0 for a in self.amplitudes]


class SingularCollocationError(RuntimeError):
    pass


def residual(K: SeparatedOperator, F: SeparatedVector,
             u: SeparatedVector) -> SeparatedVector:
    """F - K u as a term concatenation (applied terms negated)."""
    if u.n_terms == 0:
        return F
    return add(F, scale(apply_operator(K, u), -1.0))


def _aligned_matrices(matrices):
    """Data vectors of each matrix on the shared union sparsity pattern."""
    pattern = None
    for m in matrices:
        s = sp.csc_matrix(m, copy=True)
        s.data = np.ones_like(s.data)
        pattern = s if pattern is None else pattern + s
    pattern.sort_indices()
    tind, tptr = pattern.indices, pattern.indptr
    datas = []
    for m in matrices:
        m = sp.csc_matrix(m)
        m.sort_indices()
        d = np.zeros_like(pattern.data)
        for j in range(m.shape[1]):
            t0, t1 = tptr[j], tptr[j + 1]
            k0, k1 = m.indptr[j], m.indptr[j + 1]
            d[t0 + np.searchsorted(tind[t0:t1], m.indices[k0:k1])] = m.data[k0:k1]
        datas.append(d)
    return pattern, datas


class _Workspace:
    """Contractions shared by the ALS sweeps for a fixed previous iterate u."""

    def __init__(self, K: SeparatedOperator, F: SeparatedVector, u: SeparatedVector):
        if K.axis_names() != F.axis_names():
            raise ValueError("operator and right-hand side axes differ")
        if u.axis_names() != F.axis_names() or u.n_space != F.n_space:
            raise ValueError("iterate axes or size do not match the system")
        self.K, self.F, self.u = K, F, u
        self.kv = [Kl @ u.spatial for Kl in K.matrices]       # per l: (n, M)
        self.pattern, self.aligned = _aligned_matrices(K.matrices)
        # operator coefficients applied to the modes of u, per axis and term
        self.xi_u = [
            [K.coeffs[k][:, ell : ell + 1] * u.modes[k] for ell in range(K.n_terms)]
            for k in range(len(K.axes))
        ]

    def weighted_matrix(self, c: np.ndarray) -> sp.csc_matrix:
        data = c[0] * self.aligned[0]
        for ell in range(1, len(self.aligned)):
            data = data + c[ell] * self.aligned[ell]
        return sp.csc_matrix((data, self.pattern.indices, self.pattern.indptr),
                             shape=self.pattern.shape)

    def trial_products(self, t_modes):
        """All parametric contractions of the trial sections; per axis."""
        K, F, u = self.K, self.F, self.u
        pf = [t @ F.modes[k] for k, t in enumerate(t_modes)]
        pt = [
            np.array([t @ (K.coeffs[k][:, ell] * t) for ell in range(K.n_terms)])
            for k, t in enumerate(t_modes)
        ]
        pu = [
            np.stack([t @ self.xi_u[k][ell] for ell in range(K.n_terms)])
            if u.n_terms else np.zeros((K.n_terms, 0))
            for k, t in enumerate(t_modes)
        ]
        return pf, pt, pu


def _product_except(factors, skip):
    out = None
    for k, f in enumerate(factors):
        if k == skip:
            continue
        out = f.copy() if out is None else out * f
    return out if out is not None else 1.0


def enrich_once(K: SeparatedOperator, F: SeparatedVector, u_prev: SeparatedVector,
                settings: PgdSettings, rng: np.random.Generator | None = None):
    """One greedy step: rank-one term solving the residual equation by ALS.

    Returns (term, als_converged) with the term already normalized (unit
    parametric sections, magnitude in the spatial one).
    """
    if rng is None:
        rng = np.random.default_rng(settings.seed)
    ws = _Workspace(K, F, u_prev)
    ndim = len(F.axes)
    n = F.n_space
    t_modes = [rng.uniform(-1.0, 1.0, ax.n_nodes) for ax in F.axes]
    v = rng.uniform(-1.0, 1.0, n)
    zero_term = SeparatedVector.from_terms(
        F.axes, [(np.zeros(n), [np.zeros(ax.n_nodes) for ax in F.axes])]
    )
    if F.n_terms == 0:
        return zero_term, True

    pf, pt, pu = ws.trial_products(t_modes)
    fv = None
    prev = None
    converged = False
    for _ in range(settings.als_max_iters):
        # spatial update: (sum_l c_l K_l) v = contracted residual
        c = np.ones(K.n_terms)
        beta = np.ones(F.n_terms)
        gamma = np.ones((K.n_terms, u_prev.n_terms))
        for k in range(ndim):
            c = c * pt[k]
            beta = beta * pf[k]
            gamma = gamma * pu[k]
        rhs = F.spatial @ beta
        for ell in range(K.n_terms):
            if u_prev.n_terms:
                rhs -= ws.kv[ell] @ gamma[ell]
        try:
            lu = spla.splu(ws.weighted_matrix(c), permc_spec="MMD_AT_PLUS_A")
            v = lu.solve(rhs)
        except RuntimeError as exc:  # pragma: no cover - scipy raising style
            raise SingularCollocationError(f"singular spatial system: {exc}") from exc
        if not np.all(np.isfinite(v)):
            raise SingularCollocationError("spatial solve produced non-finite values")
        fv = F.spatial.T @ v
        kvv = np.array([v @ (Kl @ v) for Kl in K.matrices])
        kuv = np.stack([kv.T @ v for kv in ws.kv]) if u_prev.n_terms \
            else np.zeros((K.n_terms, 0))

        # parametric updates, axis by axis (Gauss-Seidel over directions)
        for k in range(ndim):
            den = np.zeros(F.axes[k].n_nodes)
            num = ws.F.modes[k] @ (fv * _product_except(pf, k))
            for ell in range(K.n_terms):
                wt = kvv[ell] * _product_except([p[ell] for p in pt], k)
                den += wt * K.coeffs[k][:, ell]
                if u_prev.n_terms:
                    coef = kuv[ell] * _product_except([p[ell] for p in pu], k)
                    num -= K.coeffs[k][:, ell] * (u_prev.modes[k] @ coef)
            bad = np.abs(den) < 1e-300
            if np.any(bad):
                node = int(np.flatnonzero(bad)[0])
                raise SingularCollocationError(
                    f"zero collocation denominator on axis "
                    f"{F.axes[k].name!r} at node {node}"
                )
            t_modes[k] = num / den
            pf[k] = t_modes[k] @ F.modes[k]
            pt[k] = np.array([
                t_modes[k] @ (K.coeffs[k][:, ell] * t_modes[k])
                for ell in range(K.n_terms)
            ])
            if u_prev.n_terms:
                pu[k] = np.stack([
                    t_modes[k] @ ws.xi_u[k][ell] for ell in range(K.n_terms)
                ])

        amp = amplitude(v, t_modes)
        if amp == 0.0:
            return zero_term, True
        if prev is not None:
            dot = float(v @ prev[0])
            na, nb = float(v @ v), float(prev[0] @ prev[0])
            for k in range(ndim):
                dot *= float(t_modes[k] @ prev[1][k])
                na *= float(t_modes[k] @ t_modes[k])
                nb *= float(prev[1][k] @ prev[1][k])
            diff2 = max(na + nb - 2.0 * dot, 0.0)
            if np.sqrt(diff2) <= settings.als_tol * np.sqrt(na):
                converged = True
                break
        prev = (v.copy(), [t.copy() for t in t_modes])
    term = SeparatedVector.from_terms(F.axes, [(v, t_modes)])
    return normalized(term), converged


def solve(K: SeparatedOperator, F: SeparatedVector, settings: PgdSettings,
          label: str = "") -> tuple[SeparatedVector, SolveReport]:
    """Greedy enrichment loop with optional terminal compression.

    Stops when the new term's amplitude relative to the first mode falls below
    `eps_enrich`; hitting `max_modes` first is reported via `converged=False`.
    """
    report = SolveReport()
    u = SeparatedVector.zero(F.n_space, F.axes)
    amp_first = None
    report.converged = False
    for mode in range(settings.max_modes):
        rng = np.random.default_rng([settings.seed, mode])
        term, als_ok = enrich_once(K, F, u, settings, rng)
        amp = amplitude(*term.term(0))
        report.amplitudes.append(amp)
        report.als_converged.append(als_ok)
        if amp_first is None:
            if amp == 0.0:          # zero right-hand side
                report.converged = True
                break
            amp_first = amp
        if amp / amp_first < settings.eps_enrich:
            report.converged = True
            break
        u = add(u, term)
    report.n_modes_raw = u.n_terms
    if settings.eps_compress is not None and u.n_terms > 1:
        u = compress(u, settings.eps_compress)
    report.n_modes = u.n_terms
    return u, report
