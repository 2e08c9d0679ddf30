"""Benchmark configuration: YAML schema, dataclasses, validation.

All mesh spacings, parameter grids, solver tolerances and the multi-domain
placement/conductivity tables live in version-controlled config files; nothing
benchmark-specific is hard-coded outside them.  See configs/README.md for the
schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .pgd import PgdSettings
from .schwarz import GmresSettings

__all__ = ["AxisSpec", "PlacementSpec", "ReferenceSpec", "BenchmarkConfig",
           "load_config", "ConfigError"]

BENCHMARKS = ("test1", "graetz", "thermal")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    spacing: float

    def check(self, label: str):
        if not self.lo < self.hi:
            raise ConfigError(f"{label}: lo must be < hi")
        if self.spacing <= 0:
            raise ConfigError(f"{label}: spacing must be positive")
        if self.spacing >= self.hi - self.lo:
            raise ConfigError(f"{label}: spacing does not fit in the interval")


@dataclass(frozen=True)
class ReferenceSpec:
    name: str
    tips: tuple[str, ...]       # edges carrying parametrized trace data
    flux_tip: str | None = None


@dataclass(frozen=True)
class PlacementSpec:
    name: str
    ref: str
    translate: tuple[float, float]
    quarter_turns: int


@dataclass
class BenchmarkConfig:
    benchmark: str
    scale: str
    mesh: dict
    axes: dict[str, AxisSpec]
    max_active: dict[str, int]
    pgd: PgdSettings
    gmres: GmresSettings
    online_mu: list
    supg_freeze: float | None = None
    references: list[ReferenceSpec] = field(default_factory=list)
    placements: list[PlacementSpec] = field(default_factory=list)
    cases: dict[str, dict[str, float]] = field(default_factory=dict)
    outflow_value: float = 0.0
    raw: dict = field(default_factory=dict)

    def axis(self, name: str) -> AxisSpec:
        return self.axes[name]


_TIPS = ("left", "right", "bottom", "top")


def _axis_from(d, label) -> AxisSpec:
    try:
        a = AxisSpec(float(d["lo"]), float(d["hi"]), float(d["spacing"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{label}: needs lo/hi/spacing") from exc
    a.check(label)
    return a


def load_config(path) -> BenchmarkConfig:
    raw = yaml.safe_load(Path(path).read_text())
    return parse_config(raw)


def parse_config(raw: dict) -> BenchmarkConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    bench = raw.get("benchmark")
    if bench not in BENCHMARKS:
        raise ConfigError(f"benchmark must be one of {BENCHMARKS}, got {bench!r}")
    mesh = dict(raw.get("mesh", {}))
    for key, val in mesh.items():
        if isinstance(val, (int, float)) and key != "overlap_n" and val <= 0:
            raise ConfigError(f"mesh.{key}: must be positive")
    axes = {name: _axis_from(d, f"parameters.{name}")
            for name, d in raw.get("parameters", {}).items()}
    if "trace" not in axes:
        raise ConfigError("parameters.trace: required (interface trace bounds)")

    active = raw.get("active", {})
    max_active = {}
    for key, val in active.items():
        if int(val) < 1:
            raise ConfigError(f"active.{key}: must be >= 1")
        max_active[key] = int(val)

    p = raw.get("pgd", {})
    try:
        eps_c = p.get("eps_compress", 1e-3)
        pgd = PgdSettings(
            eps_enrich=float(p.get("eps_enrich", 1e-4)),
            eps_compress=None if eps_c in (None, 0) else float(eps_c),
            max_modes=int(p.get("max_modes", 200)),
            als_tol=float(p.get("als_tol", 1e-4)),
            als_max_iters=int(p.get("als_max_iters", 25)),
            seed=int(p.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"pgd: {exc}") from exc
    g = raw.get("gmres", {})
    gmres = GmresSettings(tol=float(g.get("tol", 1e-6)),
                          restart=int(g.get("restart", 30)),
                          max_iters=int(g.get("max_iters", 1000)))
    if gmres.tol <= 0 or gmres.restart < 1 or gmres.max_iters < 1:
        raise ConfigError("gmres: tol must be positive, restart/max_iters >= 1")

    online_mu = list(raw.get("online", {}).get("mu_values", []))

    cfg = BenchmarkConfig(
        benchmark=bench,
        scale=str(raw.get("scale", "desk")),
        mesh=mesh,
        axes=axes,
        max_active=max_active,
        pgd=pgd,
        gmres=gmres,
        online_mu=online_mu,
        supg_freeze=(float(raw["supg"]["freeze_mu1"]) if "supg" in raw else None),
        outflow_value=float(raw.get("outflow_value", 0.0)),
        raw=raw,
    )

    if bench == "test1":
        n = int(mesh.get("overlap_n", 1))
        if n < 1:
            raise ConfigError("mesh.overlap_n: must be >= 1")
        if "mu" not in axes:
            raise ConfigError("parameters.mu: required for test1")
        if "max_active" not in max_active:
            raise ConfigError("active.max_active: required for test1")
    elif bench == "graetz":
        for name in ("mu1", "mu2"):
            if name not in axes:
                raise ConfigError(f"parameters.{name}: required for graetz")
        hbar = float(mesh.get("hbar", 0.0))
        if not 0 < hbar < 1:
            raise ConfigError("mesh.hbar: must lie in (0, 1)")
        if axes["mu2"].lo <= hbar:
            raise ConfigError("parameters.mu2: lower bound must exceed mesh.hbar "
                              "(stretch factor must stay positive)")
        if cfg.supg_freeze is None:
            raise ConfigError("supg.freeze_mu1: required for graetz")
        for key in ("max_active_inlet", "max_active_channel"):
            if key not in max_active:
                raise ConfigError(f"active.{key}: required for graetz")
    elif bench == "thermal":
        if "mu" not in axes:
            raise ConfigError("parameters.mu: required for thermal")
        if "max_active" not in max_active:
            raise ConfigError("active.max_active: required for thermal")
        refs = []
        for d in raw.get("references", []):
            tips = tuple(d.get("tips", []))
            for t in tips + ((d.get("flux_tip"),) if d.get("flux_tip") else ()):
                if t not in _TIPS:
                    raise ConfigError(f"references.{d.get('name')}: unknown tip {t!r}")
            refs.append(ReferenceSpec(str(d["name"]), tips, d.get("flux_tip")))
        if not refs:
            raise ConfigError("references: required for thermal")
        cfg.references = refs
        names = {r.name for r in refs}
        places = []
        for d in raw.get("placements", []):
            if d.get("ref") not in names:
                raise ConfigError(f"placements.{d.get('name')}: unknown reference "
                                  f"{d.get('ref')!r}")
            qt = d.get("quarter_turns", 0)
            if qt != int(qt):
                raise ConfigError(f"placements.{d.get('name')}: rotation must be a "
                                  "whole number of quarter turns")
            tr = d.get("translate", [0.0, 0.0])
            places.append(PlacementSpec(str(d["name"]), str(d["ref"]),
                                        (float(tr[0]), float(tr[1])), int(qt) % 4))
        if not places:
            raise ConfigError("placements: required for thermal")
        cfg.placements = places
        pnames = {p.name for p in places}
        mu_axis = axes["mu"]
        for case, table in raw.get("cases", {}).items():
            vals = {}
            for inst, v in table.items():
                if inst not in pnames:
                    raise ConfigError(f"cases.{case}: unknown placement {inst!r}")
                v = float(v)
                if not mu_axis.lo <= v <= mu_axis.hi:
                    raise ConfigError(f"cases.{case}.{inst}: conductivity {v} outside "
                                      f"the mu axis [{mu_axis.lo}, {mu_axis.hi}]")
                vals[inst] = v
            if set(vals) != pnames:
                raise ConfigError(f"cases.{case}: must set every placement")
            cfg.cases[case] = vals
        if not cfg.cases:
            raise ConfigError("cases: at least one conductivity case required")
    return cfg
