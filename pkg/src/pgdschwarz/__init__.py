"""Offline/online solver for parametric elliptic problems on overlapping
subdomains: local separated (PGD) surrogate models built per subdomain, glued
online through a matrix-free interface system."""

from .grids import ParamAxis, ParamPoint, interp_mode, make_uniform_axis
from .pgd import PgdSettings
from .separated import SeparatedOperator, SeparatedVector

__all__ = [
    "ParamAxis",
    "ParamPoint",
    "interp_mode",
    "make_uniform_axis",
    "PgdSettings",
    "SeparatedOperator",
    "SeparatedVector",
]
