"""Hyperboloid geometry: inner product, distances, tangent maps, triangle score."""

from lorentzfm.geometry.lorentz import (
    EXP_MAP_EPS,
    MANIFOLD_TOL,
    DimensionError,
    FloatArray,
    GeometryError,
    LorentzPoint,
    ManifoldDomainError,
    NonFiniteError,
    TangentVector,
    check_on_manifold,
    exp_map,
    geodesic_distance,
    lift,
    lorentz_inner,
    lorentz_norm,
    lorentz_sqdist,
    manifold_residual,
    origin,
    relift,
    score_terms,
    tangent_project,
    triangle_defect,
    triangle_score,
)

__all__ = [
    "EXP_MAP_EPS",
    "MANIFOLD_TOL",
    "DimensionError",
    "FloatArray",
    "GeometryError",
    "LorentzPoint",
    "ManifoldDomainError",
    "NonFiniteError",
    "TangentVector",
    "check_on_manifold",
    "exp_map",
    "geodesic_distance",
    "lift",
    "lorentz_inner",
    "lorentz_norm",
    "lorentz_sqdist",
    "manifold_residual",
    "origin",
    "relift",
    "score_terms",
    "tangent_project",
    "triangle_defect",
    "triangle_score",
]
