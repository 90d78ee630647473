"""Hyperboloid-model primitives for the unit Lorentz manifold.

Points are numpy arrays whose last axis holds ambient coordinates
``(x0, x1, ..., xn)``; component 0 is the time coordinate and is never a
free parameter. Every function broadcasts over leading axes, so the same
code serves a single point, a batch of embeddings, or a full table.

Curvature is fixed: the manifold is ``{x : <x, x>_L = -1, x0 > 0}``.
"""

from __future__ import annotations

from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from lorentzfm.errors import NumericError

FloatArray: TypeAlias = npt.NDArray[np.float64]

# Array whose last axis is a point on the hyperboloid.
LorentzPoint: TypeAlias = FloatArray
# Array whose last axis is tangent to a LorentzPoint of the same shape.
TangentVector: TypeAlias = FloatArray

# Constraint violations below this (relative) level are treated as rounding.
MANIFOLD_TOL = 1e-6
# Tangent norms below this are a removable singularity of sinh(t)/t.
EXP_MAP_EPS = 1e-12


class GeometryError(NumericError):
    """Base exception for hyperboloid-geometry errors."""

    pass


class DimensionError(GeometryError):
    """Raised when ambient vectors disagree in length or are too short."""

    pass


class ManifoldDomainError(GeometryError):
    """Raised when a point is off the hyperboloid or a vector is not tangent."""

    pass


class NonFiniteError(GeometryError):
    """Raised when coordinates contain NaN or infinity."""

    pass


def _as_float(x: npt.ArrayLike) -> FloatArray:
    return np.asarray(x, dtype=np.float64)


def _check_pair(u: FloatArray, v: FloatArray) -> None:
    if u.ndim == 0 or v.ndim == 0:
        raise DimensionError("ambient vectors must have at least one axis")
    if u.shape[-1] != v.shape[-1]:
        raise DimensionError(
            f"ambient dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}"
        )
    if u.shape[-1] < 2:
        raise DimensionError(f"ambient dimension must be >= 2, got {u.shape[-1]}")


def _unwrap(value: FloatArray) -> FloatArray | float:
    return float(value) if value.ndim == 0 else value


def origin(dim: int) -> LorentzPoint:
    """Return the hyperboloid origin ``(1, 0, ..., 0)`` of ambient size ``dim``."""
    if dim < 2:
        raise DimensionError(f"ambient dimension must be >= 2, got {dim}")
    point = np.zeros(dim, dtype=np.float64)
    point[0] = 1.0
    return point


def lorentz_inner(u: npt.ArrayLike, v: npt.ArrayLike) -> FloatArray | float:
    """Lorentzian inner product ``-u0*v0 + sum_i ui*vi``.

    Args:
        u: Ambient vector(s), last axis of length n+1 >= 2.
        v: Ambient vector(s) broadcastable against ``u``.

    Returns:
        The inner product, a float for single vectors.

    Raises:
        DimensionError: If the last axes differ or are shorter than 2.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    return _unwrap(_inner(a, b))


def _inner(a: FloatArray, b: FloatArray) -> FloatArray:
    spatial = np.einsum("...i,...i->...", a[..., 1:], b[..., 1:])
    return np.asarray(spatial - a[..., 0] * b[..., 0], dtype=np.float64)


def lift(spatial: npt.ArrayLike) -> LorentzPoint:
    """Place spatial coordinates on the hyperboloid.

    The time coordinate is ``sqrt(1 + |spatial|^2)``.

    Args:
        spatial: Array whose last axis holds the n free coordinates.

    Returns:
        Array with one extra leading component on the last axis.

    Raises:
        NonFiniteError: If any coordinate is NaN or infinite.
    """
    s = _as_float(spatial)
    if s.ndim == 0:
        raise DimensionError("spatial coordinates must have at least one axis")
    if not np.all(np.isfinite(s)):
        raise NonFiniteError("spatial coordinates must be finite")
    x0 = np.sqrt(1.0 + np.einsum("...i,...i->...", s, s))
    return np.concatenate([x0[..., None], s], axis=-1)


def relift(x: npt.ArrayLike) -> LorentzPoint:
    """Recompute the time coordinate of ``x`` from its spatial part."""
    a = _as_float(x)
    out = a.copy()
    out[..., 0] = np.sqrt(1.0 + np.einsum("...i,...i->...", a[..., 1:], a[..., 1:]))
    return out


def manifold_residual(x: npt.ArrayLike) -> FloatArray | float:
    """Absolute constraint violation ``|<x, x>_L + 1|`` per point."""
    a = _as_float(x)
    _check_pair(a, a)
    return _unwrap(np.abs(_inner(a, a) + 1.0))


def check_on_manifold(x: npt.ArrayLike, tol: float = MANIFOLD_TOL) -> None:
    """Validate that every point in ``x`` lies on the hyperboloid.

    The residual is measured relative to ``max(1, x0^2)`` so that far
    points are judged at their own floating-point scale.

    Raises:
        ManifoldDomainError: If any point violates the constraint by more
            than ``tol`` or has a non-positive time coordinate.
    """
    a = _as_float(x)
    _check_pair(a, a)
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("point coordinates must be finite")
    scale = np.maximum(1.0, a[..., 0] ** 2)
    residual = np.abs(_inner(a, a) + 1.0) / scale
    if np.any(residual > tol) or np.any(a[..., 0] < 1.0 - tol):
        worst = float(np.max(residual))
        raise ManifoldDomainError(f"point is off the hyperboloid (relative residual {worst:.3e})")


def geodesic_distance(
    u: npt.ArrayLike, v: npt.ArrayLike, check: bool = True
) -> FloatArray | float:
    """Geodesic distance ``arccosh(-<u, v>_L)``.

    Evaluated as ``2 * arcsinh(|u - v|_L / 2)``, which is the same
    quantity without the cancellation arccosh suffers near 1. The squared
    chord is clamped at zero, equivalent to clamping the arccosh argument
    at one.

    Raises:
        ManifoldDomainError: If ``check`` is set and either input is off
            the hyperboloid, or ``-<u, v>_L`` falls below 1 by more than
            the tolerance.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    if check:
        check_on_manifold(a)
        check_on_manifold(b)
        if np.any(-_inner(a, b) < 1.0 - MANIFOLD_TOL):
            raise ManifoldDomainError("arccosh argument below 1 beyond tolerance")
    chord = np.maximum(_squared_chord(a, b), 0.0)
    return _unwrap(2.0 * np.arcsinh(np.sqrt(chord) / 2.0))


def _squared_chord(a: FloatArray, b: FloatArray) -> FloatArray:
    diff = a - b
    return _inner(diff, diff)


def lorentz_sqdist(u: npt.ArrayLike, v: npt.ArrayLike, check: bool = True) -> FloatArray | float:
    """Squared Lorentz distance ``-2 - 2<u, v>_L``.

    Computed as ``<u - v, u - v>_L``, identical on the manifold and exact
    zero for ``u == v``.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    if check:
        check_on_manifold(a)
        check_on_manifold(b)
    return _unwrap(np.maximum(_squared_chord(a, b), 0.0))


def triangle_score(u: npt.ArrayLike, v: npt.ArrayLike, check: bool = True) -> FloatArray | float:
    """Normalized Lorentz triangle-inequality defect through the origin.

    ``T(u, v) = (1 - <u, v>_L - u0 - v0) / (u0 * v0)``. Positive values
    mean the triangle (origin, u, v) violates the triangle inequality for
    squared Lorentz distances. Bounded in ``[-0.5, 2)``.

    Raises:
        ManifoldDomainError: If ``check`` is set and an input is off the
            hyperboloid.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    if check:
        check_on_manifold(a)
        check_on_manifold(b)
    return _unwrap(_triangle(a, b))


def _triangle(a: FloatArray, b: FloatArray) -> FloatArray:
    a0, b0 = a[..., 0], b[..., 0]
    return (1.0 - _inner(a, b) - a0 - b0) / (a0 * b0)


def score_terms(
    u: npt.ArrayLike, v: npt.ArrayLike
) -> tuple[FloatArray | float, FloatArray | float]:
    """Split the triangle score into its interaction and linear terms.

    Returns:
        ``(interaction, linear)`` with ``T = interaction - linear``, where
        interaction is ``(1 - <u, v>_L) / (u0 v0)`` and linear is
        ``1/u0 + 1/v0``.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    a0, b0 = a[..., 0], b[..., 0]
    interaction = (1.0 - _inner(a, b)) / (a0 * b0)
    linear = 1.0 / a0 + 1.0 / b0
    return _unwrap(interaction), _unwrap(np.asarray(linear))


def triangle_defect(u: npt.ArrayLike, v: npt.ArrayLike) -> FloatArray | float:
    """Unnormalized defect ``d2(u, v) - d2(0, u) - d2(0, v)``.

    Evaluated from three independent squared-distance calls; its sign is
    the sign of :func:`triangle_score`.
    """
    a, b = _as_float(u), _as_float(v)
    _check_pair(a, b)
    zero = np.broadcast_to(origin(a.shape[-1]), np.broadcast_shapes(a.shape, b.shape))
    d_uv = _as_float(lorentz_sqdist(a, b))
    d_0u = _as_float(lorentz_sqdist(zero, a))
    d_0v = _as_float(lorentz_sqdist(zero, b))
    return _unwrap(d_uv - d_0u - d_0v)


def tangent_project(x: npt.ArrayLike, g: npt.ArrayLike) -> TangentVector:
    """Orthogonally project ``g`` onto the tangent space at ``x``.

    Returns ``g + <x, g>_L * x``, which satisfies ``<x, result>_L = 0``.
    """
    a, b = _as_float(x), _as_float(g)
    _check_pair(a, b)
    return b + _inner(a, b)[..., None] * a


def lorentz_norm(v: npt.ArrayLike) -> FloatArray | float:
    """Lorentzian norm ``sqrt(<v, v>_L)`` of tangent vectors (clamped at 0)."""
    a = _as_float(v)
    _check_pair(a, a)
    return _unwrap(np.sqrt(np.maximum(_inner(a, a), 0.0)))


def exp_map(x: npt.ArrayLike, v: npt.ArrayLike, check: bool = True) -> LorentzPoint:
    """Exponential map at base point ``x`` applied to tangent vector ``v``.

    ``cosh(|v|_L) x + sinh(|v|_L) v / |v|_L``; returns ``x`` unchanged
    where ``|v|_L`` is below ``EXP_MAP_EPS``.

    Raises:
        ManifoldDomainError: If ``check`` is set and ``v`` is not tangent
            at ``x`` within tolerance.
    """
    a, b = _as_float(x), _as_float(v)
    _check_pair(a, b)
    if check:
        check_on_manifold(a)
        scale = (1.0 + np.abs(a[..., 0])) * (1.0 + np.max(np.abs(b), axis=-1))
        if np.any(np.abs(_inner(a, b)) > MANIFOLD_TOL * scale):
            raise ManifoldDomainError("vector is not tangent at the base point")
    return _exp(a, b)


def _exp(a: FloatArray, b: FloatArray) -> FloatArray:
    norm = np.asarray(lorentz_norm(b))
    moving = norm > EXP_MAP_EPS
    safe = np.where(moving, norm, 1.0)
    stepped = np.cosh(norm)[..., None] * a + (np.sinh(norm) / safe)[..., None] * b
    return np.where(moving[..., None], stepped, a)
