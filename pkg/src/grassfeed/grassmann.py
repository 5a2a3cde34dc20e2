"""Geometry of unit-norm complex vectors identified up to a global phase.

A point is a unit-norm vector in C^L; two vectors that differ only by a
phase factor e^{j*theta} represent the same point (a line through the
origin).  The natural metric is the chordal distance
``d(x, y) = sqrt(1 - |x^* y|^2)``, and points are connected by geodesic
arcs described by a tangent vector: a unit direction orthogonal to the
base point plus a nonnegative arc length in radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Overlap |base^* target| at or below this means the points are treated as
# mutually orthogonal: the geodesic direction between them is undefined.
ORTHOGONALITY_EPS = 1e-9

# Deficit 1 - |x_1| below which the reflection pivot is numerically zero and
# the rotation degenerates to the identity.
_REFLECTION_EPS = 1e-14


class ZeroVector(ValueError):
    """Normalization of a zero (or non-finite) vector was requested."""


class OrthogonalPoints(ValueError):
    """Base and target are orthogonal; no geodesic direction exists."""


class BaseMismatch(ValueError):
    """A tangent vector was applied at a point that is not its base."""


@dataclass(frozen=True)
class TangentVector:
    """A geodesic increment leaving ``base``.

    ``dir`` is a unit vector orthogonal to ``base`` and ``mag`` is the arc
    length in radians.  When ``mag == 0`` the direction is irrelevant and is
    fixed by convention to the second canonical basis vector so that
    independent parties produce bit-identical values.
    """

    base: np.ndarray
    dir: np.ndarray
    mag: float


def normalize(h) -> np.ndarray:
    """Project a nonzero vector onto the unit sphere."""
    h = np.asarray(h, dtype=complex)
    n = np.linalg.norm(h)
    if not np.isfinite(n) or n <= 0.0:
        raise ZeroVector("cannot normalize a zero-norm vector")
    return h / n


def chordal_distance(x, y) -> float:
    """Phase-invariant distance ``sqrt(1 - |x^* y|^2)`` between unit vectors."""
    overlap = abs(np.vdot(x, y))
    return float(np.sqrt(max(0.0, 1.0 - min(overlap, 1.0) ** 2)))


def canonical_tangent_dir(length: int) -> np.ndarray:
    """Conventional placeholder direction used for zero-length tangents."""
    d = np.zeros(length, dtype=complex)
    d[1] = 1.0
    return d


def log_map(base, target, ortho_eps: float = ORTHOGONALITY_EPS) -> TangentVector:
    """Tangent vector at ``base`` whose geodesic reaches ``target`` at step 1.

    With ``rho = base^* target`` and ``d = sqrt(1 - |rho|^2)`` the arc length
    is ``arctan(d / |rho|)`` and the direction is
    ``(target/rho - base) * |rho| / d``, which is unit norm and orthogonal to
    ``base``.  The phase of ``rho`` is folded into the direction so that the
    round trip through :func:`exp_map` reconstructs ``target`` up to a global
    phase.

    Raises
    ------
    OrthogonalPoints
        If ``|rho| <= ortho_eps``; callers should reinitialize rather than
        follow an arbitrary direction.
    """
    base = np.asarray(base, dtype=complex)
    target = np.asarray(target, dtype=complex)
    rho = np.vdot(base, target)
    r = abs(rho)
    if r <= ortho_eps:
        raise OrthogonalPoints(f"|base^* target| = {r:.3e} <= {ortho_eps:.1e}")
    r = min(r, 1.0)
    d = np.sqrt(max(0.0, 1.0 - r * r))
    if d <= 1e-12:
        return TangentVector(base, canonical_tangent_dir(base.size), 0.0)
    mag = float(np.arctan2(d, r))
    direction = (target / rho - base) * (r / d)
    return TangentVector(base, direction, mag)


def exp_map(base, tangent: TangentVector, step: float = 1.0) -> np.ndarray:
    """Point reached by following ``tangent`` from ``base`` for ``step`` units.

    Computes ``base * cos(mag * step) + dir * sin(mag * step)`` and
    renormalizes to guard against floating-point drift over long recursions.
    A zero-length tangent (or zero step) returns ``base`` itself.

    Raises
    ------
    BaseMismatch
        If the tangent's base is not the supplied base point (up to phase).
    """
    base = np.asarray(base, dtype=complex)
    if chordal_distance(tangent.base, base) >= 1e-10:
        raise BaseMismatch("tangent vector belongs to a different base point")
    angle = tangent.mag * step
    if angle == 0.0:
        return base.copy()
    out = base * np.cos(angle) + tangent.dir * np.sin(angle)
    return out / np.linalg.norm(out)


def householder_rotation(x) -> np.ndarray:
    """Unitary reflection mapping ``[1, 0, ..., 0]`` onto ``x`` up to phase.

    The pivot is ``u = x_b - e^{-j*angle(x_1)} x`` (first entry of ``x`` made
    real nonnegative), for which ``u^* x_b`` is real and the reflection
    ``I - u u^* / (u^* x_b)`` reduces to the standard unitary Householder
    matrix.  The phase offset is harmless downstream because tangent-plane
    orthogonality is phase invariant.  If ``x`` already equals the pivot axis
    up to phase, the identity is returned.
    """
    x = np.asarray(x, dtype=complex)
    length = x.size
    if abs(x[0]) > 0.0:
        y = x * (abs(x[0]) / x[0])
    else:
        y = x
    u = -y
    u[0] += 1.0
    denom = 1.0 - y[0].real
    if denom <= _REFLECTION_EPS:
        return np.eye(length, dtype=complex)
    return np.eye(length, dtype=complex) - np.outer(u, u.conj()) / denom
