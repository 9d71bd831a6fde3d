"""Vertex curvatures of the cone metric induced by a radius vector: cone
angles assembled from per-triangle inner angles, the curvature map in flow
coordinates u, and its sparse symmetric Jacobian.

Flow coordinates: u = ln r (Euclidean), u = ln tanh(r/2) (hyperbolic, u < 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from . import circlegeom as cg
from .circlegeom import Geometry
from .errors import C1Violation, DomainViolation, NonPositiveRadius, ValidationError
from .mesh import TriangulatedSurface

TWO_PI = 2.0 * math.pi

# below this per-triangle maximum of u, radii are evaluated through their
# ratios exp(u - max u); the hyperbolic/Euclidean discrepancy is O(r^2)
_U_TINY = -25.0
# floor for materialized radii so a single underflowed vertex inside an
# otherwise healthy triangle cannot produce 0-length edges
_R_FLOOR = 1e-150


@dataclass(frozen=True)
class CurvatureVector:
    """Per-vertex curvatures K, cone angles sigma, and (hyperbolic) the
    total triangle area."""

    K: np.ndarray
    sigma: np.ndarray
    geometry: Geometry
    total_area: float | None = None


def r_to_u(r: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Radii to flow coordinates; bijective, monotone, and relative-accurate
    at both ends of the range."""
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0.0):
        raise NonPositiveRadius("radii must be positive finite")
    if geometry is Geometry.EUCLIDEAN:
        return np.log(r)
    # u = ln tanh(r/2); for small r the direct form keeps relative accuracy,
    # for large r use ln(1 - 2/(e^r + 1)) so u ~ -2 e^-r is not swamped
    small = r < 1.0
    with np.errstate(over="ignore"):
        big_val = np.log1p(-2.0 / (np.exp(np.where(small, 1.0, r)) + 1.0))
    small_val = np.log(np.tanh(0.5 * np.where(small, r, 1.0)))
    return np.where(small, small_val, big_val)


def u_to_r(u: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Flow coordinates to radii; inverse of r_to_u."""
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)):
        raise DomainViolation("u must be finite")
    if geometry is Geometry.EUCLIDEAN:
        return np.exp(u)
    if np.any(u >= 0.0):
        raise DomainViolation("hyperbolic u coordinates must be negative")
    # r = 2 artanh(e^u); near u = 0 expand through expm1 so the log of a
    # near-1 quantity keeps relative accuracy
    small = u < -1.0
    small_val = 2.0 * np.arctanh(np.exp(np.where(small, u, -2.0)))
    big_val = np.log1p(np.exp(np.where(small, -2.0, u))) - np.log(
        -np.expm1(np.where(small, -2.0, u))
    )
    return np.where(small, small_val, big_val)


def theta_array(surface: TriangulatedSurface, theta: Mapping | np.ndarray) -> np.ndarray:
    """Per-edge angle array from a mapping keyed by sorted vertex pairs
    (or an already-aligned array). Validates domain = E and range [0, pi)."""
    if isinstance(theta, np.ndarray) or isinstance(theta, (list, tuple)):
        arr = np.asarray(theta, dtype=float)
        if arr.shape != (surface.n_edges,):
            raise ValidationError("theta-domain", f"expected {surface.n_edges} edge angles")
    else:
        keys = set(theta.keys())
        expected = set(surface.edges)
        missing = expected - keys
        if missing:
            raise ValidationError("theta-domain", f"missing angles for edges {sorted(missing)}")
        extra = keys - expected
        if extra:
            raise ValidationError("theta-domain", f"angles given for non-edges {sorted(extra)}")
        arr = np.array([theta[e] for e in surface.edges], dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= math.pi):
        raise ValidationError("theta-range", "angles must lie in [0, pi)")
    return arr


class CurvatureEvaluator:
    """Per-triangle assembly prepared once for a (surface, theta, geometry)
    triple; reused across flow/Newton steps.

    Validates the angle assignment and checks (C1) on every triangle at
    construction.
    """

    def __init__(self, surface: TriangulatedSurface, theta, geometry: Geometry):
        self.surface = surface
        self.geometry = geometry
        self.theta = theta_array(surface, theta)
        self.tv = surface.tri_verts
        # cosine of the exterior angle on the edge opposite each slot
        self.tri_cos = np.cos(self.theta)[surface.tri_opp_edges]
        xi = np.empty_like(self.tri_cos)
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            xi[:, a] = self.tri_cos[:, a] + self.tri_cos[:, b] * self.tri_cos[:, c]
        bad = np.where(xi.min(axis=1) < -1e-12)[0]
        if bad.size:
            raise C1Violation(bad.tolist())
        self.tri_xi = xi
        self.vertex_const = np.where(surface.is_boundary_vertex, math.pi, TWO_PI)

    # -- radii handling ----------------------------------------------------

    def _tri_cos_angles_from_u(self, u: np.ndarray) -> np.ndarray:
        u_tri = u[self.tv]
        if self.geometry is Geometry.EUCLIDEAN:
            # angles depend only on radius ratios; rescaling per triangle in
            # u-space keeps everything representable for any finite u
            rs = np.exp(u_tri - u_tri.max(axis=1, keepdims=True))
            lengths = cg._euc_lengths(rs, self.tri_cos)
            return cg._euc_cos_angles(rs, self.tri_cos, lengths)
        tiny = u_tri.max(axis=1) < _U_TINY
        cos = np.empty_like(u_tri)
        rest = ~tiny
        if np.any(rest):
            r_tri = np.maximum(u_to_r(u, self.geometry), _R_FLOOR)[self.tv]
            cos[rest] = cg._tri_cos_angles(self.geometry, r_tri[rest], self.tri_cos[rest])
        if np.any(tiny):
            rs = np.exp(u_tri[tiny] - u_tri[tiny].max(axis=1, keepdims=True))
            lengths = cg._euc_lengths(rs, self.tri_cos[tiny])
            cos[tiny] = cg._euc_cos_angles(rs, self.tri_cos[tiny], lengths)
        return cos

    def angles_from_u(self, u: np.ndarray) -> np.ndarray:
        """(F, 3) inner angles of every triangle at flow coordinates u."""
        return cg._acos_clamped(self._tri_cos_angles_from_u(u))

    def angles_from_r(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(r)) or np.any(r <= 0.0):
            raise NonPositiveRadius("radii must be positive finite")
        r_tri = r[self.tv]
        cos = cg._tri_cos_angles(self.geometry, r_tri, self.tri_cos)
        return cg._acos_clamped(cos)

    # -- curvature and Jacobian --------------------------------------------

    def _curvature_from_angles(self, angles: np.ndarray) -> CurvatureVector:
        sigma = np.zeros(self.surface.n_vertices)
        np.add.at(sigma, self.tv.ravel(), angles.ravel())
        K = self.vertex_const - sigma
        area = None
        if self.geometry is Geometry.HYPERBOLIC:
            area = float((math.pi - angles.sum(axis=1)).sum())
        return CurvatureVector(K=K, sigma=sigma, geometry=self.geometry, total_area=area)

    def curvature_from_u(self, u: np.ndarray) -> CurvatureVector:
        return self._curvature_from_angles(self.angles_from_u(u))

    def curvature_from_r(self, r: np.ndarray) -> CurvatureVector:
        return self._curvature_from_angles(self.angles_from_r(r))

    def K_from_u(self, u: np.ndarray) -> np.ndarray:
        return self.curvature_from_u(u).K

    def jacobian_from_u(self, u: np.ndarray) -> sp.csr_matrix:
        """Sparse symmetric matrix dK_i/du_j at flow coordinates u."""
        u = np.asarray(u, dtype=float)
        if self.geometry is Geometry.EUCLIDEAN:
            u_tri = u[self.tv]
            rs = np.exp(u_tri - u_tri.max(axis=1, keepdims=True))
            blocks = cg._euc_weighted_blocks(rs, self.tri_cos)
        else:
            if np.any(u >= 0.0):
                raise DomainViolation("hyperbolic u coordinates must be negative")
            u_tri = u[self.tv]
            tiny = u_tri.max(axis=1) < _U_TINY
            blocks = np.empty(u_tri.shape + (3,))
            rest = ~tiny
            if np.any(rest):
                r_tri = np.maximum(u_to_r(u, self.geometry), _R_FLOOR)[self.tv]
                blocks[rest] = cg._hyp_weighted_blocks(r_tri[rest], self.tri_cos[rest])
            if np.any(tiny):
                rs = np.exp(u_tri[tiny] - u_tri[tiny].max(axis=1, keepdims=True))
                blocks[tiny] = cg._euc_weighted_blocks(rs, self.tri_cos[tiny])
        rows = np.broadcast_to(self.tv[:, :, None], blocks.shape).ravel()
        cols = np.broadcast_to(self.tv[:, None, :], blocks.shape).ravel()
        n = self.surface.n_vertices
        J = sp.coo_matrix((-blocks.ravel(), (rows, cols)), shape=(n, n))
        return J.tocsr()


def curvature_map(surface: TriangulatedSurface, theta, r, geometry: Geometry) -> CurvatureVector:
    """Vertex curvatures of the cone metric induced by the radius vector r."""
    return CurvatureEvaluator(surface, theta, geometry).curvature_from_r(np.asarray(r, dtype=float))


def jacobian(surface: TriangulatedSurface, theta, u, geometry: Geometry) -> sp.csr_matrix:
    """Jacobian dK/du of the curvature map in flow coordinates.

    Symmetric; positive definite in hyperbolic geometry, positive
    semi-definite with kernel spanned by the all-ones vector (connected
    surface) in Euclidean geometry.
    """
    return CurvatureEvaluator(surface, theta, geometry).jacobian_from_u(np.asarray(u, dtype=float))
