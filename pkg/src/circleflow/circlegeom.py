"""Geometry of three mutually intersecting circles in Euclidean and
hyperbolic background geometry: edge lengths from radii and exterior
intersection angles, inner angles at the circle centers, and analytic
partial derivatives of the angles with respect to the radii.

Index convention inside a triangle: slot a in {0, 1, 2} names a vertex;
the exterior angle theta[a] and the side length[a] live on the edge
OPPOSITE slot a, i.e. between the other two circles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import C1Violation, DomainViolation, NonPositiveRadius, NumericalDegeneracy

LOG2 = math.log(2.0)
_COS_WINDOW = 1e-9          # clamp cosines at most this far outside [-1, 1]
_XI_ROUNDOFF = 1e-12        # accept xi >= -this as (C1) holding at the boundary
_HYP_LOG_DOMAIN = 280.0     # per-triangle radius sum beyond which we work in logs
_HYP_TINY = 1e-140          # below this the Euclidean limit is exact to double
_HYP_DERIV_MAX_R = 300.0    # derivative formulas overflow beyond this


class Geometry(enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


class ThreeCircleConfig:
    """Radii and exterior intersection angles of one triangle of circles.

    Construction enforces positive radii, angles in [0, pi), and the
    per-triangle condition xi_a = cos(theta_a) + cos(theta_b)cos(theta_c) >= 0
    (up to a roundoff band), which guarantees the triangle inequality for
    every radius assignment.
    """

    __slots__ = ("radii", "thetas", "cosines", "xis")

    def __init__(self, radii: Sequence[float], thetas: Sequence[float]):
        cosines = tuple(math.cos(t) for t in thetas)
        self._fill(radii, thetas, cosines)

    @classmethod
    def from_cosines(cls, radii: Sequence[float], cosines: Sequence[float]) -> "ThreeCircleConfig":
        """Construct from exact cosines (useful for angles like pi/2 whose
        floating-point cosine would otherwise pick up roundoff)."""
        self = object.__new__(cls)
        cosines = tuple(float(c) for c in cosines)
        if any(not (-1.0 < c <= 1.0) for c in cosines):
            raise DomainViolation(f"cosines {cosines} not in (-1, 1]")
        thetas = tuple(math.acos(c) for c in cosines)
        self._fill(radii, thetas, cosines)
        return self

    def _fill(self, radii, thetas, cosines):
        radii = tuple(float(r) for r in radii)
        thetas = tuple(float(t) for t in thetas)
        if len(radii) != 3 or len(thetas) != 3:
            raise ValueError("three radii and three angles required")
        if any(not (r > 0.0 and math.isfinite(r)) for r in radii):
            raise NonPositiveRadius(f"radii must be positive finite, got {radii}")
        if any(not (0.0 <= t < math.pi) for t in thetas):
            raise DomainViolation(f"angles must lie in [0, pi), got {thetas}")
        xis = tuple(
            cosines[a] + cosines[(a + 1) % 3] * cosines[(a + 2) % 3] for a in range(3)
        )
        if min(xis) < -_XI_ROUNDOFF:
            raise C1Violation([0], f"xi values {xis} violate (C1)")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "cosines", cosines)
        object.__setattr__(self, "xis", xis)

    def __setattr__(self, name, value):
        raise AttributeError("ThreeCircleConfig is immutable")

    def __repr__(self):
        return f"ThreeCircleConfig(radii={self.radii}, thetas={self.thetas})"


@dataclass(frozen=True)
class TriangleAngles:
    """Inner angles at the three centers, the side lengths (length[a]
    opposite slot a), and the triangle area in the hyperbolic case."""

    angles: tuple[float, float, float]
    lengths: tuple[float, float, float]
    area: float | None = None


# ---------------------------------------------------------------------------
# edge lengths


def edge_length(geometry: Geometry, r_a: float, r_b: float, theta: float) -> float:
    """Distance between the centers of two circles of radii r_a, r_b meeting
    at exterior angle theta."""
    if not (r_a > 0.0 and r_b > 0.0 and math.isfinite(r_a) and math.isfinite(r_b)):
        raise NonPositiveRadius(f"radii must be positive finite, got ({r_a}, {r_b})")
    if not (0.0 <= theta < math.pi):
        raise DomainViolation(f"theta must lie in [0, pi), got {theta}")
    I = math.cos(theta)
    if geometry is Geometry.EUCLIDEAN:
        # (r_a - r_b)^2 + 2 r_a r_b (1 + cos theta): cancellation-free split
        s = max(r_a, r_b)
        ra, rb = r_a / s, r_b / s
        return s * math.sqrt((ra - rb) ** 2 + 2.0 * ra * rb * (1.0 + I))
    return _hyp_edge_length(r_a, r_b, I)


def _hyp_edge_length(r_a: float, r_b: float, I: float) -> float:
    s = r_a + r_b
    if s > 30.0:
        # cosh l = ((1+I) cosh s + (1-I) cosh(r_a - r_b)) / 2; in log domain
        # l = arccosh ~ log(2 cosh l), exact to double precision here
        val = (1.0 + I) * (1.0 + math.exp(-2.0 * s)) + (1.0 - I) * (
            math.exp(-2.0 * r_a) + math.exp(-2.0 * r_b)
        )
        return s - LOG2 + math.log(val)
    # cosh l - 1 = 2 sinh^2((r_a-r_b)/2) + (1+I) sinh r_a sinh r_b, both terms >= 0
    m = 2.0 * math.sinh(0.5 * (r_a - r_b)) ** 2 + (1.0 + I) * math.sinh(r_a) * math.sinh(r_b)
    return math.log1p(m + math.sqrt(m * (m + 2.0)))


# ---------------------------------------------------------------------------
# vectorized per-triangle kernels; r and I have shape (..., 3)


def _acos_clamped(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)):
        raise NumericalDegeneracy("non-finite cosine in angle evaluation")
    excess = np.maximum(c - 1.0, 0.0).max() if c.size else 0.0
    deficit = np.maximum(-1.0 - c, 0.0).max() if c.size else 0.0
    if excess > _COS_WINDOW or deficit > _COS_WINDOW:
        raise NumericalDegeneracy(
            f"cosine outside [-1, 1] beyond the {_COS_WINDOW} window "
            f"(excess {max(excess, deficit):.3e})"
        )
    return np.arccos(np.clip(c, -1.0, 1.0))


def _euc_lengths(r: np.ndarray, I: np.ndarray) -> np.ndarray:
    l = np.empty_like(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        l[..., a] = np.sqrt(
            (r[..., b] - r[..., c]) ** 2 + 2.0 * r[..., b] * r[..., c] * (1.0 + I[..., a])
        )
    return l


def _euc_cos_angles(r: np.ndarray, I: np.ndarray, l: np.ndarray) -> np.ndarray:
    cos = np.empty_like(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        num = (
            r[..., a] ** 2
            + r[..., a] * r[..., c] * I[..., b]
            + r[..., a] * r[..., b] * I[..., c]
            - r[..., b] * r[..., c] * I[..., a]
        )
        cos[..., a] = num / (l[..., b] * l[..., c])
    return cos


def _hyp_m(r: np.ndarray, I: np.ndarray) -> np.ndarray:
    """cosh(length) - 1 per slot, as a sum of two non-negative terms."""
    m = np.empty_like(r)
    sh = np.sinh(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        m[..., a] = (
            2.0 * np.sinh(0.5 * (r[..., b] - r[..., c])) ** 2
            + (1.0 + I[..., a]) * sh[..., b] * sh[..., c]
        )
    return m


def _hyp_cos_angles_from_m(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sl = np.sqrt(m * (m + 2.0))  # sinh(length)
    cos = np.empty_like(m)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        num = m[..., b] * m[..., c] + m[..., b] + m[..., c] - m[..., a]
        cos[..., a] = num / (sl[..., b] * sl[..., c])
    return cos, sl


def _logsinh(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    big = x > 20.0
    with np.errstate(divide="ignore"):
        small_val = np.log(np.sinh(np.where(big, 1.0, x)))
    big_val = x - LOG2 + np.log1p(-np.exp(-2.0 * np.minimum(x, 700.0)))
    return np.where(big, big_val, small_val)


def _hyp_log_m(r: np.ndarray, I: np.ndarray) -> np.ndarray:
    logm = np.empty_like(r)
    lsh = _logsinh(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        d = np.abs(r[..., b] - r[..., c])
        t1 = LOG2 + 2.0 * _logsinh(0.5 * d)
        t2 = lsh[..., b] + lsh[..., c] + np.log1p(I[..., a])
        logm[..., a] = np.logaddexp(t1, t2)
    return logm


def _hyp_cos_angles_log(logm: np.ndarray) -> np.ndarray:
    # cos = (m_b m_c + m_b + m_c - m_a) / (sinh l_b sinh l_c), divided through
    # by m_b m_c so every term stays representable for huge radii
    cos = np.empty_like(logm)
    inv = np.exp(-logm)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        q = np.exp(logm[..., a] - logm[..., b] - logm[..., c])
        num = 1.0 + inv[..., b] + inv[..., c] - q
        den = np.sqrt(1.0 + 2.0 * inv[..., b]) * np.sqrt(1.0 + 2.0 * inv[..., c])
        cos[..., a] = num / den
    return cos


def _tri_cos_angles(geometry: Geometry, r: np.ndarray, I: np.ndarray) -> np.ndarray:
    """Cosines of the inner angles for a batch of triangles."""
    if geometry is Geometry.EUCLIDEAN:
        scale = r.max(axis=-1, keepdims=True)
        rs = r / scale
        return _euc_cos_angles(rs, I, _euc_lengths(rs, I))
    rsum = r.sum(axis=-1)
    rmax = r.max(axis=-1)
    big = rsum > _HYP_LOG_DOMAIN
    tiny = rmax < _HYP_TINY
    normal = ~(big | tiny)
    cos = np.empty_like(r)
    if np.any(normal):
        m = _hyp_m(r[normal], I[normal])
        cos[normal] = _hyp_cos_angles_from_m(m)[0]
    if np.any(big):
        cos[big] = _hyp_cos_angles_log(_hyp_log_m(r[big], I[big]))
    if np.any(tiny):
        # Euclidean limit; relative error O(r_max^2) is below double roundoff
        scale = r[tiny].max(axis=-1, keepdims=True)
        rs = r[tiny] / scale
        cos[tiny] = _euc_cos_angles(rs, I[tiny], _euc_lengths(rs, I[tiny]))
    return cos


def _euc_weighted_blocks(r: np.ndarray, I: np.ndarray) -> np.ndarray:
    """S[..., a, b] = r_b * d(angle_a)/d(r_b): the conformally weighted
    derivative, symmetric and >= 0 off the diagonal, rows summing to zero.
    Scale-invariant, so callers may pass rescaled radii."""
    l = _euc_lengths(r, I)
    cos = _euc_cos_angles(r, I, l)
    sin0 = np.sqrt(np.maximum((1.0 - cos[..., 0]) * (1.0 + cos[..., 0]), 0.0))
    Gamma = sin0 * l[..., 1] * l[..., 2]
    if np.any(Gamma <= 0.0) or not np.all(np.isfinite(Gamma)):
        raise NumericalDegeneracy("degenerate triangle in derivative evaluation")
    xi = np.empty_like(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        xi[..., a] = I[..., a] + I[..., b] * I[..., c]
    S = np.zeros(r.shape[:-1] + (3, 3), dtype=float)
    for a in range(3):
        for b in range(a + 1, 3):
            c = 3 - a - b
            sin2c = (1.0 - I[..., c]) * (1.0 + I[..., c])
            W = (
                sin2c * r[..., a] ** 2 * r[..., b] ** 2
                + (xi[..., a] * r[..., a] + xi[..., b] * r[..., b])
                * r[..., a] * r[..., b] * r[..., c]
            ) / (Gamma * l[..., c] ** 2)
            S[..., a, b] = W
            S[..., b, a] = W
    for a in range(3):
        S[..., a, a] = -(S[..., a, (a + 1) % 3] + S[..., a, (a + 2) % 3])
    return S


def _hyp_weighted_blocks(r: np.ndarray, I: np.ndarray) -> np.ndarray:
    """S[..., a, b] = sinh(r_b) * d(angle_a)/d(r_b); symmetric and >= 0 off
    the diagonal, diagonal < 0, row sums = -d(area)/d(u_a) < 0."""
    if np.any(r > _HYP_DERIV_MAX_R):
        raise NumericalDegeneracy(
            f"hyperbolic angle derivatives limited to radii <= {_HYP_DERIV_MAX_R}"
        )
    tiny = r.max(axis=-1) < _HYP_TINY
    if np.any(tiny):
        # sinh r -> r makes the weighted block equal to the Euclidean one
        S = np.empty(r.shape[:-1] + (3, 3), dtype=float)
        scale = r[tiny].max(axis=-1, keepdims=True)
        S[tiny] = _euc_weighted_blocks(r[tiny] / scale, I[tiny])
        rest = ~tiny
        if np.any(rest):
            S[rest] = _hyp_weighted_blocks(r[rest], I[rest])
        return S

    ch, sh = np.cosh(r), np.sinh(r)
    m = _hyp_m(r, I)
    cos, sl = _hyp_cos_angles_from_m(m)
    sin0 = np.sqrt(np.maximum((1.0 - cos[..., 0]) * (1.0 + cos[..., 0]), 0.0))
    Ups = sin0 * sl[..., 1] * sl[..., 2]
    if np.any(Ups <= 0.0) or not np.all(np.isfinite(Ups)):
        raise NumericalDegeneracy("degenerate triangle in derivative evaluation")
    xi = np.empty_like(r)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        xi[..., a] = I[..., a] + I[..., b] * I[..., c]
    S = np.zeros(r.shape[:-1] + (3, 3), dtype=float)
    for a in range(3):
        for b in range(a + 1, 3):
            c = 3 - a - b
            sin2c = (1.0 - I[..., c]) * (1.0 + I[..., c])
            # factored to keep intermediates representable for large radii
            t1 = sh[..., a] * sh[..., a] / sl[..., c]
            t2 = sh[..., b] * sh[..., b] / sl[..., c]
            term1 = sin2c * ch[..., c] * t1 * t2
            term2 = (
                (xi[..., a] * ch[..., b] * sh[..., a] + xi[..., b] * ch[..., a] * sh[..., b])
                * (sh[..., a] / sl[..., c]) * (sh[..., b] / sl[..., c]) * sh[..., c]
            )
            W = (term1 + term2) / Ups
            S[..., a, b] = W
            S[..., b, a] = W
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        # chain rule d(angle_a)/d(r_a) through the two incident sides
        term_b = cos[..., c] * (sh[..., a] * ch[..., c] + I[..., b] * ch[..., a] * sh[..., c]) / sl[..., b]
        term_c = cos[..., b] * (sh[..., a] * ch[..., b] + I[..., c] * ch[..., a] * sh[..., b]) / sl[..., c]
        S[..., a, a] = -sh[..., a] * (sl[..., a] / Ups) * (term_b + term_c)
    return S


def _weight(geometry: Geometry, r: np.ndarray) -> np.ndarray:
    """dr/du: the conformal factor turning r-derivatives into u-derivatives."""
    return r if geometry is Geometry.EUCLIDEAN else np.sinh(r)


def _weighted_blocks(geometry: Geometry, r: np.ndarray, I: np.ndarray) -> np.ndarray:
    if geometry is Geometry.EUCLIDEAN:
        scale = r.max(axis=-1, keepdims=True)
        return _euc_weighted_blocks(r / scale, I)
    return _hyp_weighted_blocks(r, I)


# ---------------------------------------------------------------------------
# public per-configuration operations


def _config_arrays(config: ThreeCircleConfig) -> tuple[np.ndarray, np.ndarray]:
    return np.array(config.radii, dtype=float), np.array(config.cosines, dtype=float)


def inner_angles(config: ThreeCircleConfig, geometry: Geometry) -> TriangleAngles:
    """Inner angles at the three circle centers, with the side lengths and,
    in hyperbolic geometry, the triangle area pi - (angle sum)."""
    r, I = _config_arrays(config)
    cos = _tri_cos_angles(geometry, r[None, :], I[None, :])[0]
    ang = _acos_clamped(cos)
    lengths = tuple(
        edge_length(geometry, config.radii[(a + 1) % 3], config.radii[(a + 2) % 3], config.thetas[a])
        for a in range(3)
    )
    area = None
    if geometry is Geometry.HYPERBOLIC:
        area = float(math.pi - ang.sum())
    return TriangleAngles(angles=tuple(float(x) for x in ang), lengths=lengths, area=area)


def check_triangle_inequality(config: ThreeCircleConfig, geometry: Geometry) -> bool:
    """Test oracle: do the three induced side lengths satisfy all strict
    triangle inequalities? True for every valid configuration."""
    l = [
        edge_length(geometry, config.radii[(a + 1) % 3], config.radii[(a + 2) % 3], config.thetas[a])
        for a in range(3)
    ]
    return all(l[a] < l[(a + 1) % 3] + l[(a + 2) % 3] for a in range(3))


def angle_derivatives(config: ThreeCircleConfig, geometry: Geometry) -> np.ndarray:
    """3x3 matrix D with D[a, b] = d(angle_a)/d(r_b).

    Negative on the diagonal, non-negative off it, and symmetric after
    conformal weighting: w_b D[a, b] = w_a D[b, a] with w = r (Euclidean)
    or sinh r (hyperbolic).
    """
    r, I = _config_arrays(config)
    S = _weighted_blocks(geometry, r[None, :], I[None, :])[0]
    return S / _weight(geometry, r)[None, :]


def asymptotic_probe(
    geometry: Geometry,
    thetas: Sequence[float],
    radius_sequence: Iterable[Sequence[float]],
) -> list[TriangleAngles]:
    """Evaluate inner angles along a monotone family of radius triples;
    test utility for the degenerate limits (r -> 0 and r -> infinity)."""
    seq = [tuple(float(x) for x in rr) for rr in radius_sequence]
    for k in range(3):
        vals = [rr[k] for rr in seq]
        inc = all(x <= y for x, y in zip(vals, vals[1:]))
        dec = all(x >= y for x, y in zip(vals, vals[1:]))
        if not (inc or dec):
            raise ValueError(f"radius component {k} is not monotone")
    return [inner_angles(ThreeCircleConfig(rr, thetas), geometry) for rr in seq]
