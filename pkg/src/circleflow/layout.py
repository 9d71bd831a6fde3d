"""Develop a solved radius vector on a disk-type surface into explicit
circle centers (Euclidean plane or Poincare disk model) and render the
resulting circle pattern as an SVG document.

Placement is breadth-first over the dual graph from a fixed seed gauge, so
two runs on identical input produce bit-identical coordinates.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .circlegeom import Geometry, edge_length
from .curvature import CurvatureEvaluator, theta_array
from .errors import NonflatInterior, NotDiskType, NumericalDegeneracy
from .mesh import TriangulatedSurface

_INTERIOR_FLAT_TOL = 1e-8
_EDGE_REPRODUCTION_TOL = 1e-8


@dataclass(frozen=True)
class EmbeddedPattern:
    """Placed circle centers (complex coordinates; |z| < 1 in the Poincare
    model) with their geometry-native radii."""

    geometry: Geometry
    surface: TriangulatedSurface
    centers: np.ndarray            # complex, shape (V,)
    radii: np.ndarray              # shape (V,)
    placed: np.ndarray             # bool, shape (F,)
    closure_defect: float          # worst re-placement disagreement seen
    warnings: tuple[str, ...] = ()

    def distance(self, za: complex, zb: complex) -> float:
        return _distance(self.geometry, za, zb)


def _distance(geometry: Geometry, za: complex, zb: complex) -> float:
    if geometry is Geometry.EUCLIDEAN:
        return abs(zb - za)
    t = abs(zb - za) / abs(1.0 - np.conj(za) * zb)
    t = min(t, 1.0 - 1e-17)
    return math.log1p(2.0 * t / (1.0 - t))


def _mobius_to_origin(a: complex, z: complex) -> complex:
    return (z - a) / (1.0 - np.conj(a) * z)


def _mobius_from_origin(a: complex, w: complex) -> complex:
    return (w + a) / (1.0 + np.conj(a) * w)


def _place_third(geometry: Geometry, zx: complex, zy: complex, l_xc: float, angle_x: float) -> complex:
    """Position of c in the triangle (x, y, c), with (x -> y) a positively
    oriented edge, so c lies to the left of it."""
    rot = complex(math.cos(angle_x), math.sin(angle_x))
    if geometry is Geometry.EUCLIDEAN:
        d = zy - zx
        return zx + (d / abs(d)) * rot * l_xc
    b = _mobius_to_origin(zx, zy)
    w = (b / abs(b)) * rot * math.tanh(0.5 * l_xc)
    return _mobius_from_origin(zx, w)


def _directed_pair(tri: tuple[int, int, int], p: int, q: int) -> tuple[int, int]:
    """The orientation of {p, q} inside the triangle's boundary cycle."""
    for x, y in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
        if {x, y} == {p, q}:
            return x, y
    raise ValueError(f"edge ({p},{q}) not in triangle {tri}")


def develop(surface: TriangulatedSurface, theta, r_solution, geometry: Geometry) -> EmbeddedPattern:
    """Place all circle centers of a disk-type surface whose interior
    curvatures vanish; deterministic seed: lowest-index triangle with its
    lowest-index edge on the positive x-axis (first vertex at the origin)."""
    if not surface.is_disk_type():
        raise NotDiskType(
            f"layout needs chi=1 with one boundary curve, got chi="
            f"{surface.euler_characteristic}, n={surface.n_boundary_components}"
        )
    r = np.asarray(r_solution, dtype=float)
    ev = CurvatureEvaluator(surface, theta, geometry)
    K = ev.curvature_from_r(r).K
    interior = ~surface.is_boundary_vertex
    if np.any(interior) and float(np.abs(K[interior]).max()) > _INTERIOR_FLAT_TOL:
        worst = int(np.abs(np.where(interior, K, 0.0)).argmax())
        raise NonflatInterior(
            f"interior vertex {worst} has curvature {K[worst]:.3e}; "
            "only smooth-interior metrics can be developed"
        )

    angles = ev.angles_from_r(r)            # (F, 3), slot-aligned with triangles
    th = theta_array(surface, theta)
    lengths = np.array([
        edge_length(geometry, r[a], r[b], th[i]) for i, (a, b) in enumerate(surface.edges)
    ])

    slot_of = [{v: s for s, v in enumerate(tri)} for tri in surface.triangles]
    centers = np.zeros(surface.n_vertices, dtype=complex)
    have = np.zeros(surface.n_vertices, dtype=bool)
    placed = np.zeros(surface.n_triangles, dtype=bool)
    closure = 0.0

    seed = 0
    seed_edge = int(surface.tri_opp_edges[seed].min())
    p, q = surface.edges[seed_edge]
    x, y = _directed_pair(surface.triangles[seed], p, q)
    l_xy = lengths[seed_edge]
    centers[x] = 0.0
    centers[y] = l_xy if geometry is Geometry.EUCLIDEAN else math.tanh(0.5 * l_xy)
    have[x] = have[y] = True

    def settle(tri_idx: int) -> None:
        nonlocal closure
        tri = surface.triangles[tri_idx]
        missing = [v for v in tri if not have[v]]
        if len(missing) > 1:
            raise NumericalDegeneracy("BFS reached a triangle with two unplaced vertices")
        if missing:
            c = missing[0]
        else:
            c = tri[0]  # fully placed: re-derive one corner as a closure check
        others = [v for v in tri if v != c]
        x, y = _directed_pair(tri, others[0], others[1])
        e_xc = surface.edge_index[(x, c) if x < c else (c, x)]
        z = _place_third(geometry, centers[x], centers[y], lengths[e_xc], angles[tri_idx][slot_of[tri_idx][x]])
        if missing:
            centers[c] = z
            have[c] = True
        else:
            closure = max(closure, _distance(geometry, centers[c], z))
        placed[tri_idx] = True

    settle(seed)
    queue = deque([seed])
    while queue:
        ti = queue.popleft()
        for ei in surface.tri_opp_edges[ti]:
            for tj in surface.edge_triangles[ei]:
                if not placed[tj]:
                    settle(tj)
                    queue.append(tj)

    if geometry is Geometry.HYPERBOLIC and np.abs(centers).max() >= 1.0:
        raise NumericalDegeneracy("a developed center left the Poincare disk")

    # every edge must reproduce its metric length
    worst_edge = 0.0
    for ei, (a, b) in enumerate(surface.edges):
        d = _distance(geometry, centers[a], centers[b])
        worst_edge = max(worst_edge, abs(d - lengths[ei]) / (1.0 + lengths[ei]))
    if worst_edge > _EDGE_REPRODUCTION_TOL:
        raise NumericalDegeneracy(
            f"developed pattern fails edge-length reproduction ({worst_edge:.3e})"
        )

    warnings = tuple(_overlap_warnings(surface, centers))
    return EmbeddedPattern(
        geometry=geometry,
        surface=surface,
        centers=centers,
        radii=r.copy(),
        placed=placed,
        closure_defect=closure,
        warnings=warnings,
    )


def _overlap_warnings(surface: TriangulatedSurface, centers: np.ndarray) -> list[str]:
    """Separating-axis overlap scan over triangle pairs sharing no vertex.

    In hyperbolic mode the straight-edge model triangles stand in for the
    geodesic ones, so this is a diagnostic, not a certificate.
    """
    pts = [np.array([[centers[v].real, centers[v].imag] for v in tri]) for tri in surface.triangles]
    scale = max(float(np.abs(centers).max()), 1e-30)
    tol = 1e-9 * scale
    out = []
    for i in range(surface.n_triangles):
        for j in range(i + 1, surface.n_triangles):
            if set(surface.triangles[i]) & set(surface.triangles[j]):
                continue
            if _triangles_overlap(pts[i], pts[j], tol):
                out.append(f"triangles {i} and {j} overlap in the developed pattern")
    return out


def _triangles_overlap(P: np.ndarray, Q: np.ndarray, tol: float) -> bool:
    for tri in (P, Q):
        for k in range(3):
            e = tri[(k + 1) % 3] - tri[k]
            axis = np.array([-e[1], e[0]])
            n = np.hypot(axis[0], axis[1])
            if n == 0.0:
                continue
            axis /= n
            a0, a1 = (P @ axis).min(), (P @ axis).max()
            b0, b1 = (Q @ axis).min(), (Q @ axis).max()
            if min(a1, b1) - max(a0, b0) <= tol:
                return False
    return True


def measured_intersection_angle(pattern: EmbeddedPattern, edge: tuple[int, int]) -> float:
    """Exterior intersection angle of the two drawn circles on an edge,
    recovered from the placed centers and radii (inverse of the length
    formulas); reproduces the prescribed angle on valid patterns."""
    a, b = edge
    d = _distance(pattern.geometry, pattern.centers[a], pattern.centers[b])
    ra, rb = pattern.radii[a], pattern.radii[b]
    if pattern.geometry is Geometry.EUCLIDEAN:
        c = (d * d - ra * ra - rb * rb) / (2.0 * ra * rb)
    else:
        c = (math.cosh(d) - math.cosh(ra) * math.cosh(rb)) / (math.sinh(ra) * math.sinh(rb))
    if c > 1.0 + 1e-6 or c < -1.0 - 1e-6:
        raise NumericalDegeneracy(f"recovered cosine {c} is far outside [-1, 1]")
    return math.acos(max(-1.0, min(1.0, c)))


# ---------------------------------------------------------------------------
# SVG rendering


@dataclass
class SvgOptions:
    size: int = 640
    margin: float = 0.06
    overlay: bool = False
    circle_color: str = "#1f6feb"
    overlay_color: str = "#b0b0b0"
    stroke_width: float = 1.5
    background: str = "#ffffff"


def _poincare_circle(center: complex, rho: float) -> tuple[complex, float]:
    """Euclidean representative of the hyperbolic circle of center `center`
    and radius rho in the Poincare model."""
    t = abs(center)
    d0 = 2.0 * math.atanh(min(t, 1.0 - 1e-16))
    hi = math.tanh(0.5 * (d0 + rho))
    lo = math.tanh(0.5 * (d0 - rho))
    direction = center / t if t > 0 else 1.0
    return direction * (hi + lo) / 2.0, (hi - lo) / 2.0


def _geodesic_path(z1: complex, z2: complex) -> str:
    """SVG path for the hyperbolic geodesic between two disk points."""
    cross = z1.real * z2.imag - z1.imag * z2.real
    if abs(cross) < 1e-12:
        return f"M {z1.real:.6f} {z1.imag:.6f} L {z2.real:.6f} {z2.imag:.6f}"
    # center o of the circle through z1, z2 orthogonal to the unit circle:
    # o . z = (1 + |z|^2)/2 for both points
    b1 = (1.0 + abs(z1) ** 2) / 2.0
    b2 = (1.0 + abs(z2) ** 2) / 2.0
    det = cross
    ox = (b1 * z2.imag - b2 * z1.imag) / det
    oy = (b2 * z1.real - b1 * z2.real) / det
    R = math.sqrt(ox * ox + oy * oy - 1.0)
    sweep = 1 if ((z1.real - ox) * (z2.imag - oy) - (z1.imag - oy) * (z2.real - ox)) > 0 else 0
    return (
        f"M {z1.real:.6f} {z1.imag:.6f} "
        f"A {R:.6f} {R:.6f} 0 0 {sweep} {z2.real:.6f} {z2.imag:.6f}"
    )


def render_svg(pattern: EmbeddedPattern, options: SvgOptions | None = None) -> str:
    """SVG 1.1 document with one circle per vertex; hyperbolic circles are
    drawn as their Euclidean representatives inside the unit disk."""
    opt = options or SvgOptions()
    hyper = pattern.geometry is Geometry.HYPERBOLIC
    if hyper:
        reps = [_poincare_circle(pattern.centers[v], pattern.radii[v])
                for v in range(pattern.surface.n_vertices)]
        lo, hi = -1.0, 1.0
    else:
        reps = [(pattern.centers[v], pattern.radii[v])
                for v in range(pattern.surface.n_vertices)]
        lo = min(min(c.real - r for c, r in reps), min(c.imag - r for c, r in reps))
        hi = max(max(c.real + r for c, r in reps), max(c.imag + r for c, r in reps))
    span = hi - lo
    pad = opt.margin * span
    vb = f"{lo - pad:.6f} {lo - pad:.6f} {span + 2 * pad:.6f} {span + 2 * pad:.6f}"
    sw = opt.stroke_width * (span + 2 * pad) / opt.size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{opt.size}" height="{opt.size}" viewBox="{vb}">',
        f'<g transform="scale(1,-1) translate(0,{-(2 * lo + span):.6f})">',
    ]
    if opt.background:
        parts.append(
            f'<rect x="{lo - pad:.6f}" y="{lo - pad:.6f}" width="{span + 2 * pad:.6f}" '
            f'height="{span + 2 * pad:.6f}" fill="{opt.background}"/>'
        )
    if hyper:
        parts.append(
            f'<circle cx="0" cy="0" r="1" fill="none" stroke="#000000" stroke-width="{sw:.6f}"/>'
        )
    if opt.overlay:
        for a, b in pattern.surface.edges:
            if hyper:
                d = _geodesic_path(pattern.centers[a], pattern.centers[b])
                parts.append(
                    f'<path d="{d}" fill="none" stroke="{opt.overlay_color}" stroke-width="{sw:.6f}"/>'
                )
            else:
                za, zb = pattern.centers[a], pattern.centers[b]
                parts.append(
                    f'<line x1="{za.real:.6f}" y1="{za.imag:.6f}" x2="{zb.real:.6f}" '
                    f'y2="{zb.imag:.6f}" stroke="{opt.overlay_color}" stroke-width="{sw:.6f}"/>'
                )
    for c, rr in reps:
        parts.append(
            f'<circle cx="{c.real:.6f}" cy="{c.imag:.6f}" r="{rr:.6f}" fill="none" '
            f'stroke="{opt.circle_color}" stroke-width="{sw:.6f}"/>'
        )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts)
