"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np
from scipy.spatial import Delaunay

from circleflow import build_surface
from circleflow.errors import MeshError

FAN_TRIANGLES = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 6), (0, 6, 1)]
SQUARE_TRIANGLES = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1)]
TORUS_TRIANGLES = [
    t for i in range(7)
    for t in [(i, (i + 1) % 7, (i + 3) % 7), (i, (i + 3) % 7, (i + 2) % 7)]
]


def fan_surface():
    return build_surface(FAN_TRIANGLES)


def square_surface():
    return build_surface(SQUARE_TRIANGLES)


def torus_surface():
    return build_surface(TORUS_TRIANGLES)


def torus_minus_face_surface():
    return build_surface(TORUS_TRIANGLES[:-1])


def single_triangle_surface():
    return build_surface([(0, 1, 2)])


def zero_theta(surface):
    return {e: 0.0 for e in surface.edges}


def random_disk_mesh(rng, n_points):
    """Connected oriented disk triangulation from a random Delaunay mesh."""
    while True:
        pts = rng.uniform(0.0, 1.0, (n_points, 2))
        try:
            d = Delaunay(pts)
        except Exception:
            continue
        tris = []
        for s in d.simplices:
            a, b, c = (pts[v] for v in s)
            area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            tris.append(tuple(int(v) for v in s) if area > 0 else
                        (int(s[0]), int(s[2]), int(s[1])))
        if len({v for t in tris for v in t}) != n_points:
            continue
        try:
            return build_surface(tris)
        except MeshError:
            continue


def random_c1_triple(rng, theta_max=0.95 * math.pi, xi_floor=0.0):
    """Rejection-sample angle triples with all xi >= xi_floor."""
    while True:
        th = rng.uniform(0.0, theta_max, 3)
        I = np.cos(th)
        xi = np.array([I[a] + I[(a + 1) % 3] * I[(a + 2) % 3] for a in range(3)])
        if xi.min() >= xi_floor:
            return th


def brute_force_subset_analysis(surface, A):
    """Classify the cells of G(A) directly from the definitions, without the
    production counting code: independent oracle for the subset identity."""
    A = frozenset(A)
    star = [ti for ti, t in enumerate(surface.triangles) if set(t) & A]
    f_counts = [0, 0, 0]
    link = []
    for ti in star:
        t = surface.triangles[ti]
        inside = [v for v in t if v in A]
        f_counts[len(inside) - 1] += 1
        if len(inside) == 1:
            v = inside[0]
            e = tuple(sorted(w for w in t if w != v))
            link.append((e, v))
    edges_in = [ei for ei, (a, b) in enumerate(surface.edges) if a in A or b in A]
    e_bd = [ei for ei in edges_in if ei in surface.boundary_edge_ids]
    e_open = [ei for ei in edges_in if ei not in surface.boundary_edge_ids]
    v_bd = A & surface.boundary_vertices
    v_open = A - v_bd
    chi_open = len(v_open) - len(e_open) + len(star)
    chi_bd = len(v_bd) - len(e_bd)
    return {
        "F": len(star),
        "f_counts": tuple(f_counts),
        "Lk": sorted(link),
        "chi_open": chi_open,
        "chi_boundary": chi_bd,
        "lhs": 2 * len(A) - len(star) + len(link) - len(v_bd),
        "rhs": 2 * chi_open + chi_bd,
    }


def oracle_single_triangle_radii(thetas, target_angles):
    """Radii realizing prescribed inner angles on a single triangle of
    circles, by the cosine/sine laws alone: the side lengths follow from
    the angles by the sine law (circumdiameter 1), two radii are
    eliminated through the quadratic length relations, and the last
    equation is solved by bisection. Scale is arbitrary."""
    I = [math.cos(t) for t in thetas]
    L = [math.sin(a) for a in target_angles]

    def roots(r1, l, I_edge):
        disc = r1 * r1 * (I_edge * I_edge - 1.0) + l * l
        if disc < 0:
            return []
        s = math.sqrt(disc)
        return [x for x in (-r1 * I_edge + s, -r1 * I_edge - s) if x > 1e-14]

    def g(r1, b2, b3):
        R2 = roots(r1, L[2], I[2])
        R3 = roots(r1, L[1], I[1])
        if b2 >= len(R2) or b3 >= len(R3):
            return None
        r2, r3 = R2[b2], R3[b3]
        return r2 * r2 + r3 * r3 + 2.0 * r2 * r3 * I[0] - L[0] * L[0]

    def lengths_ok(r):
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            l = math.sqrt(r[b] * r[b] + r[c] * r[c] + 2.0 * r[b] * r[c] * I[a])
            if abs(l - L[a]) > 1e-9 * max(1.0, L[a]):
                return False
        return True

    grid = np.geomspace(1e-8, 100.0, 2000)
    for b2 in range(2):
        for b3 in range(2):
            vals = [g(x, b2, b3) for x in grid]
            for a, b, va, vb in zip(grid, grid[1:], vals, vals[1:]):
                if va is None or vb is None or va * vb > 0:
                    continue
                lo, hi = a, b
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    vm = g(mid, b2, b3)
                    if vm is None:
                        break
                    if g(lo, b2, b3) * vm <= 0:
                        hi = mid
                    else:
                        lo = mid
                r1 = 0.5 * (lo + hi)
                R2 = roots(r1, L[2], I[2])
                R3 = roots(r1, L[1], I[1])
                if b2 < len(R2) and b3 < len(R3):
                    cand = np.array([r1, R2[b2], R3[b3]])
                    if lengths_ok(cand):
                        return cand
    return None


def random_attainable_triangle_target(rng, margin=1e-2):
    """(thetas, target angles) with (C1) satisfied and each target angle in
    (0, pi - theta) with a margin, so the curvature target is attainable."""
    while True:
        th = rng.uniform(0.0, 0.9 * math.pi, 3)
        I = np.cos(th)
        xi = np.array([I[a] + I[(a + 1) % 3] * I[(a + 2) % 3] for a in range(3)])
        if xi.min() < 0.01:
            continue
        w = rng.uniform(0.2, 1.0, 3)
        ang = math.pi * w / w.sum()
        if all(margin < ang[a] < math.pi - th[a] - margin for a in range(3)):
            return th, ang


def triangle_theta_map(th):
    """Edge map for the single triangle (0,1,2): th[a] sits opposite vertex a."""
    return {(1, 2): th[0], (0, 2): th[1], (0, 1): th[2]}
