"""Combinatorial pre-checks for solvability: the per-triangle angle
condition (C1), Gauss-Bonnet consistency of a curvature target, and the
attainability criterion characterizing the image of the curvature map by
enumeration of vertex subsets.

For a non-empty proper subset A the target must satisfy, strictly,

    sum_{v in A} k_v  >  - sum_{(e,v) in Lk(A)} (pi - theta(e))
                         + 2 pi chi(G(A) minus boundary) + pi chi(G(A) on boundary)

and at A = V the Gauss-Bonnet inequality (hyperbolic) or equality
(Euclidean) closes the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .circlegeom import Geometry
from .curvature import theta_array
from .errors import EnumerationTooLarge, ValidationError
from .mesh import TriangulatedSurface

TWO_PI = 2.0 * math.pi
STRICTNESS_BAND = 1e-9      # |slack| below this is reported as borderline
GAUSS_BONNET_RTOL = 1e-12   # per-vertex tolerance on the Euclidean equality
ENUMERATION_CUTOFF = 24
_CHUNK = 1 << 15


@dataclass(frozen=True)
class CurvatureTarget:
    """Prescribed per-vertex curvatures, optionally derived from boundary
    turning angles phi (zero at interior vertices)."""

    k: np.ndarray
    geometry: Geometry
    mode: str = "explicit"   # zero | mean | explicit | boundary-phi
    phi: dict[int, float] | None = None


def zero_target(surface: TriangulatedSurface, geometry: Geometry) -> CurvatureTarget:
    return CurvatureTarget(np.zeros(surface.n_vertices), geometry, mode="zero")


def mean_target(surface: TriangulatedSurface) -> CurvatureTarget:
    """The uniform Euclidean target K_av = 2 pi chi / |V|."""
    k_av = TWO_PI * surface.euler_characteristic / surface.n_vertices
    return CurvatureTarget(
        np.full(surface.n_vertices, k_av), Geometry.EUCLIDEAN, mode="mean"
    )


def explicit_target(surface: TriangulatedSurface, k, geometry: Geometry) -> CurvatureTarget:
    k = np.asarray(k, dtype=float)
    if k.shape != (surface.n_vertices,):
        raise ValidationError("target-shape", f"expected {surface.n_vertices} values")
    return CurvatureTarget(k, geometry, mode="explicit")


def boundary_phi_target(
    surface: TriangulatedSurface, phi: Mapping[int, float], geometry: Geometry
) -> CurvatureTarget:
    """Lift boundary turning angles to a full curvature target: phi on the
    boundary, zero at interior vertices."""
    if not surface.boundary_vertices:
        raise ValidationError("boundary-phi", "surface has no boundary vertices")
    extra = set(phi) - surface.boundary_vertices
    if extra:
        raise ValidationError("boundary-phi", f"vertices {sorted(extra)} are not on the boundary")
    k = np.zeros(surface.n_vertices)
    for v in surface.boundary_vertices:
        val = float(phi.get(v, 0.0))
        if not (0.0 <= val < math.pi):
            raise ValidationError("boundary-phi", f"phi({v})={val} outside [0, pi)")
        k[v] = val
    return CurvatureTarget(k, geometry, mode="boundary-phi", phi=dict(phi))


# ---------------------------------------------------------------------------
# (C1) and target validity


def check_c1(surface: TriangulatedSurface, theta) -> list[int]:
    """Indices of triangles where some xi = cos(t_a) + cos(t_b)cos(t_c) is
    negative (beyond roundoff); an empty list means (C1) holds."""
    arr = theta_array(surface, theta)
    cos = np.cos(arr)[surface.tri_opp_edges]
    xi = np.empty_like(cos)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        xi[:, a] = cos[:, a] + cos[:, b] * cos[:, c]
    return np.where(xi.min(axis=1) < -1e-12)[0].tolist()


@dataclass(frozen=True)
class TargetFailure:
    clause: str              # "upper-bound" | "gauss-bonnet"
    detail: str
    vertex: int | None = None


@dataclass(frozen=True)
class TargetReport:
    ok: bool
    failures: tuple[TargetFailure, ...] = ()


def check_target(surface: TriangulatedSurface, target: CurvatureTarget) -> TargetReport:
    """Validate the per-vertex upper bounds (k < 2 pi interior, k < pi
    boundary) and the Gauss-Bonnet clause for the target's geometry."""
    failures: list[TargetFailure] = []
    k = target.k
    for v in range(surface.n_vertices):
        bound = math.pi if v in surface.boundary_vertices else TWO_PI
        if not k[v] < bound:
            failures.append(
                TargetFailure("upper-bound", f"k[{v}]={k[v]:.6g} >= {bound:.6g}", vertex=v)
            )
    total = float(k.sum())
    gb = TWO_PI * surface.euler_characteristic
    if target.geometry is Geometry.HYPERBOLIC:
        if not total > gb:
            failures.append(
                TargetFailure(
                    "gauss-bonnet",
                    f"sum k = {total:.6g} must exceed 2 pi chi = {gb:.6g}",
                )
            )
    else:
        if abs(total - gb) > GAUSS_BONNET_RTOL * max(surface.n_vertices, 1):
            failures.append(
                TargetFailure(
                    "gauss-bonnet",
                    f"sum k = {total:.17g} must equal 2 pi chi = {gb:.17g}",
                )
            )
    return TargetReport(ok=not failures, failures=tuple(failures))


# ---------------------------------------------------------------------------
# attainability


@dataclass(frozen=True)
class SubsetViolation:
    clause: str              # "subset" | "gauss-bonnet" | "upper-bound"
    subset: frozenset[int]
    lhs: float
    rhs: float
    slack: float
    borderline: bool = False


@dataclass(frozen=True)
class AttainabilityReport:
    attainable: bool
    exhaustive: bool
    mode: str                # "exhaustive" | "restricted"
    checked_subsets: int
    violations: tuple[SubsetViolation, ...] = field(default_factory=tuple)


class _SubsetEvaluator:
    """Vectorized evaluation of the subset inequality over bitmask batches."""

    def __init__(self, surface: TriangulatedSurface, theta_arr: np.ndarray):
        self.n = surface.n_vertices
        self.tv = surface.tri_verts
        self.w_lk = math.pi - theta_arr[surface.tri_opp_edges]  # (F, 3)
        self.ev = surface.edge_verts
        self.is_be = surface.is_boundary_edge
        self.is_bv = surface.is_boundary_vertex

    def rhs_and_bits(self, masks: np.ndarray):
        bits = ((masks[:, None] >> np.arange(self.n, dtype=np.uint64)) & 1).astype(bool)
        e_in = bits[:, self.ev[:, 0]] | bits[:, self.ev[:, 1]]
        nE_O = e_in[:, ~self.is_be].sum(axis=1)
        nE_B = e_in[:, self.is_be].sum(axis=1)
        nV_O = bits[:, ~self.is_bv].sum(axis=1)
        nV_B = bits[:, self.is_bv].sum(axis=1)
        tb = bits[:, self.tv]                      # (M, F, 3)
        cnt = tb.sum(axis=2)
        nF = (cnt > 0).sum(axis=1)
        lk = ((cnt == 1)[:, :, None] * tb * self.w_lk[None, :, :]).sum(axis=(1, 2))
        chi_open = nV_O - nE_O + nF
        chi_bd = nV_B - nE_B
        rhs = -lk + TWO_PI * chi_open + math.pi * chi_bd
        return rhs, bits


def _mask_to_subset(mask: int, n: int) -> frozenset[int]:
    return frozenset(v for v in range(n) if (mask >> v) & 1)


def _restricted_masks(surface: TriangulatedSurface) -> list[int]:
    masks: set[int] = set()
    full = (1 << surface.n_vertices) - 1
    for v in range(surface.n_vertices):
        masks.add(1 << v)
        nb = 1 << v
        for w in surface.vertex_neighbors[v]:
            nb |= 1 << w
        if nb != full:
            masks.add(nb)
    for cycle in surface.boundary_cycles:
        m = 0
        for v in cycle:
            m |= 1 << v
        if m != full:
            masks.add(m)
    return sorted(masks)


def attainability(
    surface: TriangulatedSurface,
    theta,
    target: CurvatureTarget,
    *,
    mode: str = "auto",
    cutoff: int = ENUMERATION_CUTOFF,
    full_report: bool = False,
) -> AttainabilityReport:
    """Decide whether the target lies in the image of the curvature map.

    Checks the per-vertex upper bounds, the Gauss-Bonnet clause (the A = V
    case), and the strict subset inequality for proper non-empty subsets:
    all of them in exhaustive mode (|V| <= cutoff), or only singleton,
    closed-vertex-star and boundary-component subsets in restricted mode,
    which can refute but not certify (reported as non-exhaustive).
    """
    theta_arr = theta_array(surface, theta)
    n = surface.n_vertices
    if mode not in ("auto", "exhaustive", "restricted"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and n > cutoff:
        raise EnumerationTooLarge(f"|V|={n} exceeds the exhaustive cutoff {cutoff}")
    exhaustive = mode == "exhaustive" or (mode == "auto" and n <= cutoff)

    violations: list[SubsetViolation] = []
    k = target.k

    # A = V and the per-vertex upper bounds, via the target checker
    tr = check_target(surface, target)
    for f in tr.failures:
        if f.clause == "gauss-bonnet":
            violations.append(
                SubsetViolation(
                    clause="gauss-bonnet",
                    subset=frozenset(range(n)),
                    lhs=float(k.sum()),
                    rhs=TWO_PI * surface.euler_characteristic,
                    slack=float(k.sum()) - TWO_PI * surface.euler_characteristic,
                )
            )
        else:
            v = f.vertex
            bound = math.pi if v in surface.boundary_vertices else TWO_PI
            violations.append(
                SubsetViolation(
                    clause="upper-bound",
                    subset=frozenset([v]),
                    lhs=float(k[v]),
                    rhs=bound,
                    slack=bound - float(k[v]),
                )
            )
    if violations and not full_report:
        return AttainabilityReport(False, exhaustive, "exhaustive" if exhaustive else "restricted", 0, tuple(violations))

    ev = _SubsetEvaluator(surface, theta_arr)
    checked = 0

    def eval_batch(masks: np.ndarray):
        nonlocal checked
        rhs, bits = ev.rhs_and_bits(masks)
        lhs = bits @ k
        slack = lhs - rhs
        checked += len(masks)
        for i in np.where(slack <= STRICTNESS_BAND)[0]:
            violations.append(
                SubsetViolation(
                    clause="subset",
                    subset=_mask_to_subset(int(masks[i]), n),
                    lhs=float(lhs[i]),
                    rhs=float(rhs[i]),
                    slack=float(slack[i]),
                    borderline=abs(float(slack[i])) <= STRICTNESS_BAND,
                )
            )

    if exhaustive:
        total = (1 << n) - 1  # proper non-empty: 1 .. 2^n - 2
        start = 1
        while start < total:
            stop = min(start + _CHUNK, total)
            eval_batch(np.arange(start, stop, dtype=np.uint64))
            if violations and not full_report:
                break
            start = stop
    else:
        masks = _restricted_masks(surface)
        if masks:
            eval_batch(np.array(masks, dtype=np.uint64))

    # In restricted mode "attainable" means only that no checked subset
    # refutes the target; the exhaustive flag carries the caveat.
    attainable = not violations
    return AttainabilityReport(
        attainable=attainable,
        exhaustive=exhaustive,
        mode="exhaustive" if exhaustive else "restricted",
        checked_subsets=checked,
        violations=tuple(violations),
    )
