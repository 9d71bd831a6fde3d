"""Immutable triangulated surfaces with boundary, plus the subset
combinatorics (star complexes, link pairs, Euler characteristics) used by
the attainability checker.

Vertices are integers 0..n-1, triangles are oriented vertex triples, and
edges are canonicalized as sorted vertex pairs in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Disconnected,
    EmptySubset,
    InconsistentOrientation,
    MeshError,
    NonManifold,
)

Edge = tuple[int, int]
Triangle = tuple[int, int, int]


def _sorted_edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class TriangulatedSurface:
    """Oriented simplicial surface with boundary.

    All fields are derived at build time and never mutated afterwards, so
    instances are safe to share across threads.
    """

    n_vertices: int
    triangles: tuple[Triangle, ...]
    edges: tuple[Edge, ...]
    edge_index: dict[Edge, int]
    edge_triangles: tuple[tuple[int, ...], ...]
    boundary_edge_ids: frozenset[int]
    boundary_vertices: frozenset[int]
    boundary_cycles: tuple[tuple[int, ...], ...]
    vertex_triangles: tuple[tuple[int, ...], ...]
    vertex_neighbors: tuple[tuple[int, ...], ...]
    euler_characteristic: int
    genus: int
    # numpy caches for the per-triangle assembly hot path
    tri_verts: np.ndarray = field(repr=False)       # (F, 3) int
    tri_opp_edges: np.ndarray = field(repr=False)   # (F, 3) edge id opposite each slot
    edge_verts: np.ndarray = field(repr=False)      # (E, 2) int
    is_boundary_vertex: np.ndarray = field(repr=False)   # (V,) bool
    is_boundary_edge: np.ndarray = field(repr=False)     # (E,) bool

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_boundary_components(self) -> int:
        return len(self.boundary_cycles)

    @property
    def interior_vertices(self) -> frozenset[int]:
        return frozenset(range(self.n_vertices)) - self.boundary_vertices

    def is_disk_type(self) -> bool:
        return self.euler_characteristic == 1 and self.n_boundary_components == 1

    def __repr__(self) -> str:  # compact; the dataclass default would dump arrays
        return (
            f"TriangulatedSurface(|V|={self.n_vertices}, |E|={self.n_edges}, "
            f"|F|={self.n_triangles}, chi={self.euler_characteristic}, "
            f"g={self.genus}, n={self.n_boundary_components})"
        )


def build_surface(triangles: Sequence[Sequence[int]]) -> TriangulatedSurface:
    """Build and fully validate a surface from an oriented triangle list.

    Raises NonManifold, InconsistentOrientation or Disconnected when the
    input is not a connected oriented manifold-with-boundary; MeshError for
    malformed triples or non-dense vertex indices.
    """
    tris: list[Triangle] = []
    for t in triangles:
        t = tuple(int(v) for v in t)
        if len(t) != 3 or len(set(t)) != 3:
            raise MeshError(f"triangle {t} must have three distinct vertices")
        if min(t) < 0:
            raise MeshError(f"triangle {t} has a negative vertex index")
        tris.append(t)
    if not tris:
        raise MeshError("at least one triangle required")

    used = sorted({v for t in tris for v in t})
    n = used[-1] + 1
    if used != list(range(n)):
        missing = sorted(set(range(n)) - set(used))
        raise MeshError(f"vertex indices not dense in 0..{n - 1}: missing {missing}")

    # edges with incident triangles and directed-use bookkeeping
    edge_tris: dict[Edge, list[int]] = {}
    directed_uses: dict[Edge, list[int]] = {}  # +1 for (a<b) direction, -1 otherwise
    for ti, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            e = _sorted_edge(u, v)
            edge_tris.setdefault(e, []).append(ti)
            directed_uses.setdefault(e, []).append(1 if u < v else -1)

    for e, incident in edge_tris.items():
        if len(incident) > 2:
            raise NonManifold(f"edge {e} lies in {len(incident)} triangles")
        if len(incident) == 2 and directed_uses[e][0] == directed_uses[e][1]:
            raise InconsistentOrientation(
                f"edge {e} is traversed twice in the same direction "
                f"(triangles {incident[0]} and {incident[1]})"
            )

    edges = tuple(sorted(edge_tris))
    edge_index = {e: i for i, e in enumerate(edges)}
    edge_triangles = tuple(tuple(edge_tris[e]) for e in edges)
    boundary_edge_ids = frozenset(
        i for i, e in enumerate(edges) if len(edge_tris[e]) == 1
    )
    boundary_vertices = frozenset(
        v for i in boundary_edge_ids for v in edges[i]
    )

    # 1-skeleton connectivity
    neighbors: list[set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in neighbors[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        raise Disconnected(f"1-skeleton has {n - len(seen)} unreachable vertices")

    vertex_tris: list[list[int]] = [[] for _ in range(n)]
    for ti, t in enumerate(tris):
        for v in t:
            vertex_tris[v].append(ti)

    _check_vertex_links(tris, edge_tris, vertex_tris, boundary_vertices)
    cycles = _boundary_cycles(edges, boundary_edge_ids)

    chi = n - len(edges) + len(tris)
    n_comp = len(cycles)
    if (2 - n_comp - chi) % 2 != 0 or 2 - n_comp - chi < 0:
        raise MeshError(
            f"chi={chi} with {n_comp} boundary curves is not of the form 2-2g-n"
        )
    genus = (2 - n_comp - chi) // 2

    tri_verts = np.array(tris, dtype=np.int64)
    tri_opp = np.empty((len(tris), 3), dtype=np.int64)
    for ti, (a, b, c) in enumerate(tris):
        tri_opp[ti, 0] = edge_index[_sorted_edge(b, c)]
        tri_opp[ti, 1] = edge_index[_sorted_edge(c, a)]
        tri_opp[ti, 2] = edge_index[_sorted_edge(a, b)]

    is_bv = np.zeros(n, dtype=bool)
    is_bv[list(boundary_vertices)] = True
    is_be = np.zeros(len(edges), dtype=bool)
    is_be[list(boundary_edge_ids)] = True

    return TriangulatedSurface(
        n_vertices=n,
        triangles=tuple(tris),
        edges=edges,
        edge_index=edge_index,
        edge_triangles=edge_triangles,
        boundary_edge_ids=boundary_edge_ids,
        boundary_vertices=boundary_vertices,
        boundary_cycles=cycles,
        vertex_triangles=tuple(tuple(v) for v in vertex_tris),
        vertex_neighbors=tuple(tuple(sorted(s)) for s in neighbors),
        euler_characteristic=chi,
        genus=genus,
        tri_verts=tri_verts,
        tri_opp_edges=tri_opp,
        edge_verts=np.array(edges, dtype=np.int64),
        is_boundary_vertex=is_bv,
        is_boundary_edge=is_be,
    )


def _check_vertex_links(tris, edge_tris, vertex_tris, boundary_vertices):
    # The triangles around each vertex, glued across shared edges at that
    # vertex, must form a single fan: a cycle (interior) or a path (boundary).
    for v, incident in enumerate(vertex_tris):
        if not incident:
            continue
        adj: dict[int, list[int]] = {ti: [] for ti in incident}
        for ti in incident:
            a, b, c = tris[ti]
            others = [w for w in (a, b, c) if w != v]
            for w in others:
                e = _sorted_edge(v, w)
                for tj in edge_tris[e]:
                    if tj != ti:
                        adj[ti].append(tj)
        # walk the fan
        seen = {incident[0]}
        stack = [incident[0]]
        while stack:
            ti = stack.pop()
            for tj in adj[ti]:
                if tj not in seen:
                    seen.add(tj)
                    stack.append(tj)
        if len(seen) != len(incident):
            raise NonManifold(f"vertex {v} has a disconnected triangle fan")
        n_open = sum(1 for ti in incident if len(adj[ti]) < 2)
        if v in boundary_vertices:
            if n_open != 2 and len(incident) > 1:
                raise NonManifold(f"boundary vertex {v} link is not a simple arc")
        elif n_open != 0:
            raise NonManifold(f"interior vertex {v} link is not a closed fan")


def _boundary_cycles(edges, boundary_edge_ids):
    if not boundary_edge_ids:
        return ()
    succ: dict[int, list[int]] = {}
    for i in boundary_edge_ids:
        a, b = edges[i]
        succ.setdefault(a, []).append(b)
        succ.setdefault(b, []).append(a)
    for v, ws in succ.items():
        if len(ws) != 2:
            raise NonManifold(
                f"boundary vertex {v} lies on {len(ws)} boundary edges"
            )
    cycles = []
    remaining = {v for v in succ}
    while remaining:
        start = min(remaining)
        cycle = [start]
        prev, cur = None, start
        while True:
            nxt = [w for w in succ[cur] if w != prev]
            # degree-2 everywhere, so a unique continuation exists
            step = nxt[0] if nxt else succ[cur][0]
            if step == start:
                break
            cycle.append(step)
            prev, cur = cur, step
        cycles.append(tuple(cycle))
        remaining -= set(cycle)
    return tuple(cycles)


@dataclass(frozen=True)
class SubsetAnalysis:
    """Combinatorics of the star complex G(A) for a vertex subset A.

    Counts follow the boundary/interior partition of cells: a vertex cell is
    boundary iff it lies on the surface boundary, an edge cell iff it is a
    boundary edge; triangles are never boundary cells.
    """

    subset: frozenset[int]
    star_triangles: tuple[int, ...]          # F(A), triangle indices
    f_counts: tuple[int, int, int]           # |F_1(A)|, |F_2(A)|, |F_3(A)|
    link_pairs: tuple[tuple[Edge, int], ...]  # Lk(A)
    interior_edges: tuple[int, ...]          # E_O(A), edge ids
    boundary_edges: tuple[int, ...]          # E_bd(A), edge ids
    interior_vertices: frozenset[int]        # V_O(A)
    boundary_vertices_of_A: frozenset[int]   # A intersect V_bd
    chi_open: int
    chi_boundary: int


def analyze_subset(surface: TriangulatedSurface, subset: Iterable[int]) -> SubsetAnalysis:
    """Classify the cells of G(A) and verify the combinatorial identity
    2|A| - |F(A)| + |Lk(A)| - |A ^ V_bd| = 2 chi_open + chi_boundary.
    """
    A = frozenset(int(v) for v in subset)
    if not A:
        raise EmptySubset("subset A must be non-empty")
    if not A <= frozenset(range(surface.n_vertices)):
        raise MeshError(f"subset {sorted(A)} contains unknown vertices")

    star: list[int] = []
    f_counts = [0, 0, 0]
    link: list[tuple[Edge, int]] = []
    for ti, t in enumerate(surface.triangles):
        inside = [v for v in t if v in A]
        if not inside:
            continue
        star.append(ti)
        f_counts[len(inside) - 1] += 1
        if len(inside) == 1:
            v = inside[0]
            others = tuple(w for w in t if w != v)
            link.append((_sorted_edge(*others), v))

    e_open: list[int] = []
    e_bd: list[int] = []
    for ei, (a, b) in enumerate(surface.edges):
        if a in A or b in A:
            (e_bd if ei in surface.boundary_edge_ids else e_open).append(ei)

    v_bd = A & surface.boundary_vertices
    v_open = A - v_bd
    chi_open = len(v_open) - len(e_open) + len(star)
    chi_boundary = len(v_bd) - len(e_bd)

    lhs = 2 * len(A) - len(star) + len(link) - len(v_bd)
    rhs = 2 * chi_open + chi_boundary
    if lhs != rhs:
        raise MeshError(
            f"star-complex identity violated for A={sorted(A)}: {lhs} != {rhs}"
        )

    return SubsetAnalysis(
        subset=A,
        star_triangles=tuple(star),
        f_counts=tuple(f_counts),
        link_pairs=tuple(link),
        interior_edges=tuple(e_open),
        boundary_edges=tuple(e_bd),
        interior_vertices=frozenset(v_open),
        boundary_vertices_of_A=frozenset(v_bd),
        chi_open=chi_open,
        chi_boundary=chi_boundary,
    )


def open_arc_count(surface: TriangulatedSurface, subset: Iterable[int]) -> int:
    """Number of open-arc components of G(A) restricted to the boundary.

    The cells are the boundary vertices in A and the boundary edges with an
    endpoint in A; an edge joins a vertex cell only when that endpoint is
    itself a cell. Components with one fewer vertex than edges are open arcs,
    components with equal counts are full boundary circles.
    """
    A = frozenset(int(v) for v in subset)
    if not A:
        raise EmptySubset("subset A must be non-empty")
    cells_v = A & surface.boundary_vertices
    cells_e = [
        ei
        for ei in surface.boundary_edge_ids
        if surface.edges[ei][0] in A or surface.edges[ei][1] in A
    ]
    parent: dict[object, object] = {("v", v): ("v", v) for v in cells_v}
    parent.update({("e", ei): ("e", ei) for ei in cells_e})

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for ei in cells_e:
        for v in surface.edges[ei]:
            if v in cells_v:
                union(("e", ei), ("v", v))

    comps: dict[object, list[int]] = {}
    for cell in parent:
        comps.setdefault(find(cell), []).append(cell)
    arcs = 0
    for members in comps.values():
        nv = sum(1 for kind, _ in members if kind == "v")
        ne = sum(1 for kind, _ in members if kind == "e")
        chi = nv - ne
        if chi == -1:
            arcs += 1
        elif chi != 0:
            raise MeshError(f"boundary trace of G(A) has a component with chi={chi}")
    return arcs
