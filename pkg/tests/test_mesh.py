import numpy as np
import pytest

from circleflow import analyze_subset, build_surface, open_arc_count
from circleflow.errors import (
    Disconnected,
    EmptySubset,
    InconsistentOrientation,
    MeshError,
    NonManifold,
)

from helpers import (
    FAN_TRIANGLES,
    TORUS_TRIANGLES,
    brute_force_subset_analysis,
    fan_surface,
    random_disk_mesh,
    single_triangle_surface,
    square_surface,
    torus_surface,
)


def test_single_triangle_counts():
    s = single_triangle_surface()
    assert s.n_vertices == 3
    assert s.n_edges == 3
    assert s.n_triangles == 1
    assert s.euler_characteristic == 1
    assert s.boundary_vertices == {0, 1, 2}
    assert s.n_boundary_components == 1


def test_fan_counts():
    s = fan_surface()
    assert (s.n_vertices, s.n_edges, s.n_triangles) == (7, 12, 6)
    assert s.euler_characteristic == 1
    assert s.boundary_vertices == {1, 2, 3, 4, 5, 6}
    assert s.genus == 0
    assert s.is_disk_type()


def test_torus_counts():
    s = torus_surface()
    assert (s.n_vertices, s.n_edges, s.n_triangles) == (7, 21, 14)
    assert s.euler_characteristic == 7 - 21 + 14 == 0
    assert not s.boundary_vertices
    assert s.genus == 1
    assert all(len(s.vertex_neighbors[v]) == 6 for v in range(7))


def test_square_counts():
    s = square_surface()
    assert (s.n_vertices, s.n_edges, s.n_triangles) == (5, 8, 4)
    assert s.euler_characteristic == 1


def test_interior_edges_have_two_triangles():
    s = fan_surface()
    for ei, tris in enumerate(s.edge_triangles):
        expected = 1 if ei in s.boundary_edge_ids else 2
        assert len(tris) == expected


def test_nonmanifold_edge_rejected():
    with pytest.raises(NonManifold):
        build_surface([(0, 1, 2), (0, 1, 3), (1, 0, 4)])


def test_inconsistent_orientation_rejected():
    with pytest.raises(InconsistentOrientation):
        build_surface([(0, 1, 2), (1, 2, 3)])  # edge (1,2) used twice forward


def test_disconnected_rejected():
    with pytest.raises(Disconnected):
        build_surface([(0, 1, 2), (3, 4, 5)])


def test_bowtie_vertex_rejected():
    # two fans joined only at vertex 0
    with pytest.raises(NonManifold):
        build_surface([(0, 1, 2), (0, 3, 4)])


def test_non_dense_indices_rejected():
    with pytest.raises(MeshError):
        build_surface([(0, 1, 3)])


def test_degenerate_triangle_rejected():
    with pytest.raises(MeshError):
        build_surface([(0, 1, 1)])


def test_empty_subset_rejected():
    with pytest.raises(EmptySubset):
        analyze_subset(fan_surface(), set())


def test_fan_center_subset():
    s = fan_surface()
    sa = analyze_subset(s, {0})
    assert len(sa.star_triangles) == 6
    assert sa.f_counts == (6, 0, 0)
    assert len(sa.link_pairs) == 6
    # link pairs are the rim edges, each paired with the center
    assert all(v == 0 for _, v in sa.link_pairs)
    assert sa.chi_open == 1
    assert sa.chi_boundary == 0
    # 2|A| - |F| + |Lk| - |A ^ bd| = 2 - 6 + 6 - 0 = 2 = 2*1 + 0


def test_single_triangle_corner_subset():
    # spokes of the corner are boundary edges; the opposite edge is excluded
    s = single_triangle_surface()
    sa = analyze_subset(s, {0})
    assert sa.f_counts == (1, 0, 0)
    assert sa.link_pairs == (((1, 2), 0),)
    assert sa.interior_edges == ()
    assert len(sa.boundary_edges) == 2
    assert sa.chi_open == 0 - 0 + 1 == 1
    assert sa.chi_boundary == 1 - 2 == -1
    assert 2 * 1 - 1 + 1 - 1 == 2 * sa.chi_open + sa.chi_boundary == 1


def test_full_subset_is_whole_surface():
    for s in (fan_surface(), torus_surface(), square_surface()):
        sa = analyze_subset(s, range(s.n_vertices))
        assert sa.link_pairs == ()
        assert len(sa.star_triangles) == s.n_triangles
        lhs = 2 * s.n_vertices - s.n_triangles - len(s.boundary_vertices)
        assert lhs == 2 * sa.chi_open + sa.chi_boundary


@pytest.mark.parametrize("tris", [FAN_TRIANGLES, TORUS_TRIANGLES])
def test_subset_identity_against_brute_force(tris):
    s = build_surface(tris)
    rng = np.random.default_rng(11)
    for _ in range(60):
        size = rng.integers(1, s.n_vertices + 1)
        A = set(int(v) for v in rng.choice(s.n_vertices, size=size, replace=False))
        sa = analyze_subset(s, A)
        ref = brute_force_subset_analysis(s, A)
        assert len(sa.star_triangles) == ref["F"]
        assert sa.f_counts == ref["f_counts"]
        assert sorted(sa.link_pairs) == ref["Lk"]
        assert sa.chi_open == ref["chi_open"]
        assert sa.chi_boundary == ref["chi_boundary"]
        assert ref["lhs"] == ref["rhs"]


def test_subset_identity_random_meshes():
    rng = np.random.default_rng(2024)
    for _ in range(8):
        s = random_disk_mesh(rng, int(rng.integers(5, 20)))
        for _ in range(25):
            size = rng.integers(1, s.n_vertices + 1)
            A = set(int(v) for v in rng.choice(s.n_vertices, size=size, replace=False))
            sa = analyze_subset(s, A)  # internal identity assertion
            assert sa.chi_boundary == -open_arc_count(s, A)


def test_open_arc_count_examples():
    s = fan_surface()
    # one rim vertex: its two boundary edges form one open arc
    assert open_arc_count(s, {1}) == 1
    # alternating rim vertices: all boundary edges included, three arcs
    assert open_arc_count(s, {1, 3, 5}) == 3
    # whole rim: the full boundary circle, no open arc
    assert open_arc_count(s, {1, 2, 3, 4, 5, 6}) == 0
    # interior vertex only: empty boundary trace
    assert open_arc_count(s, {0}) == 0


def test_boundary_cycles():
    s = fan_surface()
    assert len(s.boundary_cycles) == 1
    assert set(s.boundary_cycles[0]) == {1, 2, 3, 4, 5, 6}
    assert len(s.boundary_cycles[0]) == 6
