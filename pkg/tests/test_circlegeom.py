import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circleflow import (
    Geometry,
    ThreeCircleConfig,
    angle_derivatives,
    asymptotic_probe,
    check_triangle_inequality,
    edge_length,
    inner_angles,
)
from circleflow.errors import C1Violation, DomainViolation, NonPositiveRadius

from helpers import random_c1_triple

E, H = Geometry.EUCLIDEAN, Geometry.HYPERBOLIC
mp.mp.dps = 40


def test_config_caches_cosines_and_xis():
    c = ThreeCircleConfig((1, 2, 3), (0.0, math.pi / 2, math.pi / 3))
    assert c.cosines[0] == 1.0
    assert c.xis[0] == pytest.approx(1.0 + math.cos(math.pi / 2) * 0.5)
    assert min(c.xis) >= 0


def test_config_rejects_bad_input():
    with pytest.raises(NonPositiveRadius):
        ThreeCircleConfig((0.0, 1, 1), (0, 0, 0))
    with pytest.raises(DomainViolation):
        ThreeCircleConfig((1, 1, 1), (0, 0, math.pi))
    with pytest.raises(C1Violation):
        ThreeCircleConfig((1, 1, 1), (0.9 * math.pi,) * 3)


def test_edge_length_tangent_circles():
    assert edge_length(E, 1.0, 1.0, 0.0) == pytest.approx(2.0, abs=0)
    assert edge_length(E, 1.0, 1.0, math.pi / 2) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    for t in (0.3, 1.0, 7.5):
        assert edge_length(H, t, t, 0.0) == pytest.approx(2.0 * t, rel=1e-14)


def test_edge_length_high_precision_oracle():
    # hyperbolic l = arcosh(cosh 1 cosh 2 + sinh 1 sinh 2 cos(pi/3))
    want = float(mp.acosh(mp.cosh(1) * mp.cosh(2) + mp.sinh(1) * mp.sinh(2) * mp.cos(mp.pi / 3)))
    got = edge_length(H, 1.0, 2.0, math.pi / 3)
    assert got == pytest.approx(want, rel=1e-15)


def test_edge_length_overflow_safe():
    # cosh(700)^2 overflows a double; the log-domain branch must not
    got = edge_length(H, 700.0, 701.0, 0.3)
    want = float(mp.acosh(mp.cosh(700) * mp.cosh(701) + mp.sinh(700) * mp.sinh(701) * mp.cos(mp.mpf("0.3"))))
    assert got == pytest.approx(want, rel=1e-14)


def test_edge_length_tiny_radii():
    got = edge_length(H, 1e-9, 2e-9, 1.2)
    want = float(mp.acosh(mp.cosh(mp.mpf("1e-9")) * mp.cosh(mp.mpf("2e-9"))
                          + mp.sinh(mp.mpf("1e-9")) * mp.sinh(mp.mpf("2e-9")) * mp.cos(mp.mpf("1.2"))))
    assert got == pytest.approx(want, rel=1e-12)


def test_triangle_inequality_simple():
    c = ThreeCircleConfig((1, 1, 1), (0, 0, 0))
    assert check_triangle_inequality(c, E)
    assert check_triangle_inequality(c, H)


def test_triangle_inequality_extreme_radii_obtuse():
    th = (0.9 * math.pi, 0.05 * math.pi, 0.05 * math.pi)
    c = ThreeCircleConfig((1e-3, 1.0, 1e3), th)
    assert min(c.xis) >= 0
    assert check_triangle_inequality(c, E)
    assert check_triangle_inequality(c, H)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_triangle_inequality_property(seed):
    rng = np.random.default_rng(seed)
    th = random_c1_triple(rng)
    r = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), 3))
    c = ThreeCircleConfig(r, th)
    assert check_triangle_inequality(c, E)
    assert check_triangle_inequality(c, H)


def test_equilateral_angles():
    for th in ((0.0,) * 3, (math.pi / 2,) * 3):
        c = ThreeCircleConfig((1, 1, 1), th)
        ang = inner_angles(c, E).angles
        assert ang == pytest.approx((math.pi / 3,) * 3, rel=1e-14)


def test_right_isoceles_center_corner():
    # small circle at the right angle: l_center-corner = sqrt(2), l_cc = 2
    c = ThreeCircleConfig((math.sqrt(2) - 1.0, 1.0, 1.0), (0, 0, 0))
    ta = inner_angles(c, E)
    assert ta.angles[0] == pytest.approx(math.pi / 2, rel=1e-13)
    assert ta.angles[1] == pytest.approx(math.pi / 4, rel=1e-13)
    assert ta.angles[2] == pytest.approx(math.pi / 4, rel=1e-13)
    assert ta.lengths[0] == pytest.approx(2.0, rel=1e-15)
    assert ta.lengths[1] == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_hyperbolic_angles_thinner_than_euclidean():
    c = ThreeCircleConfig((1, 1, 1), (0, 0, 0))
    ta = inner_angles(c, H)
    want = float(mp.acos(mp.cosh(2) / (mp.cosh(2) + 1)))
    assert ta.angles[0] == pytest.approx(want, rel=1e-14)
    assert all(a < math.pi / 3 for a in ta.angles)
    assert sum(ta.angles) < math.pi
    assert ta.area == pytest.approx(math.pi - sum(ta.angles), abs=1e-15)
    assert ta.area > 0


def test_angle_bounds_lemma():
    rng = np.random.default_rng(3)
    for _ in range(200):
        th = random_c1_triple(rng)
        r = np.exp(rng.uniform(-2, 2, 3))
        c = ThreeCircleConfig(r, th)
        for geom in (E, H):
            ta = inner_angles(c, geom)
            for a in range(3):
                assert 0.0 < ta.angles[a] < math.pi - th[a]
            if geom is E:
                assert sum(ta.angles) == pytest.approx(math.pi, abs=1e-12)
            else:
                assert sum(ta.angles) < math.pi


def test_derivative_symmetry_weighted():
    c = ThreeCircleConfig((1, 1, 1), (0, 0, 0))
    for geom, w in ((E, np.ones(3)), (H, np.sinh(np.ones(3)))):
        D = angle_derivatives(c, geom)
        W = D * w[None, :]
        assert np.abs(W - W.T).max() == 0.0


def test_derivative_signs():
    rng = np.random.default_rng(5)
    for _ in range(100):
        th = random_c1_triple(rng)
        r = np.exp(rng.uniform(-1.5, 1.5, 3))
        c = ThreeCircleConfig(r, th)
        for geom in (E, H):
            D = angle_derivatives(c, geom)
            assert (np.diag(D) < 0).all()
            off = D[~np.eye(3, dtype=bool)]
            assert (off >= 0).all()


def test_derivative_degenerate_equality_case():
    # theta_k = 0 with theta_i + theta_j = pi makes d(angle_i)/d(r_j) vanish;
    # exact cosines keep the cancellation exact in floating point
    c = ThreeCircleConfig.from_cosines((0.7, 1.3, 2.1), (0.0, 0.0, 1.0))
    for geom in (E, H):
        D = angle_derivatives(c, geom)
        assert D[0, 1] == 0.0
        assert D[1, 0] == 0.0


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(17)
    h = 1e-6
    for _ in range(150):
        th = random_c1_triple(rng)
        r = np.exp(rng.uniform(-1.2, 1.2, 3))
        c = ThreeCircleConfig(r, th)
        for geom in (E, H):
            ang = np.array(inner_angles(c, geom).angles)
            if ang.min() < 1e-2 or ang.max() > math.pi - 1e-2:
                continue  # acos conditioning would swamp the FD estimate
            D = angle_derivatives(c, geom)
            for b in range(3):
                rp, rm = r.copy(), r.copy()
                rp[b] += h
                rm[b] -= h
                fd = (
                    np.array(inner_angles(ThreeCircleConfig(rp, th), geom).angles)
                    - np.array(inner_angles(ThreeCircleConfig(rm, th), geom).angles)
                ) / (2 * h)
                for a in range(3):
                    ref = max(abs(fd[a]), abs(D[a, b]))
                    if ref > 1e-8:
                        assert abs(D[a, b] - fd[a]) <= 1e-5 * ref
                    else:
                        assert abs(D[a, b] - fd[a]) <= 1e-10


def test_hyperbolic_area_derivative_positive():
    rng = np.random.default_rng(23)
    for _ in range(100):
        th = random_c1_triple(rng)
        r = np.exp(rng.uniform(-1.5, 1.5, 3))
        D = angle_derivatives(ThreeCircleConfig(r, th), H)
        dA = -D.sum(axis=0)  # d(area)/d(r_b) = -sum_a d(angle_a)/d(r_b)
        assert (dA > 0).all()


def test_probe_vertex_shrinks_to_angle_limit():
    th = (math.pi / 3, 0.2, 0.2)
    out = asymptotic_probe(H, th, [(1e-4, 1, 1), (1e-6, 1, 1), (1e-8, 1, 1)])
    assert abs(out[-1].angles[0] - (math.pi - math.pi / 3)) < 1e-4
    out = asymptotic_probe(E, th, [(1e-4, 1, 1), (1e-8, 1, 1)])
    assert abs(out[-1].angles[0] - (math.pi - math.pi / 3)) < 1e-4


def test_probe_pair_and_triple_limits():
    out = asymptotic_probe(H, (0.3, 0.4, 0.5), [(1e-4, 1e-4, 1), (1e-8, 1e-8, 1)])
    assert abs(out[-1].angles[0] + out[-1].angles[1] - math.pi) < 1e-4
    out = asymptotic_probe(H, (0.3, 0.3, 0.3), [(1e-4,) * 3, (1e-8,) * 3])
    assert abs(sum(out[-1].angles) - math.pi) < 1e-4


def test_probe_large_radius_angle_vanishes():
    out = asymptotic_probe(H, (0.4, 0.7, 0.3), [(10, 1, 2), (50, 1, 2)])
    assert out[-1].angles[0] < 1e-3


def test_probe_requires_monotone_sequence():
    with pytest.raises(ValueError):
        asymptotic_probe(E, (0, 0, 0), [(1, 1, 1), (2, 1, 1), (0.5, 1, 1)])
