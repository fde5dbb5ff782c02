import math

import numpy as np
import pytest

from nilsphere.curves import (
    EXACT_PERIOD,
    SELF_INTERSECTION,
    build_character_polyline,
    curve_distance,
    curve_in_disk,
    curves_disjoint,
    extract_character_curve,
    verify_ball_exclusion,
)
from nilsphere.diffeo import (
    BumpProfile,
    FlowMap,
    LocalizedRotation,
    MobiusStereo,
    Rotation,
    Twist,
    WordMap,
)
from nilsphere.errors import FixedBasePoint, NotInV1, TruncationBeforeClosure
from nilsphere.sphere_geom import (
    ON_CURVE,
    SpherePoint,
    SphericalPolyline,
    geodesic_distance,
    is_simple_loop,
    loop_partition,
    point_component,
    rows_geodesic,
)


def colat_point(theta, phi=0.0):
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
         math.cos(theta)]
    )


def disjoint_twists():
    band = BumpProfile(2e-3, 0.875, 0.075)
    return Twist((1, 0, 0), band), Twist((0, 1, 0), band)


class TestBuildPolyline:
    def test_hexagon_closes(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 6)
        poly = build_character_polyline(f, np.array([1.0, 0, 0]), 100)
        assert poly.closed
        assert len(poly.vertices) == 6

    def test_2000gon_closes(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 2000)
        poly = build_character_polyline(f, np.array([1.0, 0, 0]), 4096)
        assert poly.closed
        assert len(poly.vertices) == 2000

    def test_identity_rejected(self):
        with pytest.raises(FixedBasePoint):
            build_character_polyline(WordMap((), {}), np.array([1.0, 0, 0]), 10)


class TestExtractCurve:
    def test_rational_rotation_hemispheres(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 6)
        c = extract_character_curve(f, np.array([1.0, 0, 0]), 100)
        assert c.closure_kind == EXACT_PERIOD
        for a in c.partition.component_areas:
            assert a == pytest.approx(2 * math.pi, abs=1e-8)

    def test_loop_is_simple(self):
        f = Rotation((0, 0, 1), 0.002)
        c = extract_character_curve(f, colat_point(1.0), 4096)
        assert c.closure_kind == SELF_INTERSECTION
        assert is_simple_loop(c.loop)
        # the loop hugs the latitude circle, so the enclosed cap area matches
        cap = 2 * math.pi * (1 - math.cos(1.0))
        assert min(c.partition.component_areas) == pytest.approx(cap, rel=1e-2)

    def test_flow_annulus_separates_poles(self):
        field = LocalizedRotation("lr", (0, 0, 1), 1.2, 0.05)
        f = FlowMap(field, 1.0, 2)
        c = extract_character_curve(f, colat_point(0.6), 2048)
        north = point_component(c.partition, (0, 0, 1))
        south = point_component(c.partition, (0, 0, -1))
        assert {north, south} == {0, 1}

    def test_north_south_drift_truncates(self):
        lam = 1.05
        mo = MobiusStereo(math.sqrt(lam), 0, 0, 1 / math.sqrt(lam))
        with pytest.raises(TruncationBeforeClosure):
            extract_character_curve(mo, np.array([1.0, 0, 0]), 500)

    def test_no_fixed_point_on_own_curve(self):
        f = Rotation((0, 0, 1), 0.004)
        c = extract_character_curve(f, colat_point(0.8), 4096)
        samples = np.array([q.vec for q in c.loop.sample(1000)])
        disp = rows_geodesic(samples, f.apply(samples))
        assert float(disp.min()) > 1e-6

    def test_rotation_equivariance(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 200)
        p = colat_point(0.9)
        c = extract_character_curve(f, p, 300)
        conj = Rotation((1, 0, 0), 0.7)
        f2 = Rotation(conj.apply(np.array([0.0, 0, 1.0])), 2 * math.pi / 200)
        c2 = extract_character_curve(f2, conj.apply(p), 300)
        rotated = conj.apply(np.array([q.vec for q in c.loop.vertices]))
        assert rows_geodesic(
            rotated, np.array([q.vec for q in c2.loop.vertices])
        ).max() < 1e-9
        assert np.allclose(
            sorted(c.partition.component_areas),
            sorted(c2.partition.component_areas),
            atol=1e-9,
        )


class TestBallExclusion:
    def test_equatorial_point(self):
        f = Rotation((0, 0, 1), 0.004)
        rep = verify_ball_exclusion(f, np.array([1.0, 0, 0]))
        assert rep.radius == pytest.approx(0.016, rel=1e-3)
        assert rep.nearest_fixed_distance == pytest.approx(math.pi / 2, abs=1e-9)
        assert rep.holds

    def test_near_pole_displacement_formula(self):
        theta = 0.004
        f = Rotation((0, 0, 1), theta)
        p = colat_point(0.1)
        rep = verify_ball_exclusion(f, p)
        # d(p, f p) = theta * sin(colatitude) + O(theta^3)
        assert rep.radius == pytest.approx(4 * theta * math.sin(0.1), rel=1e-4)
        assert rep.nearest_fixed_distance == pytest.approx(0.1, abs=1e-9)
        assert rep.holds

    def test_twist_interior_points(self):
        rng = np.random.default_rng(31)
        tw = Twist((0, 0, 1), BumpProfile(1.5e-3, 0.35, 0.15))
        checked = 0
        for _ in range(50):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            if not (0.22 < v[2] < 0.48):
                continue
            if geodesic_distance(v, tw.apply(v)) < 1e-8:
                continue
            rep = verify_ball_exclusion(tw, v, mesh_level=3)
            assert rep.holds
            checked += 1
        assert checked > 3

    def test_rejects_large_map(self):
        with pytest.raises(NotInV1):
            verify_ball_exclusion(Rotation((0, 0, 1), 0.5), np.array([1.0, 0, 0]))


class TestCurvesDisjoint:
    def test_disjoint_support_twists(self):
        tw1, tw2 = disjoint_twists()
        c1 = extract_character_curve(
            tw1, np.array([0.875, 0.0, math.sqrt(1 - 0.875 ** 2)]), 4096
        )
        c2 = extract_character_curve(
            tw2, np.array([0.0, 0.875, math.sqrt(1 - 0.875 ** 2)]), 4096
        )
        assert curves_disjoint(c1, c2)
        # orbits stay inside the support caps, so the gap between the caps
        # bounds the curve distance from below
        d = curve_distance(c1, c2)
        assert d == pytest.approx(math.pi / 2 - 2 * math.acos(0.875), abs=1e-3)

    def test_curve_not_disjoint_from_itself(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 24)
        c = extract_character_curve(f, np.array([1.0, 0, 0]), 100)
        assert not curves_disjoint(c, c)

    def test_concentric_latitude_polygons(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 48)
        c1 = extract_character_curve(f, colat_point(math.acos(0.2)), 100)
        c2 = extract_character_curve(f, colat_point(math.acos(0.6)), 100)
        assert curves_disjoint(c1, c2)


class TestCurveDistance:
    def test_latitude_polygons_same_axis(self):
        # colatitudes symmetric about pi/4 make the chord sags cancel; the
        # residual error is the sag profile's next order (~1e-7 at n=2000)
        th1, th2 = math.pi / 4 - 0.1, math.pi / 4 + 0.1
        f = Rotation((0, 0, 1), 2 * math.pi / 2000)
        c1 = extract_character_curve(f, colat_point(th1), 4096)
        c2 = extract_character_curve(f, colat_point(th2), 4096)
        assert curve_distance(c1, c2) == pytest.approx(th2 - th1, abs=1e-6)

    def test_intersecting_curves_zero(self):
        f = Rotation((0, 0, 1), 2 * math.pi / 24)
        g = Rotation((1, 0, 0), 2 * math.pi / 24)
        c1 = extract_character_curve(f, np.array([1.0, 0, 0]), 100)
        c2 = extract_character_curve(g, np.array([0.0, 1.0, 0]), 100)
        assert curve_distance(c1, c2) == 0.0

    def test_step_lower_bound(self):
        # every orbit step of both maps is >= r, so distance >= r (trivially
        # satisfied here; the bound is read from the orbit steps themselves)
        f = Rotation((0, 0, 1), 2 * math.pi / 2000)
        c1 = extract_character_curve(f, colat_point(0.9), 4096)
        c2 = extract_character_curve(f, colat_point(1.4), 4096)
        s1 = rows_geodesic(*c1.polyline.edge_arrays).min()
        s2 = rows_geodesic(*c2.polyline.edge_arrays).min()
        r = min(float(s1), float(s2))
        assert curve_distance(c1, c2) >= r - 1e-9


class TestCurveInDisk:
    def equator_partition(self):
        n = 64
        verts = [
            SpherePoint(math.cos(2 * math.pi * i / n),
                        math.sin(2 * math.pi * i / n), 0.0)
            for i in range(n)
        ]
        return loop_partition(SphericalPolyline(verts, closed=True))

    def test_polar_curve_in_north_side(self):
        part = self.equator_partition()
        north_side = point_component(part, (0, 0, 1))
        f = Rotation((0, 0, 1), 2 * math.pi / 48)
        c = extract_character_curve(f, colat_point(0.3), 100)
        assert curve_in_disk(c, part, north_side)
        assert not curve_in_disk(c, part, 1 - north_side)

    def test_crossing_curve_in_neither(self):
        part = self.equator_partition()
        f = Rotation((1, 0, 0), 2 * math.pi / 48)  # orbits cross the equator
        c = extract_character_curve(f, np.array([0.0, 0.3, 0.95]), 100)
        assert not curve_in_disk(c, part, 0)
        assert not curve_in_disk(c, part, 1)
