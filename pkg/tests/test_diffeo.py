import json
import math
import pathlib

import numpy as np
import pytest

from nilsphere import diffeo
from nilsphere.diffeo import (
    BORDERLINE,
    INSIDE,
    OUTSIDE,
    BumpProfile,
    FlowMap,
    LocalizedRotation,
    MobiusStereo,
    Rotation,
    Twist,
    WordMap,
    c1_deviation,
    commutator_map,
    evaluate,
    in_neighborhood_vk,
    tangent_frames,
    verify_prop_5_1,
    vk_bound,
)
from nilsphere.errors import UnknownGenerator
from nilsphere.sphere_geom import SpherePoint, geodesic_distance, rows_geodesic

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def rand_points(rng, n):
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def rotation_matrix(axis, ang):
    axis = np.asarray(axis, float)
    axis = axis / np.linalg.norm(axis)
    K = np.array(
        [
            [0, -axis[2], axis[1]],
            [axis[2], 0, -axis[0]],
            [-axis[1], axis[0], 0],
        ]
    )
    return np.eye(3) + math.sin(ang) * K + (1 - math.cos(ang)) * (K @ K)


class TestEvaluate:
    def test_rotation_quarter_turn(self):
        f = Rotation((0, 0, 1), math.pi / 2)
        img = evaluate(f, SpherePoint(1, 0, 0))
        assert geodesic_distance(img, (0, 1, 0)) < 1e-12

    def test_empty_word_is_identity(self):
        w = WordMap((), {})
        p = SpherePoint(0.3, 0.5, -0.2)
        assert geodesic_distance(evaluate(w, p), p) < 1e-15

    def test_twist_matches_rotation_at_profile_peak(self):
        # axial coordinate 0 selects profile(0) = pi/2
        tw = Twist((0, 0, 1), BumpProfile(math.pi / 2, 0.0, 0.5))
        rot = Rotation((0, 0, 1), math.pi / 2)
        p = np.array([1.0, 0.0, 0.0])
        assert np.allclose(tw.apply(p), rot.apply(p), atol=1e-14)

    def test_word_order_rightmost_first(self):
        table = {
            "a": Rotation((0, 0, 1), math.pi / 2),
            "b": Rotation((1, 0, 0), math.pi / 2),
        }
        w = WordMap((("a", 1), ("b", 1)), table)  # a o b: apply b first
        p = np.array([0.0, 1.0, 0.0])
        expected = table["a"].apply(table["b"].apply(p))
        assert np.allclose(w.apply(p), expected, atol=1e-14)

    def test_unknown_generator(self):
        with pytest.raises(UnknownGenerator):
            WordMap((("nope", 1),), {})


class TestDifferential:
    def test_rotation_is_its_own_differential(self):
        rng = np.random.default_rng(2)
        f = Rotation((0.2, -0.5, 0.8), 0.3)
        R = rotation_matrix((0.2, -0.5, 0.8), 0.3)
        X = rand_points(rng, 20)
        e1, _ = tangent_frames(X)
        _, (d,) = f.push(X, (e1,))
        assert np.allclose(d, e1 @ R.T, atol=1e-12)

    def test_identity_word_differential(self):
        w = WordMap((), {})
        rng = np.random.default_rng(3)
        X = rand_points(rng, 10)
        e1, _ = tangent_frames(X)
        _, (d,) = w.push(X, (e1,))
        assert np.allclose(d, e1)

    def test_twist_outside_support_is_identity(self):
        tw = Twist((0, 0, 1), BumpProfile(0.3, 0.35, 0.15))
        p = np.array([[1.0, 0.0, 0.0]])  # axial coordinate 0, outside support
        e1, e2 = tangent_frames(p)
        fx, (d1, d2) = tw.push(p, (e1, e2))
        assert np.allclose(fx, p, atol=1e-15)
        assert np.allclose(d1, e1, atol=1e-15)
        assert np.allclose(d2, e2, atol=1e-15)

    @pytest.mark.parametrize(
        "mapper",
        [
            Rotation((0.3, 0.4, 0.5), 0.7),
            Twist((0, 0, 1), BumpProfile(0.4, 0.1, 0.4)),
            MobiusStereo(1, 0.01 + 0.02j, -0.005j, 1),
        ],
    )
    def test_analytic_matches_finite_differences(self, mapper):
        rng = np.random.default_rng(11)
        X = rand_points(rng, 100)
        e1, _ = tangent_frames(X)
        FX, (d,) = mapper.push(X, (e1,))
        h = 1e-6
        plus = mapper.apply(np.cos(h) * X + np.sin(h) * e1)
        minus = mapper.apply(np.cos(h) * X - np.sin(h) * e1)
        fd = (plus - minus) / (2 * h)
        fd -= np.sum(fd * FX, axis=1, keepdims=True) * FX
        assert np.abs(d - fd).max() < 1e-5


class TestInverse:
    def test_rotation_inverse(self):
        f = Rotation((0.1, 0.9, 0.3), 0.42)
        g = f.inverse()
        assert g.angle == -f.angle

    def test_word_inverse_reverses_and_flips(self):
        table = {"a": Rotation((0, 0, 1), 0.1), "b": Rotation((1, 0, 0), 0.2)}
        w = WordMap((("a", 1), ("b", 1)), table)
        assert w.inverse().letters == (("b", -1), ("a", -1))

    @pytest.mark.parametrize(
        "mapper,tol",
        [
            (Rotation((0.3, -0.2, 0.9), 1.1), 1e-9),
            (Twist((0, 1, 0), BumpProfile(0.8, -0.2, 0.3)), 1e-9),
            (MobiusStereo(1.1, 0.2, 0.1j, 1 / 1.1), 1e-9),
            (
                FlowMap(LocalizedRotation("lr", (0, 0, 1), 1.0, 0.05), 1.3, 64),
                1e-7,
            ),
        ],
    )
    def test_roundtrip(self, mapper, tol):
        rng = np.random.default_rng(5)
        X = rand_points(rng, 1000)
        back = mapper.inverse().apply(mapper.apply(X))
        assert rows_geodesic(back, X).max() < tol


class TestCommutator:
    def test_equal_maps_reduce_to_identity(self):
        f = Rotation((0, 0, 1), 0.3)
        w = commutator_map(f, f)
        assert w.is_identity_word()
        rng = np.random.default_rng(7)
        X = rand_points(rng, 100)
        assert rows_geodesic(w.apply(X), X).max() < 1e-9

    def test_same_axis_rotations_commute(self):
        f = Rotation((0, 0, 1), 0.3)
        g = Rotation((0, 0, 1), 0.7)
        w = commutator_map(f, g)
        rng = np.random.default_rng(9)
        X = rand_points(rng, 200)
        assert rows_geodesic(w.apply(X), X).max() < 1e-12

    def test_small_rotations_match_matrix_oracle(self):
        fx = Rotation((1, 0, 0), 0.004)
        fy = Rotation((0, 1, 0), 0.004)
        w = commutator_map(fx, fy)
        M = (
            rotation_matrix((1, 0, 0), 0.004)
            @ rotation_matrix((0, 1, 0), 0.004)
            @ rotation_matrix((1, 0, 0), -0.004)
            @ rotation_matrix((0, 1, 0), -0.004)
        )
        angle = math.acos(max(-1.0, min(1.0, (np.trace(M) - 1) / 2)))
        assert angle == pytest.approx(1.6e-5, rel=1e-4)
        rng = np.random.default_rng(13)
        X = rand_points(rng, 500)
        assert np.allclose(w.apply(X), X @ M.T, atol=1e-12)


class TestC1Deviation:
    def test_identity_word_zero(self):
        est = c1_deviation(WordMap((), {}), 2)
        assert est.sampled_sup == 0.0

    @pytest.mark.parametrize("theta", [0.002, 0.004, 0.008])
    def test_rotation_matches_dense_fixture(self, theta):
        fixture = json.loads(
            (FIXTURES / "rotation_norm_dense.json").read_text()
        )
        entry = fixture["entries"][repr(theta)]
        analytic = 4 * math.sin(theta / 2)
        assert entry["analytic"] == pytest.approx(analytic, abs=1e-15)
        assert entry["dense_sup"] == pytest.approx(analytic, abs=1e-8)
        est = c1_deviation(Rotation((0, 0, 1), theta), 4)
        assert abs(est.sampled_sup - analytic) < 1e-6

    def test_monotone_in_theta(self):
        small = c1_deviation(Rotation((0, 0, 1), 0.002), 3)
        large = c1_deviation(Rotation((0, 0, 1), 0.004), 3)
        assert small.sampled_sup < large.sampled_sup

    def test_monotone_in_mesh_level(self):
        tw = Twist((0.2, 0.3, 0.9), BumpProfile(0.4, 0.1, 0.35))
        prev = -1.0
        for level in (1, 2, 3, 4):
            est = c1_deviation(tw, level)
            assert est.sampled_sup >= prev - 1e-12
            prev = est.sampled_sup


class TestVkMembership:
    def test_bounds(self):
        assert vk_bound(1) == pytest.approx(1 / 60)
        assert vk_bound(2) == pytest.approx(1 / 300)
        assert vk_bound(3) == pytest.approx(1 / 7500)
        assert vk_bound(2) < vk_bound(1)
        assert vk_bound(3) < vk_bound(2)

    def test_rotation_inside_k1_outside_k2(self):
        f = Rotation((0, 0, 1), 0.004)
        assert in_neighborhood_vk(f, 1).verdict == INSIDE
        assert in_neighborhood_vk(f, 2).verdict == OUTSIDE

    def test_identity_inside_any_k(self):
        w = WordMap((), {})
        for k in (1, 2, 5):
            assert in_neighborhood_vk(w, k).verdict == INSIDE

    def test_borderline_band(self):
        # exact norm just under the bound but within the 5% margin
        theta = 2 * math.asin(1 / 60 / 4 * 0.99)
        f = Twist((0, 0, 1), BumpProfile(theta, 0.0, 0.9))
        verdict = in_neighborhood_vk(f, 1, mesh_level=3).verdict
        assert verdict in (BORDERLINE, OUTSIDE)


class TestProp51:
    def test_equal_rotations_trivial(self):
        f = Rotation((0, 0, 1), 0.004)
        rep = verify_prop_5_1(f, f, 3)
        assert rep.lhs < 1e-9
        assert rep.holds

    def test_small_xy_rotations(self):
        f = Rotation((1, 0, 0), 0.004)
        g = Rotation((0, 1, 0), 0.004)
        rep = verify_prop_5_1(f, g, 4)
        assert rep.lhs == pytest.approx(3.2e-5, rel=1e-3)
        assert rep.rhs == pytest.approx(5 * 0.008, rel=1e-3)
        assert rep.holds

    def test_rejects_large_maps(self):
        from nilsphere.errors import NotInV1

        with pytest.raises(NotInV1):
            verify_prop_5_1(
                Rotation((0, 0, 1), 0.5), Rotation((1, 0, 0), 0.004), 2
            )


class TestFlowCalibration:
    def test_richardson_steps(self):
        field = LocalizedRotation("lr", (0, 0, 1), 1.0, 0.008)
        steps = diffeo.calibrate_flow_steps(field, 1.7)
        f_coarse = FlowMap(field, 1.7, steps)
        f_fine = FlowMap(field, 1.7, 4 * steps)
        rng = np.random.default_rng(21)
        X = rand_points(rng, 200)
        assert rows_geodesic(f_coarse.apply(X), f_fine.apply(X)).max() < 1e-9

    def test_flow_matches_closed_form(self):
        # the localized-rotation field preserves its axial coordinate, so the
        # time-t map is exactly a rotation by t * angular_speed(axis . x)
        field = LocalizedRotation("lr", (0, 0, 1), 1.0, 0.008)
        f = FlowMap(field, 1.0, 32)
        rng = np.random.default_rng(23)
        X = rand_points(rng, 300)
        t = X[:, 2]
        w = field.angular_speed(t) * 1.0
        c, s = np.cos(w), np.sin(w)
        k = np.array([0, 0, 1.0])
        expected = (
            X * c[:, None]
            + np.cross(k, X) * s[:, None]
            + np.outer((X @ k) * (1 - c), k)
        )
        assert rows_geodesic(f.apply(X), expected).max() < 1e-12
