import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holoviz.errors import DegenerateDirection
from holoviz.geom import (
    Transform,
    UnitQuat,
    Vec3,
    compose,
    interpolate,
    invert,
    quat_from_yaw,
    ray_ground_intersect,
    rotate,
    slerp,
    yaw_quat,
)
from oracles import homogeneous, matrix_quat, quats_close, random_homogeneous, random_unit_quat

YAW90 = quat_from_yaw(math.pi / 2)


def as_matrix(t: Transform) -> np.ndarray:
    return homogeneous((t.translation.x, t.translation.y, t.translation.z),
                       (t.rotation.x, t.rotation.y, t.rotation.z, t.rotation.w))


def from_matrix(m: np.ndarray) -> Transform:
    x, y, z, w = matrix_quat(m)
    return Transform(Vec3(*m[:3, 3]), UnitQuat(x, y, z, w))


def assert_close(a: Transform, b: Transform, tol=1e-9):
    assert abs(a.translation.x - b.translation.x) < tol
    assert abs(a.translation.y - b.translation.y) < tol
    assert abs(a.translation.z - b.translation.z) < tol
    qa = (a.rotation.x, a.rotation.y, a.rotation.z, a.rotation.w)
    qb = (b.rotation.x, b.rotation.y, b.rotation.z, b.rotation.w)
    assert quats_close(qa, qb, tol)


def quat_strategy():
    def build(nums):
        n = math.sqrt(sum(v * v for v in nums))
        if n < 1e-3:
            return UnitQuat(0, 0, 0, 1)
        return UnitQuat(*[v / n for v in nums])

    return st.lists(st.floats(-1, 1), min_size=4, max_size=4).map(build)


class TestCompose:
    def test_identity(self):
        ident = Transform.identity()
        assert_close(compose(ident, ident), ident)

    def test_translation_then_rotation(self):
        a = Transform(Vec3(1, 0, 0), YAW90)
        b = Transform(Vec3(1, 0, 0), UnitQuat.identity())
        out = compose(a, b)
        assert_close(out, Transform(Vec3(1, 1, 0), YAW90))

    def test_inverse_law_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            t = from_matrix(random_homogeneous(rng))
            assert_close(compose(t, invert(t)), Transform.identity())

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            ma, mb = random_homogeneous(rng), random_homogeneous(rng)
            got = compose(from_matrix(ma), from_matrix(mb))
            assert_close(got, from_matrix(ma @ mb))

    def test_associativity(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a, b, c = (from_matrix(random_homogeneous(rng)) for _ in range(3))
            assert_close(compose(compose(a, b), c), compose(a, compose(b, c)))


class TestInvert:
    def test_identity(self):
        assert_close(invert(Transform.identity()), Transform.identity())

    def test_pure_translation(self):
        t = Transform(Vec3(1, 0, 0), UnitQuat.identity())
        assert_close(invert(t), Transform(Vec3(-1, 0, 0), UnitQuat.identity()))

    def test_translation_with_yaw(self):
        t = Transform(Vec3(1, 0, 0), YAW90)
        assert_close(invert(t), Transform(Vec3(0, 1, 0), quat_from_yaw(-math.pi / 2)))

    def test_matches_matrix_inverse(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            m = random_homogeneous(rng)
            assert_close(invert(from_matrix(m)), from_matrix(np.linalg.inv(m)))


class TestSlerp:
    def test_same_quat(self):
        q = quat_from_yaw(0.7)
        got = slerp(q, q, 0.5)
        assert quats_close((got.x, got.y, got.z, got.w), (q.x, q.y, q.z, q.w))

    def test_half_angle(self):
        got = slerp(UnitQuat.identity(), YAW90, 0.5)
        want = quat_from_yaw(math.pi / 4)
        assert quats_close((got.x, got.y, got.z, got.w), (want.x, want.y, want.z, want.w))

    def test_endpoints(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            q0 = UnitQuat(*random_unit_quat(rng))
            q1 = UnitQuat(*random_unit_quat(rng))
            at0 = slerp(q0, q1, 0.0)
            at1 = slerp(q0, q1, 1.0)
            assert quats_close((at0.x, at0.y, at0.z, at0.w), (q0.x, q0.y, q0.z, q0.w))
            assert quats_close((at1.x, at1.y, at1.z, at1.w), (q1.x, q1.y, q1.z, q1.w))

    def test_antipodal_takes_short_arc(self):
        q0 = quat_from_yaw(0.2)
        q1 = quat_from_yaw(0.5)
        negated = UnitQuat(-q1.x, -q1.y, -q1.z, -q1.w)
        mid = slerp(q0, negated, 0.5)
        # Midpoint of yaw 0.2 and yaw 0.5 along the short arc is yaw 0.35.
        want = quat_from_yaw(0.35)
        assert quats_close((mid.x, mid.y, mid.z, mid.w), (want.x, want.y, want.z, want.w), 1e-7)

    @given(quat_strategy(), quat_strategy(), st.floats(0, 1))
    def test_unit_norm_preserved(self, q0, q1, u):
        out = slerp(q0, q1, u)
        assert abs(out.x**2 + out.y**2 + out.z**2 + out.w**2 - 1.0) < 1e-9


class TestInterpolate:
    def test_endpoints(self):
        t0 = Transform(Vec3(0, 0, 0), UnitQuat.identity())
        t1 = Transform(Vec3(2, 0, 0), YAW90)
        assert_close(interpolate(t0, t1, 0.0), t0)
        assert_close(interpolate(t0, t1, 1.0), t1)

    def test_linear_blend(self):
        t0 = Transform(Vec3(0, 0, 0), UnitQuat.identity())
        t1 = Transform(Vec3(2, 0, 0), UnitQuat.identity())
        assert_close(interpolate(t0, t1, 0.5), Transform(Vec3(1, 0, 0), UnitQuat.identity()))


class TestRayGroundIntersect:
    def test_straight_down(self):
        assert ray_ground_intersect(Vec3(0, 0, 2), Vec3(0, 0, -1)) == Vec3(0, 0, 0)

    def test_diagonal(self):
        n = 1 / math.sqrt(2)
        hit = ray_ground_intersect(Vec3(0, 0, 1), Vec3(n, 0, -n))
        assert hit is not None
        assert abs(hit.x - 1.0) < 1e-9 and abs(hit.y) < 1e-9 and abs(hit.z) < 1e-12

    def test_pointing_away(self):
        assert ray_ground_intersect(Vec3(0, 0, 1), Vec3(0, 0, 1)) is None

    def test_parallel_above_plane(self):
        assert ray_ground_intersect(Vec3(0, 0, 1), Vec3(1, 0, 0)) is None

    def test_hits_lie_on_plane(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            o = Vec3(*rng.uniform(-5, 5, 2), rng.uniform(0.1, 5))
            d = Vec3(*rng.uniform(-1, 1, 3))
            hit = ray_ground_intersect(o, d)
            if hit is not None:
                assert abs(hit.z) < 1e-12


class TestYawQuat:
    def test_plus_x(self):
        q = yaw_quat(Vec3(0, 0, 0), Vec3(1, 0, 0))
        assert quats_close((q.x, q.y, q.z, q.w), (0, 0, 0, 1))

    def test_45_degrees(self):
        q = yaw_quat(Vec3(0, 0, 0), Vec3(1, 1, 0))
        want = (0, 0, math.sin(math.pi / 8), math.cos(math.pi / 8))
        assert quats_close((q.x, q.y, q.z, q.w), want)

    def test_degenerate(self):
        with pytest.raises(DegenerateDirection):
            yaw_quat(Vec3(1, 2, 0), Vec3(1, 2, 3))

    def test_zero_roll_pitch(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            tail = Vec3(*rng.uniform(-3, 3, 3))
            tip = Vec3(tail.x + rng.uniform(0.1, 2), tail.y + rng.uniform(0.1, 2), rng.uniform(-1, 1))
            q = yaw_quat(tail, tip)
            assert q.x == 0 and q.y == 0
            # Rotating +x must keep z at zero and point at the target heading.
            v = rotate(q, Vec3(1, 0, 0))
            want = math.atan2(tip.y - tail.y, tip.x - tail.x)
            assert abs(math.atan2(v.y, v.x) - want) < 1e-9
            assert abs(v.z) < 1e-12


class TestRotate:
    def test_matches_matrix(self):
        rng = np.random.default_rng(31)
        for _ in range(300):
            q = UnitQuat(*random_unit_quat(rng))
            v = Vec3(*rng.uniform(-4, 4, 3))
            m = homogeneous((0, 0, 0), (q.x, q.y, q.z, q.w))
            want = m[:3, :3] @ np.array([v.x, v.y, v.z])
            got = rotate(q, v)
            assert np.allclose([got.x, got.y, got.z], want, atol=1e-9)


def test_vec3_requires_finite():
    with pytest.raises(ValueError):
        Vec3(float("nan"), 0, 0)
    with pytest.raises(ValueError):
        Vec3(0, float("inf"), 0)


def test_unit_quat_normalizes_and_rejects_zero():
    q = UnitQuat(0, 0, 0, 2.0)
    assert abs(q.norm() - 1.0) < 1e-9
    with pytest.raises(ValueError):
        UnitQuat(0, 0, 0, 0)
