"""Rigid-body transform math: vectors, unit quaternions, pose composition.

Conventions
-----------
- Quaternions are stored (x, y, z, w), matching the ROS message layout.
- Angles are radians everywhere inside the engine; degrees only at UI edges.
- A ``Transform`` maps child-frame coordinates into the parent frame:
  ``p_parent = rotation * p_child + translation``.
- The ground plane of the world frame is z = 0.

Everything here is an immutable value type plus pure functions, safe to use
from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateDirection

# Unit-norm tolerance enforced after construction/normalization.
_NORM_TOL = 1e-9
# cos(theta) above this switches slerp to a normalized linear blend.
_SLERP_PARALLEL = 1.0 - 1e-9


@dataclass(frozen=True, slots=True)
class Vec3:
    """Point or direction in meters; all components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Vec3 components must be finite, got ({self.x}, {self.y}, {self.z})")

    @staticmethod
    def zero() -> "Vec3":
        return Vec3(0.0, 0.0, 0.0)

    def add(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def sub(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance(self, other: "Vec3") -> float:
        return self.sub(other).norm()


@dataclass(frozen=True, slots=True)
class UnitQuat:
    """Unit quaternion (x, y, z, w); renormalized on construction."""

    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)
        if not math.isfinite(n) or n < 1e-12:
            raise ValueError(f"quaternion norm {n} not normalizable")
        if abs(n - 1.0) > _NORM_TOL:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)
            object.__setattr__(self, "w", self.w / n)

    @staticmethod
    def identity() -> "UnitQuat":
        return UnitQuat(0.0, 0.0, 0.0, 1.0)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)

    def conjugate(self) -> "UnitQuat":
        return UnitQuat(-self.x, -self.y, -self.z, self.w)

    def mul(self, other: "UnitQuat") -> "UnitQuat":
        """Hamilton product self * other."""
        ax, ay, az, aw = self.x, self.y, self.z, self.w
        bx, by, bz, bw = other.x, other.y, other.z, other.w
        return UnitQuat(
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        )


@dataclass(frozen=True, slots=True)
class Transform:
    """Rigid transform: rotation then translation."""

    translation: Vec3
    rotation: UnitQuat

    @staticmethod
    def identity() -> "Transform":
        return Transform(Vec3.zero(), UnitQuat.identity())


def rotate(q: UnitQuat, v: Vec3) -> Vec3:
    """Rotate ``v`` by ``q`` (quaternion sandwich, no matrix built)."""
    # t = 2 * (q_vec x v); v' = v + w*t + q_vec x t
    qx, qy, qz, qw = q.x, q.y, q.z, q.w
    tx = 2.0 * (qy * v.z - qz * v.y)
    ty = 2.0 * (qz * v.x - qx * v.z)
    tz = 2.0 * (qx * v.y - qy * v.x)
    return Vec3(
        v.x + qw * tx + (qy * tz - qz * ty),
        v.y + qw * ty + (qz * tx - qx * tz),
        v.z + qw * tz + (qx * ty - qy * tx),
    )


def apply(t: Transform, p: Vec3) -> Vec3:
    """Map a point from the child frame into the parent frame."""
    return rotate(t.rotation, p).add(t.translation)


def compose(a: Transform, b: Transform) -> Transform:
    """Transform equal to applying ``b`` first, then ``a`` (matrix product A*B)."""
    return Transform(apply(a, b.translation), a.rotation.mul(b.rotation))


def invert(t: Transform) -> Transform:
    qi = t.rotation.conjugate()
    ti = rotate(qi, t.translation)
    return Transform(Vec3(-ti.x, -ti.y, -ti.z), qi)


def slerp(q0: UnitQuat, q1: UnitQuat, u: float) -> UnitQuat:
    """Shortest-arc spherical interpolation; endpoints reproduced exactly."""
    if u <= 0.0:
        return q0
    if u >= 1.0:
        return q1
    dot = q0.x * q1.x + q0.y * q1.y + q0.z * q1.z + q0.w * q1.w
    x1, y1, z1, w1 = q1.x, q1.y, q1.z, q1.w
    if dot < 0.0:
        # Antipodal pair: negate one end so we interpolate the short way.
        dot = -dot
        x1, y1, z1, w1 = -x1, -y1, -z1, -w1
    if dot > _SLERP_PARALLEL:
        # Nearly parallel: normalized linear blend avoids division by sin(0).
        return UnitQuat(
            q0.x + (x1 - q0.x) * u,
            q0.y + (y1 - q0.y) * u,
            q0.z + (z1 - q0.z) * u,
            q0.w + (w1 - q0.w) * u,
        )
    theta = math.acos(max(-1.0, min(1.0, dot)))
    s = math.sin(theta)
    k0 = math.sin((1.0 - u) * theta) / s
    k1 = math.sin(u * theta) / s
    return UnitQuat(
        k0 * q0.x + k1 * x1,
        k0 * q0.y + k1 * y1,
        k0 * q0.z + k1 * z1,
        k0 * q0.w + k1 * w1,
    )


def interpolate(t0: Transform, t1: Transform, u: float) -> Transform:
    """Blend translation linearly and rotation by slerp, u in [0, 1]."""
    tr = Vec3(
        t0.translation.x + (t1.translation.x - t0.translation.x) * u,
        t0.translation.y + (t1.translation.y - t0.translation.y) * u,
        t0.translation.z + (t1.translation.z - t0.translation.z) * u,
    )
    return Transform(tr, slerp(t0.rotation, t1.rotation, u))


def ray_ground_intersect(origin: Vec3, direction: Vec3) -> Vec3 | None:
    """Intersect a ray with the z=0 ground plane.

    Returns the hit point, or None when the ray is parallel to the plane or
    points away from it. The direction need not be normalized.
    """
    if direction.norm() < 1e-12:
        return None
    if direction.z == 0.0:
        return None
    k = -origin.z / direction.z
    if k < 0.0:
        return None
    return Vec3(origin.x + k * direction.x, origin.y + k * direction.y, 0.0)


def quat_from_yaw(yaw: float) -> UnitQuat:
    """Rotation about +z by ``yaw`` radians."""
    h = yaw * 0.5
    return UnitQuat(0.0, 0.0, math.sin(h), math.cos(h))


def yaw_of(q: UnitQuat) -> float:
    """Heading of the rotated +x axis projected on the ground plane."""
    v = rotate(q, Vec3(1.0, 0.0, 0.0))
    return math.atan2(v.y, v.x)


def yaw_quat(tail: Vec3, tip: Vec3) -> UnitQuat:
    """Zero roll/pitch quaternion pointing from tail toward tip on the ground.

    Raises DegenerateDirection when the two ground projections are closer
    than 1e-6 m.
    """
    dx = tip.x - tail.x
    dy = tip.y - tail.y
    if math.hypot(dx, dy) < 1e-6:
        raise DegenerateDirection(f"tail {tail} and tip {tip} project to the same ground point")
    return quat_from_yaw(math.atan2(dy, dx))


def quat_align_x(direction: Vec3) -> UnitQuat:
    """Rotation taking the +x axis onto ``direction`` (any nonzero vector)."""
    n = direction.norm()
    if n < 1e-12:
        raise DegenerateDirection("cannot orient along a zero direction")
    dx, dy, dz = direction.x / n, direction.y / n, direction.z / n
    dot = dx  # dot((1,0,0), d)
    if dot > 1.0 - 1e-12:
        return UnitQuat.identity()
    if dot < -1.0 + 1e-12:
        # Antiparallel: rotate pi about +z.
        return UnitQuat(0.0, 0.0, 1.0, 0.0)
    # axis = x_hat cross d, angle = acos(dot)
    ax, ay, az = 0.0 * dz - 0.0 * dy, 0.0 * dx - 1.0 * dz, 1.0 * dy - 0.0 * dx
    angle = math.acos(max(-1.0, min(1.0, dot)))
    s = math.sin(angle * 0.5)
    an = math.sqrt(ax * ax + ay * ay + az * az)
    return UnitQuat(ax / an * s, ay / an * s, az / an * s, math.cos(angle * 0.5))
