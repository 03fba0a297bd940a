import numpy as np

from holoviz.align import MarkerDetection, WorldAlignment, apply_alignment, solve_alignment
from holoviz.bridge.messages import RGBA
from holoviz.geom import Transform, UnitQuat, Vec3, apply, compose
from holoviz.scene import Primitive, Scene, SceneNode
from oracles import random_unit_quat

IDENT = Transform.identity()


def rand_transform(rng) -> Transform:
    return Transform(Vec3(*rng.uniform(-4, 4, 3)), UnitQuat(*random_unit_quat(rng)))


def close(a: Transform, b: Transform, tol=1e-9) -> bool:
    dt = a.translation.distance(b.translation)
    qa, qb = a.rotation, b.rotation
    same = max(abs(qa.x - qb.x), abs(qa.y - qb.y), abs(qa.z - qb.z), abs(qa.w - qb.w))
    flip = max(abs(qa.x + qb.x), abs(qa.y + qb.y), abs(qa.z + qb.z), abs(qa.w + qb.w))
    return dt < tol and min(same, flip) < tol


def scene_with_marker(pose: Transform) -> Scene:
    scene = Scene()
    scene.commit({
        "align/marker": SceneNode("align/marker", Primitive.CUBE, pose,
                                  Vec3(0.1, 0.1, 0.01), RGBA(1, 1, 0, 1)),
        "other": SceneNode("other", Primitive.SPHERE,
                           Transform(Vec3(2, 3, 0.5), UnitQuat.identity()),
                           Vec3(0.2, 0.2, 0.2), RGBA(0, 1, 0, 1)),
    })
    return scene


class TestSolve:
    def test_identity_everywhere(self):
        det = MarkerDetection(marker_in_device=IDENT, device_in_vwcs=IDENT)
        assert close(solve_alignment(det, IDENT), IDENT)

    def test_pure_translation_offset(self):
        det = MarkerDetection(
            marker_in_device=Transform(Vec3(1, 0, 0), UnitQuat.identity()),
            device_in_vwcs=IDENT,
        )
        got = solve_alignment(det, IDENT)
        assert close(got, Transform(Vec3(-1, 0, 0), UnitQuat.identity()))

    def test_correction_maps_detection_onto_configured_pose(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            det = MarkerDetection(marker_in_device=rand_transform(rng),
                                  device_in_vwcs=rand_transform(rng))
            marker_in_rwcs = rand_transform(rng)
            corr = solve_alignment(det, marker_in_rwcs)
            assert close(compose(corr, det.marker_in_vwcs()), marker_in_rwcs)


class TestApply:
    def test_marker_lands_on_configured_pose(self):
        rng = np.random.default_rng(9)
        det = MarkerDetection(marker_in_device=rand_transform(rng),
                              device_in_vwcs=rand_transform(rng))
        marker_in_rwcs = rand_transform(rng)
        world = WorldAlignment(marker_in_rwcs=marker_in_rwcs)
        world.solve(det)
        scene = scene_with_marker(det.marker_in_vwcs())
        before = scene.nodes()["align/marker"].pose_world
        assert not close(before, marker_in_rwcs, 1e-3)
        apply_alignment(world, scene)
        assert world.aligned
        assert close(scene.nodes()["align/marker"].pose_world, marker_in_rwcs)

    def test_identity_correction_leaves_scene_unchanged(self):
        world = WorldAlignment(marker_in_rwcs=IDENT)
        world.solve(MarkerDetection(marker_in_device=IDENT, device_in_vwcs=IDENT))
        scene = scene_with_marker(IDENT)
        before = scene.nodes()
        apply_alignment(world, scene)
        after = scene.nodes()
        for node_id in before:
            assert close(before[node_id].pose_world, after[node_id].pose_world)

    def test_latest_detection_wins(self):
        rng = np.random.default_rng(10)
        world = WorldAlignment(marker_in_rwcs=rand_transform(rng))
        first = world.solve(MarkerDetection(rand_transform(rng), rand_transform(rng)))
        second_det = MarkerDetection(rand_transform(rng), rand_transform(rng))
        second = world.solve(second_det)
        assert world.vwcs_to_rwcs is second
        assert not close(first, second, 1e-3)
        assert close(compose(second, second_det.marker_in_vwcs()), world.marker_in_rwcs)

    def test_rigidity_pairwise_distances_preserved(self):
        rng = np.random.default_rng(11)
        scene = Scene()
        desired = {}
        for k in range(12):
            desired[f"n{k}"] = SceneNode(
                f"n{k}", Primitive.SPHERE, rand_transform(rng),
                Vec3(0.1, 0.1, 0.1), RGBA(1, 0, 0, 1),
            )
        scene.commit(desired)
        positions_before = {k: n.pose_world.translation for k, n in scene.nodes().items()}
        world = WorldAlignment(marker_in_rwcs=rand_transform(rng))
        world.solve(MarkerDetection(rand_transform(rng), rand_transform(rng)))
        apply_alignment(world, scene)
        positions_after = {k: n.pose_world.translation for k, n in scene.nodes().items()}
        keys = sorted(positions_before)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                d0 = positions_before[a].distance(positions_before[b])
                d1 = positions_after[a].distance(positions_after[b])
                assert abs(d0 - d1) < 1e-9

    def test_rebase_also_rotates_points_correctly(self):
        # A node at p must land at correction * p exactly.
        rng = np.random.default_rng(12)
        corr_src = rand_transform(rng)
        world = WorldAlignment(marker_in_rwcs=corr_src)
        world.solve(MarkerDetection(IDENT, IDENT))  # correction == marker_in_rwcs
        scene = scene_with_marker(IDENT)
        node_pose = scene.nodes()["other"].pose_world
        apply_alignment(world, scene)
        moved = scene.nodes()["other"].pose_world
        want = apply(corr_src, node_pose.translation)
        assert moved.translation.distance(want) < 1e-9
