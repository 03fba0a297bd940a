"""World alignment: map the arbitrary virtual world frame onto the real one.

A fiducial marker sits at a configured, known pose in the real world
(``marker_in_rwcs``). A detection event reports where that marker appears
relative to the device camera and where the device itself sits in the
virtual world. From those two chains the rigid correction taking virtual
world coordinates into real world coordinates follows directly:

    vwcs_to_rwcs = marker_in_rwcs * inverse(device_in_vwcs * marker_in_device)

Applying the correction re-roots the scene so that everything previously
expressed in the virtual frame, including the detected marker itself, lands
at its real-world pose. The detection itself (camera, QR decoding) is out
of scope; detections arrive as injected events.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .geom import Transform, UnitQuat, Vec3, compose, invert
from .scene import Scene
from .txgraph import Stamp


@dataclass(frozen=True, slots=True)
class MarkerDetection:
    """One sighting of the fiducial: marker pose in the device frame plus
    the tracked device pose in the virtual world at the same instant."""

    marker_in_device: Transform
    device_in_vwcs: Transform
    stamp: Stamp = Stamp(0, 0)

    def marker_in_vwcs(self) -> Transform:
        return compose(self.device_in_vwcs, self.marker_in_device)


def solve_alignment(det: MarkerDetection, marker_in_rwcs: Transform) -> Transform:
    """Rigid correction taking virtual-world poses into the real world."""
    return compose(marker_in_rwcs, invert(det.marker_in_vwcs()))


@dataclass
class WorldAlignment:
    """Alignment state: configured marker placement plus the last solved
    correction. Latest detection wins."""

    marker_in_rwcs: Transform
    vwcs_to_rwcs: Transform | None = None
    aligned: bool = False

    def solve(self, det: MarkerDetection) -> Transform:
        self.vwcs_to_rwcs = solve_alignment(det, self.marker_in_rwcs)
        return self.vwcs_to_rwcs


def apply_alignment(world: WorldAlignment, scene: Scene) -> None:
    """Re-root the scene so its nodes are expressed directly in RWCS."""
    if world.vwcs_to_rwcs is None:
        raise ValueError("no correction solved yet")
    scene.rebase(world.vwcs_to_rwcs)
    world.aligned = True


def _pose_from_wire(d: Mapping) -> Transform:
    return Transform(Vec3(*d["t"]), UnitQuat(*d["q"]))


def detection_from_wire(d: Mapping) -> MarkerDetection:
    """Parse the session-protocol detect payload."""
    try:
        return MarkerDetection(
            marker_in_device=_pose_from_wire(d["marker_in_device"]),
            device_in_vwcs=_pose_from_wire(d["device_in_vwcs"]),
            stamp=Stamp.from_seconds(float(d.get("stamp", 0.0))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad detection payload: {exc}") from exc
