"""Preloaded mesh asset registry.

Pose displays may reference a mesh by name instead of the default arrow;
viewers map the name to whatever representation they have (the bundled web
client draws labelled placeholder geometry). ``footprint`` hints at a
sensible draw size in meters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geom import Vec3


@dataclass(frozen=True, slots=True)
class MeshAsset:
    name: str
    footprint: Vec3
    description: str = ""


class AssetRegistry:
    def __init__(self, assets: list[MeshAsset] | None = None):
        self._assets: dict[str, MeshAsset] = {}
        for asset in assets if assets is not None else default_assets():
            self._assets[asset.name] = asset

    def add(self, asset: MeshAsset) -> None:
        self._assets[asset.name] = asset

    def has(self, name: str) -> bool:
        return name in self._assets

    def get(self, name: str) -> MeshAsset:
        return self._assets[name]

    def names(self) -> list[str]:
        return sorted(self._assets)


def default_assets() -> list[MeshAsset]:
    return [
        MeshAsset("mobile_robot", Vec3(0.55, 0.55, 1.0), "differential-drive base with a mast"),
        MeshAsset("gripper", Vec3(0.2, 0.08, 0.08), "two-finger end effector"),
        MeshAsset("crate", Vec3(0.3, 0.3, 0.3), "handover test object"),
    ]
