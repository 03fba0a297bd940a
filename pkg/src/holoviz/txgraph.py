"""Time-buffered transform tree.

Stamped parent<-child transforms arrive asynchronously from many sources;
this module buffers them per edge and answers "express source-frame
coordinates in the target frame at time t" for any two connected frames.

Semantics:
- Each child frame has exactly one current parent. A transform naming a
  different parent re-parents the child and resets its buffer (latest wins).
- Inserts that would create a parent-link cycle raise CycleRejected and are
  counted, never stored.
- Queries interpolate between bracketing samples. Beyond the buffered span
  they clamp to the nearest sample if within EXTRAPOLATION_TOLERANCE,
  otherwise raise ExtrapolationTooFar.
- ``latest`` (at=None) evaluates the chain at the newest time that every
  edge on the path can serve: the min over path edges of each edge's newest
  stamp.

One writer and many readers may call concurrently; a single lock serializes
mutations and gives readers consistent snapshots.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_left, insort
from dataclasses import dataclass, field

from .errors import CycleRejected, Disconnected, ExtrapolationTooFar, UnknownFrame
from .geom import Transform, compose, interpolate, invert

DEFAULT_WINDOW = 10.0
EXTRAPOLATION_TOLERANCE = 0.1

_NS = 1_000_000_000


@dataclass(frozen=True, order=True, slots=True)
class Stamp:
    """ROS-style timestamp: integer seconds plus nanoseconds."""

    secs: int
    nsecs: int = 0

    def __post_init__(self):
        if not 0 <= self.nsecs < _NS:
            carry, ns = divmod(self.nsecs, _NS)
            object.__setattr__(self, "secs", self.secs + carry)
            object.__setattr__(self, "nsecs", ns)

    def seconds(self) -> float:
        return self.secs + self.nsecs / _NS

    @staticmethod
    def from_seconds(s: float) -> "Stamp":
        if not math.isfinite(s):
            raise ValueError(f"stamp must be finite, got {s}")
        secs = math.floor(s)
        nsecs = round((s - secs) * _NS)
        if nsecs >= _NS:
            secs += 1
            nsecs -= _NS
        return Stamp(int(secs), int(nsecs))


def validate_frame(name: str) -> str:
    """Frame ids are nonempty and carry no leading slash."""
    if not isinstance(name, str) or not name:
        raise ValueError("frame id must be a nonempty string")
    if name.startswith("/"):
        raise ValueError(f"frame id must not start with '/': {name!r}")
    return name


@dataclass(frozen=True, slots=True)
class StampedTransform:
    """Pose of ``child`` expressed in ``parent`` at ``stamp``."""

    parent: str
    child: str
    stamp: Stamp
    transform: Transform

    def __post_init__(self):
        validate_frame(self.parent)
        validate_frame(self.child)
        if self.parent == self.child:
            raise ValueError(f"parent and child are both {self.parent!r}")
        if self.stamp.secs < 0:
            raise ValueError("stamp must be >= 0")


@dataclass(frozen=True, slots=True)
class FrameInfo:
    frame: str
    parent: str | None
    latest: Stamp | None


@dataclass
class _Edge:
    parent: str
    child: str
    samples: list[tuple[Stamp, Transform]] = field(default_factory=list)

    def newest(self) -> Stamp:
        return self.samples[-1][0]


class TransformTree:
    def __init__(self, window: float = DEFAULT_WINDOW):
        self._window = window
        self._edges: dict[str, _Edge] = {}
        self._lock = threading.RLock()
        self._cycle_rejected = 0

    # -- ingest ----------------------------------------------------------

    def insert(self, st: StampedTransform) -> None:
        with self._lock:
            edge = self._edges.get(st.child)
            if edge is None or edge.parent != st.parent:
                if self._would_cycle(st.parent, st.child):
                    self._cycle_rejected += 1
                    raise CycleRejected(f"{st.parent}->{st.child} would close a loop")
                # New edge, or re-parent with a fresh buffer (latest parent wins).
                edge = _Edge(parent=st.parent, child=st.child)
                self._edges[st.child] = edge
            key = (st.stamp, st.transform)
            idx = bisect_left(edge.samples, st.stamp, key=lambda s: s[0])
            if idx < len(edge.samples) and edge.samples[idx][0] == st.stamp:
                edge.samples[idx] = key
            else:
                insort(edge.samples, key, key=lambda s: s[0])
            cutoff = edge.newest().seconds() - self._window
            while edge.samples and edge.samples[0][0].seconds() < cutoff:
                edge.samples.pop(0)

    def _would_cycle(self, parent: str, child: str) -> bool:
        # The child's own parent link is being replaced, so a cycle exists
        # exactly when child is an ancestor of (or equal to) the new parent.
        cur: str | None = parent
        while cur is not None:
            if cur == child:
                return True
            edge = self._edges.get(cur)
            cur = edge.parent if edge else None
        return False

    # -- queries ---------------------------------------------------------

    def lookup(self, target: str, source: str, at: Stamp | None = None) -> Transform:
        """Transform expressing source-frame coordinates in the target frame.

        ``at=None`` means "latest": the newest time valid across the whole
        path.
        """
        with self._lock:
            known = self._known_frames()
            for f in (target, source):
                if f not in known:
                    raise UnknownFrame(f)
            if target == source:
                return Transform.identity()
            up_source = self._ancestry(source)
            up_target = self._ancestry(target)
            target_depth = {f: d for d, f in enumerate(up_target)}
            lca = next((f for f in up_source if f in target_depth), None)
            if lca is None:
                raise Disconnected(f"{target} and {source} share no ancestor")
            src_edges = [self._edges[f] for f in up_source[: up_source.index(lca)]]
            dst_edges = [self._edges[f] for f in up_target[: target_depth[lca]]]
            path = src_edges + dst_edges
            if at is None:
                t = min(e.newest().seconds() for e in path)
            else:
                t = at.seconds()
            t_lca_source = Transform.identity()
            for frame in up_source[: up_source.index(lca)]:
                t_lca_source = compose(self._evaluate(self._edges[frame], t), t_lca_source)
            t_lca_target = Transform.identity()
            for frame in up_target[: target_depth[lca]]:
                t_lca_target = compose(self._evaluate(self._edges[frame], t), t_lca_target)
            return compose(invert(t_lca_target), t_lca_source)

    def frames(self) -> list[FrameInfo]:
        """Topology snapshot: (frame, current parent, newest stamp touching it)."""
        with self._lock:
            latest: dict[str, Stamp] = {}
            parents: dict[str, str | None] = {}
            for child, edge in self._edges.items():
                parents[child] = edge.parent
                parents.setdefault(edge.parent, None)
                newest = edge.newest()
                for f in (child, edge.parent):
                    if f not in latest or latest[f] < newest:
                        latest[f] = newest
            return [
                FrameInfo(frame=f, parent=parents[f], latest=latest.get(f))
                for f in sorted(parents)
            ]

    def samples(self, child: str) -> list[Stamp]:
        """Buffered stamps for the edge above ``child`` (diagnostics)."""
        with self._lock:
            edge = self._edges.get(child)
            return [s[0] for s in edge.samples] if edge else []

    def stats(self) -> dict[str, int]:
        with self._lock:
            return {"cycle_rejected": self._cycle_rejected}

    # -- internals -------------------------------------------------------

    def _known_frames(self) -> set[str]:
        names = set(self._edges)
        names.update(e.parent for e in self._edges.values())
        return names

    def _ancestry(self, frame: str) -> list[str]:
        chain = [frame]
        cur = frame
        while True:
            edge = self._edges.get(cur)
            if edge is None:
                return chain
            cur = edge.parent
            chain.append(cur)

    def _evaluate(self, edge: _Edge, t: float) -> Transform:
        samples = edge.samples
        first_t = samples[0][0].seconds()
        last_t = samples[-1][0].seconds()
        if t <= first_t:
            if first_t - t > EXTRAPOLATION_TOLERANCE:
                raise ExtrapolationTooFar(
                    f"edge above {edge.child} starts at {first_t:.3f}, asked {t:.3f}"
                )
            return samples[0][1]
        if t >= last_t:
            if t - last_t > EXTRAPOLATION_TOLERANCE:
                raise ExtrapolationTooFar(
                    f"edge above {edge.child} ends at {last_t:.3f}, asked {t:.3f}"
                )
            return samples[-1][1]
        idx = bisect_left(samples, Stamp.from_seconds(t), key=lambda s: s[0])
        s1, tf1 = samples[idx]
        s0, tf0 = samples[idx - 1]
        t0, t1 = s0.seconds(), s1.seconds()
        if t1 == t0:
            return tf1
        return interpolate(tf0, tf1, (t - t0) / (t1 - t0))
