"""Race track centerline built from straight and circular-arc segments.

Geometry conventions
--------------------
A track is an ordered chain of segments, each with a start pose
``(x, y, heading)``, a length in meters and a signed curvature in 1/m
(``0`` for straights, positive for left-hand arcs). Segment ``k+1``
starts exactly at the end pose of segment ``k``, so the centerline is
G1-continuous by construction.

Frenet coordinates ``(d, e)``: ``d`` is the arc length along the
centerline from the track start, ``e`` the signed lateral offset,
positive to the LEFT of the direction of travel. A pose is on-track for
the vehicle body when ``|e| <= 0.5 * (track_width - car_width)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousProjection, OutOfRange

TWO_PI = 2.0 * math.pi

# Tolerance for accepting a projection just past a segment end; joints are
# shared so candidates from both sides dedupe on station.
_END_TOL = 1e-9
# Two projection candidates whose stations differ by more than this while
# claiming near-equal distance make the projection ambiguous.
_STATION_TOL = 1e-6
_DIST_TOL = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class FrenetPose:
    """Station (m along centerline) and signed lateral offset (m, left positive)."""

    d: float
    e: float


@dataclass(frozen=True)
class Segment:
    """One centerline piece: a straight line or a circular arc.

    ``curvature`` is signed (left positive); a straight has curvature 0.
    """

    x0: float
    y0: float
    heading: float
    length: float
    curvature: float

    @property
    def is_arc(self) -> bool:
        return self.curvature != 0.0

    def end_pose(self) -> tuple[float, float, float]:
        if not self.is_arc:
            return (
                self.x0 + self.length * math.cos(self.heading),
                self.y0 + self.length * math.sin(self.heading),
                self.heading,
            )
        cx, cy = self.center()
        sweep = self.curvature * self.length
        vx, vy = self.x0 - cx, self.y0 - cy
        c, s = math.cos(sweep), math.sin(sweep)
        return (cx + c * vx - s * vy, cy + s * vx + c * vy, wrap_angle(self.heading + sweep))

    def center(self) -> tuple[float, float]:
        """Arc center: at signed radius 1/curvature along the left normal."""
        r = 1.0 / self.curvature
        nx, ny = -math.sin(self.heading), math.cos(self.heading)
        return (self.x0 + r * nx, self.y0 + r * ny)

    def point_at(self, t: float, e: float = 0.0) -> tuple[float, float]:
        """Cartesian point at arc length ``t`` into the segment, offset ``e`` left."""
        if not self.is_arc:
            ux, uy = math.cos(self.heading), math.sin(self.heading)
            return (self.x0 + t * ux - e * uy, self.y0 + t * uy + e * ux)
        cx, cy = self.center()
        ang = self.curvature * t
        c, s = math.cos(ang), math.sin(ang)
        vx, vy = self.x0 - cx, self.y0 - cy
        px, py = cx + c * vx - s * vy, cy + s * vx + c * vy
        h = self.heading + ang
        return (px - e * math.sin(h), py + e * math.cos(h))

    def heading_at(self, t: float) -> float:
        return wrap_angle(self.heading + self.curvature * t)

    def project(self, px: float, py: float) -> tuple[float, float] | None:
        """Return (t, e) if the perpendicular foot falls inside the segment.

        ``None`` when the point projects beyond either end. Raises
        AmbiguousProjection when the point coincides with an arc center
        (every arc station is equidistant).
        """
        if not self.is_arc:
            ux, uy = math.cos(self.heading), math.sin(self.heading)
            wx, wy = px - self.x0, py - self.y0
            t = wx * ux + wy * uy
            if t < -_END_TOL or t > self.length + _END_TOL:
                return None
            e = -wx * uy + wy * ux
            return (min(max(t, 0.0), self.length), e)
        cx, cy = self.center()
        wx, wy = px - cx, py - cy
        dist = math.hypot(wx, wy)
        if dist < 1e-12:
            raise AmbiguousProjection(
                "point coincides with an arc center; projection undefined"
            )
        a0 = math.atan2(self.y0 - cy, self.x0 - cx)
        dang = wrap_angle(math.atan2(wy, wx) - a0)
        t = dang / self.curvature
        if t < -_END_TOL or t > self.length + _END_TOL:
            return None
        r = 1.0 / self.curvature
        # left arc: offsets to the left are nearer the center
        e = math.copysign(1.0, self.curvature) * (abs(r) - dist)
        return (min(max(t, 0.0), self.length), e)


class Track:
    """Immutable piecewise line/arc centerline with Frenet conversions.

    Safe to share among concurrent workers: nothing is mutated after
    construction.
    """

    def __init__(
        self,
        segments: list[Segment],
        track_width: float,
        car_width: float,
    ) -> None:
        if not segments:
            raise ValueError("track needs at least one segment")
        if not (track_width > car_width > 0.0):
            raise ValueError("require track_width > car_width > 0")
        for seg in segments:
            if seg.length <= 0.0:
                raise ValueError("segment lengths must be positive")
            if seg.is_arc and seg.length >= TWO_PI / abs(seg.curvature):
                raise ValueError("arc segments must sweep less than a full turn")
        for prev, nxt in zip(segments, segments[1:]):
            ex, ey, eh = prev.end_pose()
            if (
                math.hypot(ex - nxt.x0, ey - nxt.y0) > 1e-9
                or abs(wrap_angle(eh - nxt.heading)) > 1e-9
            ):
                raise ValueError("segments are not G1-continuous")
        self.segments = tuple(segments)
        self.track_width = float(track_width)
        self.car_width = float(car_width)
        self._cum = np.concatenate(([0.0], np.cumsum([s.length for s in segments])))
        self.total_length = float(self._cum[-1])

    @classmethod
    def from_chain(
        cls,
        start_pose: tuple[float, float, float],
        pieces: list[tuple[str, float, float]],
        track_width: float,
        car_width: float,
    ) -> "Track":
        """Build a continuous track from (type, length, curvature) pieces."""
        segments = []
        x, y, h = start_pose
        for kind, length, curvature in pieces:
            if kind == "straight":
                curvature = 0.0
            elif kind != "arc":
                raise ValueError(f"unknown segment type {kind!r}")
            seg = Segment(x, y, h, length, curvature)
            segments.append(seg)
            x, y, h = seg.end_pose()
        return cls(segments, track_width, car_width)

    @property
    def usable_half_width(self) -> float:
        """Largest |e| keeping the whole car body on the track."""
        return 0.5 * (self.track_width - self.car_width)

    def is_on_track(self, pose: FrenetPose) -> bool:
        """Center within the track edges (the spec's off-track flag)."""
        return abs(pose.e) <= 0.5 * self.track_width

    def to_frenet(self, px: float, py: float) -> FrenetPose:
        """Project a Cartesian point onto the centerline.

        Raises AmbiguousProjection when two distinct centerline locations
        claim the point at indistinguishable distance, OutOfRange when the
        point projects beyond both track ends.
        """
        candidates: list[tuple[float, float]] = []  # (d, e)
        for i, seg in enumerate(self.segments):
            hit = seg.project(px, py)
            if hit is None:
                continue
            t, e = hit
            candidates.append((float(self._cum[i]) + t, e))
        if not candidates:
            raise OutOfRange("point projects beyond the track ends")
        # joints produce duplicate claims at the same station; keep one
        candidates.sort(key=lambda c: abs(c[1]))
        best_d, best_e = candidates[0]
        for d, e in candidates[1:]:
            if abs(d - best_d) > _STATION_TOL and abs(abs(e) - abs(best_e)) < _DIST_TOL:
                raise AmbiguousProjection(
                    f"stations {best_d:.6f} and {d:.6f} claim the point equally"
                )
        return FrenetPose(best_d, best_e)

    def _locate(self, d: float) -> tuple[Segment, float]:
        if d < -_END_TOL or d > self.total_length + _END_TOL:
            raise OutOfRange(f"station {d} outside [0, {self.total_length}]")
        d = min(max(d, 0.0), self.total_length)
        i = int(np.searchsorted(self._cum, d, side="right")) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i], d - float(self._cum[i])

    def from_frenet(self, pose: FrenetPose) -> tuple[float, float, float]:
        """Cartesian point and centerline tangent angle at a Frenet pose."""
        seg, t = self._locate(pose.d)
        x, y = seg.point_at(t, pose.e)
        return (x, y, seg.heading_at(t))

    def tangent_angle(self, d: float) -> float:
        """Centerline heading at station ``d``; continuous across joints."""
        seg, t = self._locate(d)
        return seg.heading_at(t)

    def from_frenet_batch(self, d: np.ndarray, e: np.ndarray) -> np.ndarray:
        """Vectorized from_frenet for matching-shape station/offset arrays.

        Returns an array of shape d.shape + (2,) with Cartesian x, y.
        """
        d = np.asarray(d, dtype=float)
        e = np.asarray(e, dtype=float)
        if np.any(d < -_END_TOL) or np.any(d > self.total_length + _END_TOL):
            raise OutOfRange("station outside the track in batch conversion")
        dc = np.clip(d, 0.0, self.total_length)
        idx = np.clip(
            np.searchsorted(self._cum, dc, side="right") - 1, 0, len(self.segments) - 1
        )
        out = np.empty(d.shape + (2,), dtype=float)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if not np.any(mask):
                continue
            t = dc[mask] - float(self._cum[i])
            ee = e[mask]
            if not seg.is_arc:
                ux, uy = math.cos(seg.heading), math.sin(seg.heading)
                out[mask, 0] = seg.x0 + t * ux - ee * uy
                out[mask, 1] = seg.y0 + t * uy + ee * ux
            else:
                cx, cy = seg.center()
                ang = seg.curvature * t
                vx, vy = seg.x0 - cx, seg.y0 - cy
                c, s = np.cos(ang), np.sin(ang)
                px = cx + c * vx - s * vy
                py = cy + s * vx + c * vy
                h = seg.heading + ang
                out[mask, 0] = px - ee * np.sin(h)
                out[mask, 1] = py + ee * np.cos(h)
        return out

    def tangent_angle_batch(self, d: np.ndarray) -> np.ndarray:
        """Vectorized tangent_angle."""
        d = np.asarray(d, dtype=float)
        if np.any(d < -_END_TOL) or np.any(d > self.total_length + _END_TOL):
            raise OutOfRange("station outside the track in batch tangent")
        dc = np.clip(d, 0.0, self.total_length)
        idx = np.clip(
            np.searchsorted(self._cum, dc, side="right") - 1, 0, len(self.segments) - 1
        )
        out = np.empty(d.shape, dtype=float)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if not np.any(mask):
                continue
            t = dc[mask] - float(self._cum[i])
            ang = seg.heading + seg.curvature * t
            out[mask] = np.arctan2(np.sin(ang), np.cos(ang))
        return out
