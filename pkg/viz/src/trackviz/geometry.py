"""Track outline sampling from the scenario YAML.

Rebuilds the centerline polyline and the two edge polylines from the
segment list (straights and constant-curvature arcs chained head to
tail). Only what the figures need; no Frenet machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml


@dataclass
class TrackOutline:
    centerline: np.ndarray   # [N, 2]
    left_edge: np.ndarray
    right_edge: np.ndarray
    width: float
    car_width: float


def load_outline(config_path, spacing: float = 0.5) -> TrackOutline:
    with open(config_path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    tr = doc["track"]
    x, y, heading = tr["start_pose"]
    width = float(tr["width"])
    half = 0.5 * width
    pts, lefts, rights = [], [], []

    def emit(px, py, h):
        nx, ny = -math.sin(h), math.cos(h)
        pts.append((px, py))
        lefts.append((px + half * nx, py + half * ny))
        rights.append((px - half * nx, py - half * ny))

    for seg in tr["segments"]:
        length = float(seg["length"])
        curvature = float(seg.get("curvature", 0.0)) if seg["type"] == "arc" else 0.0
        n = max(2, int(math.ceil(length / spacing)) + 1)
        ts = np.linspace(0.0, length, n)
        if curvature == 0.0:
            ux, uy = math.cos(heading), math.sin(heading)
            for t in ts:
                emit(x + t * ux, y + t * uy, heading)
            x, y = x + length * ux, y + length * uy
        else:
            # center sits at signed radius 1/curvature along the left normal
            r = 1.0 / curvature
            cx = x - r * math.sin(heading)
            cy = y + r * math.cos(heading)
            vx, vy = x - cx, y - cy
            for t in ts:
                ang = curvature * t
                px = cx + vx * math.cos(ang) - vy * math.sin(ang)
                py = cy + vx * math.sin(ang) + vy * math.cos(ang)
                emit(px, py, heading + ang)
            sweep = curvature * length
            x = cx + vx * math.cos(sweep) - vy * math.sin(sweep)
            y = cy + vx * math.sin(sweep) + vy * math.cos(sweep)
            heading = heading + sweep
    return TrackOutline(
        centerline=np.asarray(pts),
        left_edge=np.asarray(lefts),
        right_edge=np.asarray(rights),
        width=width,
        car_width=float(tr["car_width"]),
    )
