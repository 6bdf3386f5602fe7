"""Static top-down figures for exported episodes.

One figure per episode: track edges, both cars' footprints at strided
timesteps fading with time (attacker blue, defender red), blocked frames
hatched, violation witness steps outlined. A contact-sheet renderer tiles
one thumbnail per seed for a whole batch cell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Polygon

from .geometry import TrackOutline, load_outline
from .records import Episode, ParseError, read_episode

PLAYER_COLORS = {"A": "#1f77b4", "D": "#d62728"}  # attacker blue, defender red
CAR_LENGTH = 3.2  # drawing length only; the simulator models car width


@dataclass
class PlotSpec:
    episode_path: str
    config_path: str
    output_path: str
    stride: int = 2
    show_blocks: bool = True
    show_witnesses: bool = True
    show_edges: bool = True
    dpi: int = 120

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def _car_polygon(px, py, theta, width) -> np.ndarray:
    ux, uy = math.cos(theta), math.sin(theta)
    nx, ny = -uy, ux
    hl, hw = 0.5 * CAR_LENGTH, 0.5 * width
    corners = []
    for sl, sw in ((1, 1), (1, -1), (-1, -1), (-1, 1)):
        corners.append((px + sl * hl * ux + sw * hw * nx, py + sl * hl * uy + sw * hw * ny))
    return np.asarray(corners)


def draw_episode(ax, episode: Episode, outline: TrackOutline, spec: PlotSpec) -> None:
    if spec.show_edges:
        for edge in (outline.left_edge, outline.right_edge):
            ax.plot(edge[:, 0], edge[:, 1], color="0.25", lw=1.2, zorder=1)
        ax.plot(
            outline.centerline[:, 0], outline.centerline[:, 1],
            color="0.7", lw=0.6, ls="--", zorder=1,
        )
    horizon = episode.horizon
    witness = set(episode.witness_steps()) if spec.show_witnesses else set()
    xs, ys = [], []
    for player, rows in sorted(episode.players.items()):
        color = PLAYER_COLORS.get(player, "0.4")
        for row in rows[:: spec.stride] + ([rows[-1]] if (len(rows) - 1) % spec.stride else []):
            tau = row["tau"]
            age = tau / max(horizon, 1)
            poly = _car_polygon(row["px"], row["py"], row["theta"], outline.car_width)
            xs.extend(poly[:, 0])
            ys.extend(poly[:, 1])
            hatched = spec.show_blocks and row["block"]
            ax.add_patch(
                Polygon(
                    poly,
                    closed=True,
                    facecolor=color,
                    edgecolor="black" if tau in witness else color,
                    linewidth=1.6 if tau in witness else 0.4,
                    alpha=0.15 + 0.75 * age,
                    hatch="////" if hatched else None,
                    zorder=3 if tau in witness else 2,
                )
            )
        path = np.asarray([(r["px"], r["py"]) for r in rows])
        ax.plot(path[:, 0], path[:, 1], color=color, lw=0.8, alpha=0.6, zorder=2)
    if xs:
        pad = 4.0
        ax.set_xlim(min(xs) - pad, max(xs) + pad)
        ax.set_ylim(min(ys) - pad, max(ys) + pad)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def render_episode(spec: PlotSpec) -> str:
    """Render one exported episode to an image file."""
    episode = read_episode(spec.episode_path)
    outline = load_outline(spec.config_path)
    fig, ax = plt.subplots(figsize=(10, 4.2))
    draw_episode(ax, episode, outline, spec)
    meta = episode.meta
    title = (
        f"{meta.get('scenario', '?')} / {meta.get('case', '?')} / "
        f"setting {meta.get('setting', '?')} / seed {meta.get('seed', '?')}   "
        f"lead {meta.get('delta_x', float('nan')):+.2f} m"
        + ("   VIOLATION" if meta.get("violation") else "")
    )
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)
    return spec.output_path


def render_grid(
    batch_dir, config_path, output_dir, stride: int = 3, columns: int = 5
) -> list[str]:
    """One contact sheet per (case, setting): tiled per-seed thumbnails.

    Unreadable episode files are skipped with a warning and listed in the
    returned summary.
    """
    batch_dir = Path(batch_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(batch_dir.glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no episode files in {batch_dir}")
    outline = load_outline(config_path)
    cells: dict[tuple, list[Episode]] = {}
    skipped: list[str] = []
    for f in files:
        try:
            ep = read_episode(f)
        except ParseError as exc:
            warnings.warn(f"skipping {f.name}: {exc}")
            skipped.append(str(f))
            continue
        key = (ep.meta.get("scenario", "?"), ep.meta.get("case", "?"), ep.meta.get("setting", 0))
        cells.setdefault(key, []).append(ep)

    written = []
    for (scenario, case, setting), eps in sorted(cells.items()):
        rows = int(math.ceil(len(eps) / columns))
        fig, axes = plt.subplots(
            rows, columns, figsize=(3.2 * columns, 1.6 * rows), squeeze=False
        )
        spec = PlotSpec(
            episode_path="", config_path="", output_path="", stride=stride
        )
        for ax in axes.flat:
            ax.set_axis_off()
        for ax, ep in zip(axes.flat, eps):
            draw_episode(ax, ep, outline, spec)
            ax.set_axis_off()
            ax.set_title(
                f"seed {ep.meta.get('seed', '?')}  {ep.meta.get('delta_x', 0.0):+.1f}"
                + (" V" if ep.meta.get("violation") else ""),
                fontsize=7,
            )
        name = output_dir / f"sheet_{scenario}_{case}_s{setting}.png"
        fig.suptitle(f"{scenario} / {case} / setting {setting}", fontsize=11)
        fig.savefig(name, dpi=100)
        plt.close(fig)
        written.append(str(name))
    if skipped:
        warnings.warn(f"{len(skipped)} unreadable episode file(s) skipped")
    return written


def figure_pixels(spec: PlotSpec) -> np.ndarray:
    """Rasterize without touching disk; used for reproducibility checks."""
    episode = read_episode(spec.episode_path)
    outline = load_outline(spec.config_path)
    fig, ax = plt.subplots(figsize=(10, 4.2))
    draw_episode(ax, episode, outline, spec)
    fig.tight_layout()
    fig.canvas.draw()
    buf = np.asarray(fig.canvas.buffer_rgba()).copy()
    plt.close(fig)
    return buf
