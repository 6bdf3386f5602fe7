"""Trajectory export files and run manifests.

Episodes are plain delimited text: ``# key: value`` header lines with the
episode metadata, then a CSV table with one row per (timestep, player).
Floats are written with repr precision so read(write(x)) round-trips
exactly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyInput
from .experiment import EpisodeResult
from .rules import FrenetTrajectory
from .trajectory_game import ATTACKER, DEFENDER

COLUMNS = ("tau", "player", "px", "py", "theta", "v", "d", "e", "block")

_HEADER_TYPES = {
    "scenario": str,
    "case": str,
    "setting": int,
    "seed": int,
    "delta_x": float,
    "violation": lambda s: s == "true",
    "violation_rule": str,
    "witness": lambda s: tuple(int(x) for x in s.split(",")) if s else (),
    "frames": lambda s: [int(x) for x in s.split(",")] if s else [],
    "u_A": float,
    "u_D": float,
    "min_distance": float,
    "converged": lambda s: s == "true",
    "tracking_ok": lambda s: s == "true",
    "history": lambda s: [float(x) for x in s.split(",")] if s else [],
    "horizon": int,
}


@dataclass
class EpisodeRecord:
    """Parsed episode file: metadata plus per-player state tables."""

    meta: dict
    rows: list[dict]

    def frenet(self, player: str) -> FrenetTrajectory:
        rows = [r for r in self.rows if r["player"] == player]
        rows.sort(key=lambda r: r["tau"])
        return FrenetTrajectory(
            tuple(r["d"] for r in rows),
            tuple(r["e"] for r in rows),
            tuple(r["v"] for r in rows),
        )

    def violation_flag(self) -> bool:
        return bool(self.meta.get("violation", False))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_episode(path, result: EpisodeResult) -> None:
    ep = result.config
    vio = result.violation
    lines = [
        "# trackduel-episode v1",
        f"# scenario: {ep.scenario}",
        f"# case: {ep.sps_case}",
        f"# setting: {ep.setting}",
        f"# seed: {ep.seed}",
        f"# horizon: {len(result.block_flags) - 1}",
        f"# delta_x: {result.delta_x!r}",
        f"# violation: {'true' if vio.violated else 'false'}",
        f"# violation_rule: {vio.rule}",
        f"# witness: {','.join(str(t) for t in vio.witness)}",
        f"# frames: {','.join(str(t) for t in vio.frames)}",
        f"# u_A: {result.utilities[ATTACKER]!r}",
        f"# u_D: {result.utilities[DEFENDER]!r}",
        f"# min_distance: {result.min_distance!r}",
        f"# converged: {'true' if result.converged else 'false'}",
        f"# tracking_ok: {'true' if result.tracking_ok else 'false'}",
        f"# history: {','.join(repr(a) for a in result.realized_history)}",
        ",".join(COLUMNS),
    ]
    for player in (ATTACKER, DEFENDER):
        states = result.states[player]
        fr = result.frenet[player]
        for tau, s in enumerate(states):
            lines.append(
                ",".join(
                    (
                        str(tau),
                        player,
                        repr(s.px),
                        repr(s.py),
                        repr(s.theta),
                        repr(s.v),
                        repr(fr.d[tau]),
                        repr(fr.e[tau]),
                        "1" if result.block_flags[tau] else "0",
                    )
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_episode(path) -> EpisodeRecord:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise EmptyInput(f"{path}: empty trajectory file")
    meta: dict = {}
    rows: list[dict] = []
    header_cols: list[str] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if ":" in body:
                key, _, value = body.partition(":")
                key, value = key.strip(), value.strip()
                conv = _HEADER_TYPES.get(key)
                if conv is not None:
                    try:
                        meta[key] = conv(value)
                    except ValueError as exc:
                        raise ValueError(f"{path}:{lineno}: bad header {key!r}: {exc}")
            continue
        parts = line.split(",")
        if header_cols is None:
            header_cols = parts
            missing = [c for c in COLUMNS if c not in header_cols]
            if missing:
                raise ValueError(f"{path}:{lineno}: missing column(s) {missing}")
            continue
        if len(parts) != len(header_cols):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header_cols)} fields, got {len(parts)}"
            )
        row = dict(zip(header_cols, parts))
        try:
            rows.append(
                {
                    "tau": int(row["tau"]),
                    "player": row["player"],
                    "px": float(row["px"]),
                    "py": float(row["py"]),
                    "theta": float(row["theta"]),
                    "v": float(row["v"]),
                    "d": float(row["d"]),
                    "e": float(row["e"]),
                    "block": row["block"] == "1",
                }
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row: {exc}")
    if header_cols is None or not rows:
        raise EmptyInput(f"{path}: no data rows")
    return EpisodeRecord(meta=meta, rows=rows)


@dataclass
class RunManifest:
    config_digest: str
    base_seed: int
    version: str
    episodes: list[str] = field(default_factory=list)
    created: str = ""

    def write(self, path) -> None:
        doc = {
            "config_digest": self.config_digest,
            "base_seed": self.base_seed,
            "version": self.version,
            "episodes": self.episodes,
            "created": self.created or time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> "RunManifest":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            config_digest=doc["config_digest"],
            base_seed=doc["base_seed"],
            version=doc["version"],
            episodes=list(doc["episodes"]),
            created=doc.get("created", ""),
        )
