"""Reader for the trackduel trajectory text format.

The format is the interface between the simulator and this package:
``# key: value`` metadata lines, then a CSV table with one row per
(timestep, player). This parser is deliberately independent of the
simulator package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

_INT_KEYS = {"setting", "seed", "horizon"}
_FLOAT_KEYS = {"delta_x", "u_A", "u_D", "min_distance"}
_BOOL_KEYS = {"violation", "converged", "tracking_ok"}
_LIST_KEYS = {"witness", "frames"}

REQUIRED_COLUMNS = ("tau", "player", "px", "py", "theta", "v", "d", "e", "block")


class ParseError(ValueError):
    pass


@dataclass
class Episode:
    path: str
    meta: dict = field(default_factory=dict)
    players: dict = field(default_factory=dict)  # id -> list of row dicts

    @property
    def horizon(self) -> int:
        return max(len(rows) for rows in self.players.values()) - 1

    def witness_steps(self) -> tuple[int, ...]:
        return tuple(self.meta.get("witness", ()))

    def violating_frames(self) -> list[int]:
        return list(self.meta.get("frames", []))


def _convert_meta(key: str, value: str):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _BOOL_KEYS:
        return value == "true"
    if key in _LIST_KEYS:
        return [int(x) for x in value.split(",")] if value else []
    return value


def read_episode(path) -> Episode:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise ParseError(f"{path}: empty file")
    ep = Episode(path=str(path))
    header: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if ":" in body:
                key, _, value = body.partition(":")
                try:
                    ep.meta[key.strip()] = _convert_meta(key.strip(), value.strip())
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: bad header value: {exc}")
            continue
        parts = line.split(",")
        if header is None:
            header = parts
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing column(s) {missing}")
            continue
        if len(parts) != len(header):
            raise ParseError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        row = dict(zip(header, parts))
        try:
            rec = {
                "tau": int(row["tau"]),
                "px": float(row["px"]),
                "py": float(row["py"]),
                "theta": float(row["theta"]),
                "v": float(row["v"]),
                "d": float(row["d"]),
                "e": float(row["e"]),
                "block": row["block"] == "1",
            }
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: malformed row: {exc}")
        ep.players.setdefault(row["player"], []).append(rec)
    if header is None or not ep.players:
        raise ParseError(f"{path}: no data rows")
    for rows in ep.players.values():
        rows.sort(key=lambda r: r["tau"])
    return ep
