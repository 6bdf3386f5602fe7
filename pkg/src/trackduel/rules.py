"""Sportsmanship rule detectors over trajectory pairs.

Both rules constrain the defender (the leading car). They are defined on
Frenet-frame trajectories sampled at the planner timestep:

* one-motion: the defender may take at most one lateral blocking move; a
  temporal subsequence (not-blocked, blocked, not-blocked, blocked) is a
  violation.
* enough-space: once a faster attacker runs near the track edge while
  unblocked, any later block by the defender is a violation.

Detectors are O(T) scans; tests check them against exhaustive
subsequence enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import LengthMismatch


class RuleSet(str, Enum):
    """Which rules are active; BOTH is the union of the two detectors."""

    OM = "OM"
    ES = "ES"
    BOTH = "OM_and_ES"


@dataclass(frozen=True)
class RulesConfig:
    car_width: float
    track_width: float
    delta_v: float
    active: RuleSet = RuleSet.BOTH

    def __post_init__(self) -> None:
        if self.delta_v <= 0:
            raise ValueError("delta_v must be positive")
        if not self.car_width < self.track_width:
            raise ValueError("car_width must be smaller than track_width")


@dataclass(frozen=True)
class FrenetTrajectory:
    """Per-timestep station, lateral offset and speed for one player."""

    d: tuple[float, ...]
    e: tuple[float, ...]
    v: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.d) == len(self.e) == len(self.v)):
            raise LengthMismatch("d, e, v must have equal lengths")

    def __len__(self) -> int:
        return len(self.d)


@dataclass
class Violation:
    """Detector outcome with diagnostics.

    ``witness`` holds the first (lexicographically minimal) timestep tuple
    completing the rule's pattern; ``frames`` all timesteps at which some
    witnessing tuple completes.
    """

    violated: bool
    rule: str = ""
    witness: tuple[int, ...] = ()
    frames: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.violated


def block(d_def: float, e_def: float, d_att: float, e_att: float, car_width: float) -> bool:
    """Defender strictly ahead in station and laterally within one car width."""
    return d_def > d_att and abs(e_def - e_att) <= car_width


def block_flags(
    traj_def: FrenetTrajectory, traj_att: FrenetTrajectory, car_width: float
) -> list[bool]:
    if len(traj_def) != len(traj_att):
        raise LengthMismatch(
            f"defender has {len(traj_def)} steps, attacker {len(traj_att)}"
        )
    return [
        block(traj_def.d[t], traj_def.e[t], traj_att.d[t], traj_att.e[t], car_width)
        for t in range(len(traj_def))
    ]


_OM_PATTERN = (False, True, False, True)


def one_motion_scan(flags: list[bool]) -> Violation:
    """Greedy subsequence match of (not-B, B, not-B, B) over block flags."""
    stage = 0
    witness: list[int] = []
    for t, b in enumerate(flags):
        if stage < 4 and b == _OM_PATTERN[stage]:
            witness.append(t)
            stage += 1
            if stage == 4:
                # every later blocked frame also completes the pattern
                frames = [t] + [u for u in range(t + 1, len(flags)) if flags[u]]
                return Violation(True, "one_motion", tuple(witness), frames)
    return Violation(False, "one_motion")


def violates_one_motion(
    traj_def: FrenetTrajectory, traj_att: FrenetTrajectory, cfg: RulesConfig
) -> Violation:
    return one_motion_scan(block_flags(traj_def, traj_att, cfg.car_width))


def enough_space_scan(
    flags: list[bool],
    v_att: tuple[float, ...],
    v_def: tuple[float, ...],
    e_att: tuple[float, ...],
    cfg: RulesConfig,
) -> Violation:
    """O(T) scan: first qualifying step arms the rule, any later block fires."""
    armed_at = -1
    for t, b in enumerate(flags):
        if armed_at >= 0 and b:
            frames = [u for u in range(t, len(flags)) if flags[u]]
            return Violation(True, "enough_space", (armed_at, t), frames)
        if (
            armed_at < 0
            and not b
            and (v_att[t] - v_def[t] > cfg.delta_v)
            and (0.5 * cfg.track_width - abs(e_att[t]) <= cfg.car_width)
        ):
            armed_at = t
    return Violation(False, "enough_space")


def violates_enough_space(
    traj_def: FrenetTrajectory, traj_att: FrenetTrajectory, cfg: RulesConfig
) -> Violation:
    flags = block_flags(traj_def, traj_att, cfg.car_width)
    return enough_space_scan(flags, traj_att.v, traj_def.v, traj_att.e, cfg)


def sportsmanship_violation(
    traj_def: FrenetTrajectory, traj_att: FrenetTrajectory, cfg: RulesConfig
) -> Violation:
    """Dispatch on the active rule set; BOTH is the logical OR."""
    if cfg.active is RuleSet.OM:
        return violates_one_motion(traj_def, traj_att, cfg)
    if cfg.active is RuleSet.ES:
        return violates_enough_space(traj_def, traj_att, cfg)
    om = violates_one_motion(traj_def, traj_att, cfg)
    es = violates_enough_space(traj_def, traj_att, cfg)
    if om.violated and es.violated:
        frames = sorted(set(om.frames) | set(es.frames))
        first = om if om.witness[-1] <= es.witness[-1] else es
        return Violation(True, "one_motion+enough_space", first.witness, frames)
    return om if om.violated else es if es.violated else Violation(False, "none")
