"""Scenario and experiment configuration.

Everything an episode needs is a plain YAML document; the two shipped
scenario files carry the experiment defaults (exploration 30, penalty 15,
progress weight 1.1, safety distance 1.8 m, 3 rounds of 5 steps at 0.4 s,
heading cone 0.16 rad, lateral weight 100, track 5.8 m / car 1.8 m, speed
threshold 1.5 m/s). Command-line flags override individual fields.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import yaml

from .errors import ConfigError
from .kinematics import KinematicsConfig, VehicleState
from .lattice import LatticeParams
from .rules import RuleSet, RulesConfig
from .track import Track
from .trajectory_game import ATTACKER, DEFENDER, GameParams

SCENARIOS = ("straightaway", "corner")
SETTINGS = (1, 2, 3, 4)
CASES = {"OM": RuleSet.OM, "ES": RuleSet.ES, "OM_and_ES": RuleSet.BOTH}


@dataclass
class PlayerSpec:
    x: float
    y: float
    v: float
    v_max: float


@dataclass
class ScenarioConfig:
    """Parsed scenario: track geometry, game constants, nominal players."""

    name: str
    track: Track
    game: GameParams
    lattice: LatticeParams
    rules_base: dict
    kin_base: dict
    players: dict[str, PlayerSpec]
    exploration: float
    iterations: int
    raw: dict = field(repr=False, default_factory=dict)

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def rules(self, case: str) -> RulesConfig:
        if case not in CASES:
            raise ConfigError(f"episode.sps_case: unknown case {case!r}")
        return RulesConfig(active=CASES[case], **self.rules_base)

    def kinematics(self, player: str) -> KinematicsConfig:
        return KinematicsConfig(v_max=self.players[player].v_max, **self.kin_base)

    def start_state(self, player: str) -> VehicleState:
        spec = self.players[player]
        f = self.track.to_frenet(spec.x, spec.y)
        heading = self.track.tangent_angle(f.d)
        return VehicleState(px=spec.x, py=spec.y, theta=heading, v=spec.v)


def _need(mapping: dict, key: str, kind, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing field {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_scenario(doc: dict, name_hint: str = "") -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a mapping")
    name = doc.get("scenario", name_hint)
    if name not in SCENARIOS:
        raise ConfigError(f"scenario: expected one of {SCENARIOS}, got {name!r}")

    tr = _need(doc, "track", dict, "top level")
    width = _need(tr, "width", float, "track")
    car_width = _need(tr, "car_width", float, "track")
    start_pose = _need(tr, "start_pose", list, "track")
    if len(start_pose) != 3:
        raise ConfigError("track.start_pose: expected [x, y, heading]")
    pieces = []
    for i, seg in enumerate(_need(tr, "segments", list, "track")):
        where = f"track.segments[{i}]"
        kind = _need(seg, "type", str, where)
        if kind not in ("straight", "arc"):
            raise ConfigError(f"{where}.type: expected straight|arc, got {kind!r}")
        length = _need(seg, "length", float, where)
        curvature = _need(seg, "curvature", float, where) if kind == "arc" else 0.0
        pieces.append((kind, length, curvature))
    try:
        track = Track.from_chain(tuple(start_pose), pieces, width, car_width)
    except ValueError as exc:
        raise ConfigError(f"track: {exc}") from exc

    g = _need(doc, "game", dict, "top level")
    rounds = _need(g, "rounds", int, "game")
    horizon = _need(g, "horizon", int, "game")
    if horizon % rounds != 0:
        raise ConfigError("game.horizon: must be divisible by game.rounds")
    tau_s = _need(g, "tau_s", float, "game")
    game = GameParams(
        rounds=rounds,
        horizon=horizon,
        beta=_need(g, "beta", float, "game"),
        omega=_need(g, "omega", float, "game"),
        reg_coef=float(g.get("reg_coef", 0.1)),
        ibr_max_iters=int(g.get("ibr_max_iters", 20)),
        ibr_tolerance=float(g.get("ibr_tolerance", 1e-9)),
        leader=str(g.get("leader", ATTACKER)),
        follower_lag=int(g.get("follower_lag", 3)),
        action_set=tuple(float(a) for a in g.get("action_set", (-1.0, 1.0))),
    )
    lattice = LatticeParams(
        horizon=horizon,
        d_res=float(g.get("d_res", 0.2)),
        e_res=float(g.get("e_res", 0.2)),
        gamma_max=_need(g, "gamma_max", float, "game"),
        w1=_need(g, "w1", float, "game"),
        d_safe=_need(g, "d_safe", float, "game"),
        safety_margin=float(g.get("safety_margin", 0.15)),
    )
    rules_base = {
        "car_width": car_width,
        "track_width": width,
        "delta_v": _need(g, "delta_v", float, "game"),
    }
    kin_base = {
        "tau_s": tau_s,
        "wheelbase": _need(g, "wheelbase", float, "game"),
        "steer_cap": float(g.get("steer_cap", 0.6)),
    }

    players = {}
    pl = _need(doc, "players", dict, "top level")
    for key, alias in ((ATTACKER, "attacker"), (DEFENDER, "defender")):
        spec = _need(pl, alias, dict, "players")
        players[key] = PlayerSpec(
            x=_need(spec, "x", float, f"players.{alias}"),
            y=_need(spec, "y", float, f"players.{alias}"),
            v=_need(spec, "v", float, f"players.{alias}"),
            v_max=_need(spec, "v_max", float, f"players.{alias}"),
        )

    cfg = ScenarioConfig(
        name=name,
        track=track,
        game=game,
        lattice=lattice,
        rules_base=rules_base,
        kin_base=kin_base,
        players=players,
        exploration=_need(g, "exploration", float, "game"),
        iterations=int(g.get("iterations", 20000)),
        raw=doc,
    )
    _validate_scenario(cfg)
    return cfg


def _validate_scenario(cfg: ScenarioConfig) -> None:
    horizon_m = cfg.game.horizon * cfg.kin_base["tau_s"]
    for player, spec in cfg.players.items():
        f = cfg.track.to_frenet(spec.x, spec.y)
        if abs(f.e) > cfg.track.usable_half_width + 1e-9:
            raise ConfigError(f"players.{player}: starts off the usable track")
        needed = f.d + (spec.v_max + 1.0) * horizon_m
        if needed > cfg.track.total_length:
            raise ConfigError(
                f"players.{player}: track too short for the horizon "
                f"({needed:.1f} > {cfg.track.total_length:.1f} m)"
            )
        if spec.v > spec.v_max:
            raise ConfigError(f"players.{player}: v exceeds v_max")
    ax, ay = cfg.players[ATTACKER].x, cfg.players[ATTACKER].y
    dx, dy = cfg.players[DEFENDER].x, cfg.players[DEFENDER].y
    if math.hypot(ax - dx, ay - dy) <= cfg.lattice.d_safe:
        raise ConfigError("players: initial states closer than d_safe")


def load_scenario(source) -> ScenarioConfig:
    """Load from a path or a file-like object."""
    if hasattr(source, "read"):
        doc = yaml.safe_load(source.read())
        return parse_scenario(doc)
    with open(source, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{source}: {exc}") from exc
    return parse_scenario(doc, name_hint="")


def builtin_scenario(name: str) -> ScenarioConfig:
    """One of the two shipped scenario files."""
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; have {SCENARIOS}")
    ref = resources.files("trackduel.configs").joinpath(f"{name}.yaml")
    with ref.open("r") as fh:
        doc = yaml.safe_load(fh)
    return parse_scenario(doc, name_hint=name)
