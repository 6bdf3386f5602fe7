"""Coupled two-car trajectory game conditioned on an intention history.

For a complete history the two lateral strategy profiles are fixed; the
equilibrium pair of paths is found by iterative best response on the
lattice (attacker responds first, both seeded with their declared
intention lines), then each lattice path is converted into an exactly
feasible vehicle trajectory by the tracking stage, and the utilities are
evaluated on the tracked trajectories:

    u_A = beta*prog(A) - prog(D) - 0.1 * (attacker intention changes)
    u_D = beta*prog(D) - prog(A) - omega * [defender violates the rules]

The rule penalty enters only for players listed in ``penalized`` (that is
how the knowledge settings are realized); the equilibrium paths themselves
never depend on it, so one solve per history serves every setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteHistory, TrackingFailure
from .kinematics import (
    ControlInput,
    KinematicsConfig,
    VehicleState,
    speed_for_segment,
    steer_for_heading_change,
    step_with_flags,
)
from .lattice import Lattice, LatticeParams, PlannedPath
from .rules import FrenetTrajectory, RulesConfig, Violation, sportsmanship_violation
from .track import Track, wrap_angle

ATTACKER = "A"
DEFENDER = "D"

TRACKING_BOUND = 0.2  # max per-step deviation from the lattice waypoints, m


@dataclass(frozen=True)
class GameParams:
    rounds: int                  # M
    horizon: int                 # T, divisible by M
    beta: float = 1.1
    omega: float = 15.0
    reg_coef: float = 0.1
    ibr_max_iters: int = 20
    ibr_tolerance: float = 1e-9  # max waypoint movement counting as converged
    leader: str = ATTACKER
    follower_lag: int = 3        # reaction delay of the follower's revisions, steps
    action_set: tuple[float, ...] = (-1.0, 1.0)

    def __post_init__(self) -> None:
        if self.horizon % self.rounds != 0:
            raise ValueError("horizon must be divisible by the number of rounds")
        if self.leader not in (ATTACKER, DEFENDER):
            raise ValueError("leader must be 'A' or 'D'")

    @property
    def steps_per_round(self) -> int:
        return self.horizon // self.rounds


def player_actions(history: list[float], player: str, game: GameParams) -> list[float]:
    """The per-round action sequence of one player inside a complete history."""
    if len(history) != 2 * game.rounds:
        raise IncompleteHistory(
            f"history has {len(history)} actions, need {2 * game.rounds}"
        )
    first = game.leader
    offset = 0 if player == first else 1
    return [history[2 * r + offset] for r in range(game.rounds)]


def strategy_profile(
    history: list[float],
    player: str,
    game: GameParams,
    lag: int | None = None,
    initial_e: float = 0.0,
    leader_initial_e: float | None = None,
) -> np.ndarray:
    """Per-step lateral target e*(tau), tau = 0..T-1, for one player.

    The round-r action is the constant target on [r*T/M, (r+1)*T/M). A
    follower window is delayed by ``lag`` steps whenever the leader
    REVISED its play that round (a lane different from its previous round,
    or, in round 1, from its starting lane): revisions must be observed
    through the leader's motion before they can be answered, while a
    leader that keeps doing what its position already announced can be
    answered on time. Before its first window the follower holds
    ``initial_e`` (its starting lane).
    """
    actions = player_actions(history, player, game)
    spr = game.steps_per_round
    if lag is None:
        lag = 0 if player == game.leader else game.follower_lag
    if lag == 0:
        offsets = [0] * game.rounds
    else:
        leader_acts = player_actions(history, game.leader, game)
        if leader_initial_e is None:
            prev = leader_acts[0]
        else:
            prev = min(game.action_set, key=lambda a: abs(a - leader_initial_e))
        offsets = []
        for act in leader_acts:
            offsets.append(lag if act != prev else 0)
            prev = act
    estar = np.full(game.horizon, initial_e, dtype=float)
    for r in range(game.rounds):
        estar[min(r * spr + offsets[r], game.horizon):] = actions[r]
    return estar


@dataclass
class TrackedTrajectory:
    states: list[VehicleState]
    frenet: FrenetTrajectory
    max_deviation: float
    clamped: bool


@dataclass
class GneResult:
    """Equilibrium outcome for one complete history."""

    paths: dict[str, PlannedPath]
    tracked: dict[str, TrackedTrajectory]
    converged: bool
    iterations: int
    used_fallback: bool
    tracking_ok: bool
    min_distance: float
    progress: dict[str, float] = field(default_factory=dict)
    violation: Violation | None = None


def iterate_best_response(
    lattices: dict[str, Lattice],
    profiles: dict[str, np.ndarray],
    game: GameParams,
    cache: dict | None = None,
) -> tuple[dict[str, PlannedPath], bool, int, bool]:
    """Alternate exact best responses until neither path moves.

    Returns (paths, converged, iterations, used_fallback). ``cache`` may be
    shared across calls within an episode; entries are keyed by the
    responder, its profile and the opponent path bytes.
    """
    paths = {p: lattices[p].seed_path(profiles[p]) for p in (ATTACKER, DEFENDER)}
    order = (ATTACKER, DEFENDER)  # attacker responds first
    used_fallback = False
    for iteration in range(1, game.ibr_max_iters + 1):
        moved = 0.0
        for player in order:
            rival = DEFENDER if player == ATTACKER else ATTACKER
            key = None
            if cache is not None:
                key = (player, profiles[player].tobytes(), paths[rival].key())
                hit = cache.get(key)
            else:
                hit = None
            if hit is None:
                hit = lattices[player].best_response(
                    profiles[player], paths[rival].xy
                )
                if cache is not None:
                    cache[key] = hit
            new_path, fell_back = hit
            used_fallback = used_fallback or fell_back
            moved = max(moved, float(np.max(np.abs(new_path.xy - paths[player].xy))))
            paths[player] = new_path
        if moved <= game.ibr_tolerance:
            return paths, True, iteration, used_fallback
    return paths, False, game.ibr_max_iters, used_fallback


def track_lattice_path(
    kin: KinematicsConfig,
    path: PlannedPath,
    start: VehicleState,
    strict: bool = False,
) -> TrackedTrajectory:
    """Follow the waypoints with exact model steps (one-step lookahead).

    The speed for segment tau is committed at step tau-1 from the closed
    form of the step-length map, and the steering at step tau aligns the
    next heading with the next segment: on the lattice's reachable set the
    reproduction is exact to rounding. Deviations appear only where the
    steering cap or speed cap saturates; beyond TRACKING_BOUND they raise
    (strict) or are reported via max_deviation.
    """
    w = path.xy
    T = len(w) - 1
    seg = np.diff(w, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(lengths > kin.v_max * kin.tau_s + 0.05):
        raise TrackingFailure("waypoint spacing exceeds one-step reach")
    headings = np.empty(T)
    prev = start.theta
    for t in range(T):
        if lengths[t] > 1e-12:
            prev = math.atan2(seg[t, 1], seg[t, 0])
        headings[t] = prev

    states = [start]
    cur = start
    clamped_any = False
    max_dev = 0.0
    for t in range(T):
        # steering: align the post-step heading with the next segment
        target_heading = headings[t + 1] if t + 1 < T else headings[t]
        steer = steer_for_heading_change(
            kin, cur.v, wrap_angle(target_heading - cur.theta)
        )
        # acceleration: set the speed the NEXT segment needs
        if t + 1 < T:
            dth_next = wrap_angle(
                (headings[t + 2] if t + 2 < T else headings[t + 1]) - headings[t + 1]
            )
            v_need = min(speed_for_segment(kin, lengths[t + 1], dth_next), kin.v_max)
            accel = (v_need - cur.v) / kin.tau_s
        else:
            accel = 0.0
        cur, clamped = step_with_flags(kin, cur, ControlInput(accel, steer))
        clamped_any = clamped_any or clamped
        states.append(cur)
        dev = math.hypot(cur.px - w[t + 1, 0], cur.py - w[t + 1, 1])
        max_dev = max(max_dev, dev)
    if strict and max_dev > TRACKING_BOUND:
        raise TrackingFailure(f"tracked path deviates {max_dev:.3f} m from waypoints")
    return TrackedTrajectory(
        states=states,
        frenet=FrenetTrajectory((), (), ()),  # filled by the caller with the track
        max_deviation=max_dev,
        clamped=clamped_any,
    )


def frenet_of_states(track: Track, states: list[VehicleState]) -> FrenetTrajectory:
    d, e, v = [], [], []
    for s in states:
        f = track.to_frenet(s.px, s.py)
        d.append(f.d)
        e.append(f.e)
        v.append(s.v)
    return FrenetTrajectory(tuple(d), tuple(e), tuple(v))


def regularization(history: list[float], game: GameParams) -> float:
    """0.1 per consecutive-round change in the attacker's action sequence."""
    acts = player_actions(history, ATTACKER, game)
    changes = sum(1 for a, b in zip(acts, acts[1:]) if a != b)
    return game.reg_coef * changes


def utilities(
    traj_att: FrenetTrajectory,
    traj_def: FrenetTrajectory,
    history: list[float],
    game: GameParams,
    rules_cfg: RulesConfig,
    penalized: frozenset[str],
    violation: Violation | None = None,
) -> tuple[float, float]:
    """Leading-progress utilities with the optional defender rule penalty."""
    prog_a = traj_att.d[-1] - traj_att.d[0]
    prog_d = traj_def.d[-1] - traj_def.d[0]
    u_a = game.beta * prog_a - prog_d - regularization(history, game)
    u_d = game.beta * prog_d - prog_a
    if DEFENDER in penalized:
        if violation is None:
            violation = sportsmanship_violation(traj_def, traj_att, rules_cfg)
        if violation.violated:
            u_d -= game.omega
    return u_a, u_d


class TrajectoryGameSolver:
    """Per-episode solver: history -> equilibrium trajectories, memoized."""

    def __init__(
        self,
        track: Track,
        kins: dict[str, KinematicsConfig],
        starts: dict[str, VehicleState],
        game: GameParams,
        lat_params: LatticeParams,
        rules_cfg: RulesConfig,
    ) -> None:
        self.track = track
        self.kins = kins
        self.starts = starts
        self.game = game
        self.rules_cfg = rules_cfg
        self.lattices = {
            p: Lattice(track, kins[p], starts[p], lat_params)
            for p in (ATTACKER, DEFENDER)
        }
        self._gne_cache: dict[tuple, GneResult] = {}
        self._br_cache: dict = {}
        self.solve_count = 0

    def solve(self, history: list[float]) -> GneResult:
        key = tuple(history)
        hit = self._gne_cache.get(key)
        if hit is not None:
            return hit
        self.solve_count += 1
        leader_e0 = self.track.to_frenet(
            self.starts[self.game.leader].px, self.starts[self.game.leader].py
        ).e
        profiles = {
            p: strategy_profile(
                history,
                p,
                self.game,
                initial_e=self.track.to_frenet(self.starts[p].px, self.starts[p].py).e,
                leader_initial_e=leader_e0,
            )
            for p in (ATTACKER, DEFENDER)
        }
        paths, converged, iters, fell_back = iterate_best_response(
            self.lattices, profiles, self.game, cache=self._br_cache
        )
        tracked: dict[str, TrackedTrajectory] = {}
        tracking_ok = True
        for p in (ATTACKER, DEFENDER):
            tt = track_lattice_path(self.kins[p], paths[p], self.starts[p])
            tt.frenet = frenet_of_states(self.track, tt.states)
            tracking_ok = tracking_ok and tt.max_deviation <= TRACKING_BOUND
            tracked[p] = tt
        dists = [
            math.hypot(
                tracked[ATTACKER].states[t].px - tracked[DEFENDER].states[t].px,
                tracked[ATTACKER].states[t].py - tracked[DEFENDER].states[t].py,
            )
            for t in range(self.game.horizon + 1)
        ]
        violation = sportsmanship_violation(
            tracked[DEFENDER].frenet, tracked[ATTACKER].frenet, self.rules_cfg
        )
        result = GneResult(
            paths=paths,
            tracked=tracked,
            converged=converged,
            iterations=iters,
            used_fallback=fell_back,
            tracking_ok=tracking_ok,
            min_distance=min(dists),
            progress={
                p: tracked[p].frenet.d[-1] - tracked[p].frenet.d[0]
                for p in (ATTACKER, DEFENDER)
            },
            violation=violation,
        )
        self._gne_cache[key] = result
        return result

    def utility_fn(self, penalized: frozenset[str]):
        """History -> (u_A, u_D) closure for the intention game."""

        def fn(history: list[float]) -> tuple[float, float]:
            res = self.solve(history)
            return utilities(
                res.tracked[ATTACKER].frenet,
                res.tracked[DEFENDER].frenet,
                history,
                self.game,
                self.rules_cfg,
                penalized,
                violation=res.violation,
            )

        return fn
