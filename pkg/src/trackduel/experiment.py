"""Knowledge-setting experiments and batch aggregation.

Four settings control who is aware of the sportsmanship rules:

1. neither: one joint solve, no penalty anywhere.
2. both: one joint solve with the defender penalty active.
3. attacker only: stage 1 solves WITH the penalty and pins the attacker's
   policy; stage 2 re-solves the defender exactly (backward induction over
   the pinned tree) WITHOUT the penalty.
4. defender only: stage 1 solves WITHOUT the penalty, pins the attacker;
   stage 2 re-solves the defender WITH the penalty.

Violations are always evaluated post hoc on the executed trajectories,
whatever the setting.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .errors import SolverFailure
from .intention_game import (
    ExactPolicy,
    FixedPolicy,
    SearchConfig,
    backward_induction,
    run_mcts,
)
from .kinematics import KinematicsConfig, VehicleState
from .rules import Violation, block_flags
from .track import FrenetPose
from .trajectory_game import ATTACKER, DEFENDER, TrajectoryGameSolver

PLAYERS = (ATTACKER, DEFENDER)


@dataclass
class EpisodeConfig:
    """One episode: scenario cell plus concrete initial states."""

    scenario: str
    sps_case: str                      # OM | ES | OM_and_ES
    setting: int                       # 1..4
    seed: int
    starts: dict[str, tuple[float, float, float]]   # player -> (d, e, v)
    v_max: dict[str, float]

    def cell(self) -> tuple[str, str, int]:
        return (self.scenario, self.sps_case, self.setting)


@dataclass
class EpisodeResult:
    config: EpisodeConfig
    delta_x: float
    violation: Violation
    utilities: dict[str, float]
    realized_history: list[float]
    min_distance: float
    converged: bool
    tracking_ok: bool
    used_fallback: bool
    gnep_solves: int
    stage_info: dict = field(default_factory=dict)
    wall_time: float = 0.0
    states: dict = field(default_factory=dict)      # player -> list[VehicleState]
    frenet: dict = field(default_factory=dict)      # player -> FrenetTrajectory
    block_flags: list[bool] = field(default_factory=list)


def nominal_episode(
    scenario_cfg: ScenarioConfig, sps_case: str, setting: int, seed: int = 0
) -> EpisodeConfig:
    starts = {}
    v_max = {}
    for p in PLAYERS:
        spec = scenario_cfg.players[p]
        f = scenario_cfg.track.to_frenet(spec.x, spec.y)
        starts[p] = (f.d, f.e, spec.v)
        v_max[p] = spec.v_max
    return EpisodeConfig(
        scenario=scenario_cfg.name,
        sps_case=sps_case,
        setting=setting,
        seed=seed,
        starts=starts,
        v_max=v_max,
    )


def sample_initial_states(
    scenario_cfg: ScenarioConfig, count: int = 50, seed: int = 0
) -> list[EpisodeConfig]:
    """Randomly perturbed starts around the nominal states.

    Attacker trails the defender by U(2, 4) m of station; laterals are
    0.8-1.2 m in magnitude on opposite sides (bracketing the nominal +-1:
    near-center starts degenerate the binary lane intentions, and pairs
    that begin laterally overlapped hand the defender a free extra
    blocking motion since the one-motion pattern needs an unblocked
    prefix); speeds
    U(11.75, 12.25) vs U(9.75, 10.25) m/s with v_max pinned to the
    sampled speeds (the attacker can match the defender's lateral closure
    with its own dive room, so past a ~2.5 m/s speed gap no defense closes
    the gate before the attacker draws level; wider speed draws turn
    those episodes into foregone breakaways). Pairs violating the safety distance -- at the
    start OR after the forced first model step, whose landing no control
    can move -- are redrawn. Case/setting/seed fields are filled by the
    caller per cell.
    """
    rng = np.random.default_rng(seed)
    track = scenario_cfg.track
    tau_s = scenario_cfg.kin_base["tau_s"]
    margin = scenario_cfg.lattice.d_plan + 0.15  # forced-step clearance
    d_def = track.to_frenet(
        scenario_cfg.players[DEFENDER].x, scenario_cfg.players[DEFENDER].y
    ).d
    out = []
    while len(out) < count:
        deficit = float(rng.uniform(2.0, 4.0))
        side = 1.0 if rng.random() < 0.5 else -1.0
        e_att = side * float(rng.uniform(0.8, 1.2))
        e_def = -side * float(rng.uniform(0.8, 1.2))
        v_att = float(rng.uniform(11.75, 12.25))
        v_def = float(rng.uniform(9.75, 10.25))
        stations = np.array([d_def - deficit, d_def])
        laterals = np.array([e_att, e_def])
        pa = track.from_frenet_batch(stations, laterals)
        if math.hypot(pa[0, 0] - pa[1, 0], pa[0, 1] - pa[1, 1]) <= scenario_cfg.lattice.d_safe:
            continue
        # forced landings one step in (heading = track tangent)
        xi = track.tangent_angle_batch(stations)
        za = pa[0] + tau_s * v_att * np.array([math.cos(xi[0]), math.sin(xi[0])])
        zd = pa[1] + tau_s * v_def * np.array([math.cos(xi[1]), math.sin(xi[1])])
        if math.hypot(za[0] - zd[0], za[1] - zd[1]) <= margin:
            continue
        out.append(
            EpisodeConfig(
                scenario=scenario_cfg.name,
                sps_case="OM",
                setting=1,
                seed=0,
                starts={
                    ATTACKER: (d_def - deficit, e_att, v_att),
                    DEFENDER: (d_def, e_def, v_def),
                },
                v_max={ATTACKER: v_att, DEFENDER: v_def},
            )
        )
    return out


def realize_history(
    search: SearchConfig, policies: dict[str, object]
) -> list[float]:
    h: tuple[float, ...] = ()
    while len(h) < search.depth:
        mover = search.player_to_move(len(h))
        h = h + (policies[mover].policy(h),)
    return list(h)


def run_episode(scenario_cfg: ScenarioConfig, ep: EpisodeConfig) -> EpisodeResult:
    t0 = time.monotonic()
    track = scenario_cfg.track
    kins = {}
    starts = {}
    for p in PLAYERS:
        d, e, v = ep.starts[p]
        x, y, heading = track.from_frenet(FrenetPose(d, e))
        starts[p] = VehicleState(px=x, py=y, theta=heading, v=v)
        kins[p] = KinematicsConfig(v_max=ep.v_max[p], **scenario_cfg.kin_base)

    solver = TrajectoryGameSolver(
        track,
        kins,
        starts,
        scenario_cfg.game,
        scenario_cfg.lattice,
        scenario_cfg.rules(ep.sps_case),
    )
    search = SearchConfig(
        exploration=scenario_cfg.exploration,
        rounds=scenario_cfg.game.rounds,
        action_set=scenario_cfg.game.action_set,
        iterations=scenario_cfg.iterations,
        leader=scenario_cfg.game.leader,
    )

    none_aware = solver.utility_fn(frozenset())
    def_aware = solver.utility_fn(frozenset({DEFENDER}))
    rng = random.Random(ep.seed)
    stage_info: dict = {}

    if ep.setting == 1:
        tree = run_mcts(search, none_aware, rng)
        policies = {ATTACKER: tree, DEFENDER: tree}
        stage_info["stage1"] = {"root_visits": tree.root.visits}
    elif ep.setting == 2:
        tree = run_mcts(search, def_aware, rng)
        policies = {ATTACKER: tree, DEFENDER: tree}
        stage_info["stage1"] = {"root_visits": tree.root.visits}
    elif ep.setting in (3, 4):
        stage1_util = def_aware if ep.setting == 3 else none_aware
        stage2_util = none_aware if ep.setting == 3 else def_aware
        tree = run_mcts(search, stage1_util, rng)
        pinned = FixedPolicy(tree)
        table, root_v = backward_induction(
            search, stage2_util, forced={ATTACKER: pinned}
        )
        policies = {
            ATTACKER: pinned,
            DEFENDER: ExactPolicy(table, search, root_v),
        }
        stage_info["stage1"] = {"root_visits": tree.root.visits}
        stage_info["stage2"] = {"root_value": root_v}
    else:
        raise SolverFailure(f"unknown setting {ep.setting}")

    history = realize_history(search, policies)
    result = solver.solve(history)
    if result.min_distance < scenario_cfg.lattice.d_safe:
        raise SolverFailure(
            f"episode violates the safety distance ({result.min_distance:.3f} m)"
        )
    u_a, u_d = def_aware(history) if ep.setting in (2, 4) else none_aware(history)

    att = result.tracked[ATTACKER].frenet
    dfd = result.tracked[DEFENDER].frenet
    return EpisodeResult(
        config=ep,
        delta_x=att.d[-1] - dfd.d[-1],
        violation=result.violation,
        utilities={ATTACKER: u_a, DEFENDER: u_d},
        realized_history=history,
        min_distance=result.min_distance,
        converged=result.converged,
        tracking_ok=result.tracking_ok,
        used_fallback=result.used_fallback,
        gnep_solves=solver.solve_count,
        stage_info=stage_info,
        wall_time=time.monotonic() - t0,
        states={p: result.tracked[p].states for p in PLAYERS},
        frenet={p: result.tracked[p].frenet for p in PLAYERS},
        block_flags=block_flags(dfd, att, scenario_cfg.rules_base["car_width"]),
    )


@dataclass
class CellSummary:
    scenario: str
    sps_case: str
    setting: int
    episodes: int
    mean_delta_x: float
    violation_rate: float


def aggregate(results: list[EpisodeResult]) -> list[CellSummary]:
    """Per-cell mean leading distance and episode violation rate."""
    if not results:
        raise ValueError("no episode results to aggregate")
    cells: dict[tuple, list[EpisodeResult]] = {}
    for r in results:
        cells.setdefault(r.config.cell(), []).append(r)
    out = []
    for (scenario, case, setting), rs in sorted(cells.items()):
        out.append(
            CellSummary(
                scenario=scenario,
                sps_case=case,
                setting=setting,
                episodes=len(rs),
                mean_delta_x=float(np.mean([r.delta_x for r in rs])),
                violation_rate=float(
                    np.mean([1.0 if r.violation.violated else 0.0 for r in rs])
                ),
            )
        )
    return out
