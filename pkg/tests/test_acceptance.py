"""Acceptance suite: one test per acceptance criterion, stated tolerances.

Each test prints a single PASS/FAIL line (run with -s to see them inline;
pytest captures them otherwise). The batch-driven criteria consume a
deterministic desk-scale batch (straightaway, 50 sampled episodes per
cell) produced by the package's own CLI; set TRACKDUEL_ACCEPT_BATCH_DIR
to reuse a completed batch directory, otherwise the fixture builds one
under .acceptance_cache/ (slow: ~500 episodes).
"""

import itertools
import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from trackduel import dp
from trackduel.config import builtin_scenario
from trackduel.errors import DomainViolation
from trackduel.experiment import nominal_episode, run_episode
from trackduel.intention_game import SearchConfig, backward_induction, run_mcts
from trackduel.kinematics import ControlInput, KinematicsConfig, VehicleState, f_r, step
from trackduel.lattice import Lattice, LatticeParams
from trackduel.records import read_episode
from trackduel.rules import RulesConfig, RuleSet, enough_space_scan, one_motion_scan
from trackduel.trajectory_game import ATTACKER, DEFENDER, GameParams, iterate_best_response

from oracles import enumerate_paths, small_instance, tiny_track

KIN = KinematicsConfig(tau_s=0.4, wheelbase=2.5, v_max=12.0)


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# -- criterion 1: SPS oracle equivalence ----------------------------------

class TestSpsOracleEquivalence:
    def test_scan_matches_brute_force_on_10000_sequences(self):
        cfg = RulesConfig(1.8, 5.8, 1.5, RuleSet.BOTH)
        rng = np.random.default_rng(20260810)
        t0 = time.monotonic()
        mismatches = 0
        for _ in range(10_000):
            n = int(rng.integers(1, 16))
            flags = [bool(b) for b in rng.integers(0, 2, size=n)]
            v_att = tuple(float(x) for x in rng.uniform(8.0, 14.0, size=n))
            v_def = tuple(float(x) for x in rng.uniform(8.0, 14.0, size=n))
            e_att = tuple(float(x) for x in rng.uniform(-2.9, 2.9, size=n))
            om_brute = any(
                (not flags[a]) and flags[b] and (not flags[c]) and flags[d]
                for a, b, c, d in itertools.combinations(range(n), 4)
            )
            es_brute = any(
                (not flags[a])
                and (v_att[a] - v_def[a] > cfg.delta_v)
                and (0.5 * cfg.track_width - abs(e_att[a]) <= cfg.car_width)
                and flags[b]
                for a, b in itertools.combinations(range(n), 2)
            )
            if bool(one_motion_scan(flags)) != om_brute:
                mismatches += 1
            if bool(enough_space_scan(flags, v_att, v_def, e_att, cfg)) != es_brute:
                mismatches += 1
        elapsed = time.monotonic() - t0
        report(
            "SPS oracle equivalence",
            mismatches == 0 and elapsed < 10.0,
            f"{mismatches} mismatches, {elapsed:.1f}s",
        )


# -- criterion 2: kinematics closed forms ---------------------------------

class TestKinematicsClosedForms:
    def test_closed_forms_and_domain(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(500):
            theta = float(rng.uniform(-math.pi, math.pi))
            v = float(rng.uniform(0.0, 12.0))
            n = int(rng.integers(1, 15))
            s = VehicleState(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)), theta, v)
            cur = s
            for _ in range(n):
                cur = step(KIN, cur, ControlInput(0.0, 0.0))
            worst = max(
                worst,
                abs(cur.px - (s.px + n * KIN.tau_s * v * math.cos(theta))),
                abs(cur.py - (s.py + n * KIN.tau_s * v * math.sin(theta))),
            )
        exact_fr = all(
            f_r(KIN, float(v), 0.0) == KIN.tau_s * float(v)
            for v in rng.uniform(0.0, 12.0, size=500)
        )
        domain_ok = True
        for v in rng.uniform(1.0, 12.0, size=200):
            v = float(v)
            edge = math.asin(min(1.0, KIN.wheelbase / (KIN.tau_s * v)))
            if KIN.tau_s * v >= KIN.wheelbase:
                try:
                    step(KIN, VehicleState(0, 0, 0, v), ControlInput(0.0, edge))
                except DomainViolation:
                    domain_ok = False
                try:
                    step(KIN, VehicleState(0, 0, 0, v), ControlInput(0.0, edge + 1e-5))
                    domain_ok = False
                except DomainViolation:
                    pass
        report(
            "kinematics closed forms",
            worst < 1e-12 and exact_fr and domain_ok,
            f"max straight-line error {worst:.2e}",
        )


# -- criterion 3: DP optimality --------------------------------------------

class TestDpOptimality:
    def test_dp_equals_enumeration_on_100_instances(self):
        rng = np.random.default_rng(42)
        t0 = time.monotonic()
        checked = 0
        exact = True
        while checked < 100:
            lat, estar, opp = small_instance(rng, "straight" if checked % 3 else "arc")
            oracle_cost, oracle_paths = enumerate_paths(lat, estar, opp)
            path, fell_back = lat.best_response(estar, opp)
            if oracle_cost is None or not oracle_paths:
                continue
            if fell_back:
                exact = False
                break
            got = lat.path_objective(path, estar)
            if got != oracle_cost or list(path.nodes) not in oracle_paths:
                exact = False
                break
            checked += 1
        elapsed = time.monotonic() - t0
        report(
            "DP optimality vs enumeration",
            exact and checked == 100 and elapsed < 30.0,
            f"{checked} instances, {elapsed:.1f}s",
        )


# -- criterion 4: GNE certificate ------------------------------------------

class TestGneCertificate:
    def test_no_unilateral_improvement_on_20_converged_instances(self):
        rng = np.random.default_rng(2024)
        track = tiny_track("straight")
        checked = 0
        ok = True
        while checked < 20:
            T = int(rng.integers(3, 5))
            game = GameParams(rounds=1, horizon=T, ibr_max_iters=20, follower_lag=0)
            v_a = float(rng.uniform(1.8, 2.9))
            v_d = float(rng.uniform(1.6, v_a))
            kins = {
                ATTACKER: KinematicsConfig(0.4, 2.5, v_a),
                DEFENDER: KinematicsConfig(0.4, 2.5, v_d),
            }
            xa = float(rng.uniform(0.5, 1.5))
            starts = {
                ATTACKER: VehicleState(xa, float(rng.uniform(-0.2, 0.2)), 0.0, v_a),
                DEFENDER: VehicleState(
                    xa + float(rng.uniform(0.9, 1.8)),
                    float(rng.uniform(-0.2, 0.2)), 0.0, v_d,
                ),
            }
            params = LatticeParams(
                horizon=T, gamma_max=0.5,
                d_safe=float(rng.uniform(0.3, 0.7)), safety_margin=0.0,
            )
            lattices = {
                p: Lattice(track, kins[p], starts[p], params)
                for p in (ATTACKER, DEFENDER)
            }
            profiles = {
                ATTACKER: np.full(T, float(rng.choice([-0.2, 0.0, 0.2]))),
                DEFENDER: np.full(T, float(rng.choice([-0.2, 0.0, 0.2]))),
            }
            paths, converged, _, fell_back = iterate_best_response(
                lattices, profiles, game
            )
            if not converged or fell_back:
                continue
            for player in (ATTACKER, DEFENDER):
                rival = DEFENDER if player == ATTACKER else ATTACKER
                mine = lattices[player].path_objective(paths[player], profiles[player])
                best, _ = enumerate_paths(
                    lattices[player], profiles[player], paths[rival].xy
                )
                if best is None or best < mine - 1e-9:
                    ok = False
            checked += 1
        report("GNE certificate", ok and checked == 20, f"{checked} converged instances")


# -- criterion 5: MCTS vs backward induction -------------------------------

class TestMctsVsBackwardInduction:
    def test_root_actions_match_on_50_random_games(self):
        cfg = SearchConfig(
            exploration=12.0, rounds=3, action_set=(-1.0, 1.0), iterations=5000
        )
        rng = np.random.default_rng(4242)
        matches = 0
        for i in range(50):
            leaves = {}

            def fill(h):
                if len(h) == cfg.depth:
                    u = float(rng.uniform(-10.0, 10.0))
                    leaves[h] = (u, -u)
                    return
                for a in cfg.action_set:
                    fill(h + (a,))

            fill(())
            tree = run_mcts(cfg, lambda h: leaves[tuple(h)], random.Random(1000 + i))
            policy, _ = backward_induction(cfg, lambda h: leaves[tuple(h)])
            matches += tree.policy(()) == policy[()]
        report("MCTS vs backward induction", matches >= 48, f"{matches}/50 matched")


# -- criteria 6-8: batch-driven checks --------------------------------------

CELLS_OM = [("OM", s) for s in (1, 2, 3, 4)] + [("OM_and_ES", s) for s in (1, 2, 3, 4)]
CELLS_ES = [("ES", 1), ("ES", 4)]


@pytest.fixture(scope="session")
def desk_batch(tmp_path_factory):
    env = os.environ.get("TRACKDUEL_ACCEPT_BATCH_DIR")
    if env:
        dirs = [Path(p) for p in env.split(os.pathsep)]
        for d in dirs:
            assert d.is_dir(), f"TRACKDUEL_ACCEPT_BATCH_DIR: {d} not a directory"
        return dirs
    cache = Path(__file__).resolve().parent.parent / ".acceptance_cache"
    done = cache / "done.marker"
    if not done.exists():
        cache.mkdir(exist_ok=True)
        for cases, settings, sub in (
            (["OM", "OM_and_ES"], ["1", "2", "3", "4"], "om"),
            (["ES"], ["1", "4"], "es"),
        ):
            subprocess.run(
                [
                    sys.executable, "-m", "trackduel.cli", "batch",
                    "--outdir", str(cache / sub),
                    "--episodes", "50", "--scenarios", "straightaway",
                    "--cases", *cases, "--settings", *settings, "--seed", "0",
                ],
                check=True,
            )
        done.write_text("ok")
    return [cache / "om", cache / "es"]


def load_cells(dirs):
    cells = {}
    for d in dirs:
        for f in sorted(Path(d).glob("straightaway_*.csv")):
            rec = read_episode(f)
            key = (rec.meta["case"], rec.meta["setting"])
            cells.setdefault(key, []).append(rec)
    return cells


class TestTableSignStructure:
    def test_desk_scale_signs_and_rates(self, desk_batch):
        cells = load_cells(desk_batch)
        msgs, ok = [], True
        for case in ("OM", "OM_and_ES"):
            for setting, want in ((1, "neg"), (2, "pos"), (3, "neg")):
                recs = cells.get((case, setting), [])
                assert len(recs) == 50, f"{case}/s{setting}: {len(recs)} episodes"
                dx = float(np.mean([r.meta["delta_x"] for r in recs]))
                good = dx > 0 if want == "pos" else dx < 0
                ok &= good
                msgs.append(f"{case}/s{setting} dx={dx:+.2f}")
            for setting in (2, 4):
                recs = cells.get((case, setting), [])
                rate = float(np.mean([r.meta["violation"] for r in recs]))
                ok &= rate == 0.0
                msgs.append(f"{case}/s{setting} rate={rate:.2f}")
        om3 = cells[("OM", 3)]
        rate3 = float(np.mean([r.meta["violation"] for r in om3]))
        ok &= rate3 > 0.5
        msgs.append(f"OM/s3 rate={rate3:.2f}")
        report("Table sign structure", ok, "; ".join(msgs))

    def test_single_episode_under_30s(self):
        sc = builtin_scenario("straightaway")
        t0 = time.monotonic()
        run_episode(sc, nominal_episode(sc, "OM", 2, seed=0))
        elapsed = time.monotonic() - t0
        report("single episode < 30 s", elapsed < 30.0, f"{elapsed:.1f}s")

    def test_batch_wall_time_supports_two_hour_bound(self, desk_batch):
        # episodes are independent; the full 1200-episode grid on an
        # 8-worker desktop takes mean_episode_time * 1200 / 8
        logs = []
        for d in desk_batch:
            for f in Path(d).glob("straightaway_*.csv"):
                logs.append(f.stat().st_size)  # existence check only
        sc = builtin_scenario("straightaway")
        t0 = time.monotonic()
        run_episode(sc, nominal_episode(sc, "OM", 1, seed=1))
        per_episode = time.monotonic() - t0
        projected = per_episode * 1200 / 8
        report(
            "full batch < 2 h (8-worker projection)",
            projected < 7200.0,
            f"{per_episode:.1f}s/episode -> {projected / 60:.0f} min",
        )


class TestEnoughSpaceAsymmetry:
    def test_es_setting4_strictly_beats_setting1_and_om_indistinguishable(
        self, desk_batch
    ):
        cells = load_cells(desk_batch)
        es1 = [r.meta["delta_x"] for r in cells[("ES", 1)]]
        es4 = [r.meta["delta_x"] for r in cells[("ES", 4)]]
        om1 = [r.meta["delta_x"] for r in cells[("OM", 1)]]
        om4 = [r.meta["delta_x"] for r in cells[("OM", 4)]]
        strict = float(np.mean(es4)) > float(np.mean(es1))

        # paired permutation test on the OM setting-1 vs setting-4 deltas
        diffs = np.asarray(om4) - np.asarray(om1)
        rng = np.random.default_rng(0)
        obs = abs(float(np.mean(diffs)))
        perms = np.mean(
            diffs * rng.choice([-1.0, 1.0], size=(10000, len(diffs))), axis=1
        )
        p = float(np.mean(np.abs(perms) >= obs))
        report(
            "enough-space asymmetry",
            strict and p > 0.05,
            f"ES dx s4={np.mean(es4):+.2f} vs s1={np.mean(es1):+.2f}; "
            f"OM s4-s1 mean diff {np.mean(diffs):+.3f}, p={p:.3f}",
        )


class TestSafety:
    def test_every_exported_episode_keeps_safety_distance(self, desk_batch):
        worst = math.inf
        count = 0
        for d in desk_batch:
            for f in sorted(Path(d).glob("straightaway_*.csv")):
                rec = read_episode(f)
                by_tau = {}
                for row in rec.rows:
                    by_tau.setdefault(row["tau"], {})[row["player"]] = row
                for tau, players in by_tau.items():
                    a, dd = players["A"], players["D"]
                    dist = math.hypot(a["px"] - dd["px"], a["py"] - dd["py"])
                    worst = min(worst, dist)
                count += 1
        report(
            "safety distance over batch",
            worst >= 1.8 and count > 0,
            f"{count} episodes, min distance {worst:.3f} m",
        )
