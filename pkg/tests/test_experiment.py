import numpy as np
import pytest

from trackduel.config import builtin_scenario
from trackduel.experiment import (
    CellSummary,
    aggregate,
    nominal_episode,
    run_episode,
    sample_initial_states,
)
from trackduel.intention_game import ExactPolicy, FixedPolicy, SearchConfig, backward_induction, run_mcts
from trackduel.trajectory_game import ATTACKER, DEFENDER


@pytest.fixture(scope="module")
def straightaway():
    sc = builtin_scenario("straightaway")
    sc.iterations = 8000  # module-test budget; acceptance runs the default
    return sc


class TestSampling:
    def test_same_seed_identical_configs(self, straightaway):
        a = sample_initial_states(straightaway, count=50, seed=11)
        b = sample_initial_states(straightaway, count=50, seed=11)
        assert [e.starts for e in a] == [e.starts for e in b]
        assert [e.v_max for e in a] == [e.v_max for e in b]

    def test_attacker_always_faster(self, straightaway):
        eps = sample_initial_states(straightaway, count=50, seed=3)
        for e in eps:
            assert e.v_max[ATTACKER] > e.v_max[DEFENDER]

    def test_all_starts_collision_free_and_in_ranges(self, straightaway):
        eps = sample_initial_states(straightaway, count=50, seed=4)
        track = straightaway.track
        for e in eps:
            da, ea, va = e.starts[ATTACKER]
            dd, ed, vd = e.starts[DEFENDER]
            assert 2.0 <= dd - da <= 4.0
            assert 0.8 <= abs(ea) <= 1.2 and 0.8 <= abs(ed) <= 1.2
            assert (ea > 0) != (ed > 0)
            assert 11.75 <= va <= 12.25 and 9.75 <= vd <= 10.25
            pa = track.from_frenet_batch(np.array([da, dd]), np.array([ea, ed]))
            dist = float(np.hypot(*(pa[0] - pa[1])))
            assert dist > straightaway.lattice.d_safe


class TestAggregate:
    def _result(self, dx, violated, case="OM", setting=1):
        class Dummy:
            pass

        r = Dummy()
        r.config = Dummy()
        r.config.cell = lambda: ("straightaway", case, setting)
        r.delta_x = dx
        r.violation = Dummy()
        r.violation.violated = violated
        return r

    def test_mean_and_rate(self):
        rows = aggregate([self._result(2.0, False), self._result(4.0, True)])
        assert rows[0].mean_delta_x == pytest.approx(3.0)
        assert rows[0].violation_rate == pytest.approx(0.5)

    def test_quarter_rate(self):
        rows = aggregate(
            [self._result(1.0, True)] + [self._result(1.0, False)] * 3
        )
        assert rows[0].violation_rate == pytest.approx(0.25)

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            aggregate([])


class TestEpisodes:
    def test_nominal_setting2_attacker_overtakes(self, straightaway):
        # the headline result: with both players aware of the one-motion
        # rule, the defender stops blocking after one move and the faster
        # attacker gets past (paper reports +4.27 on this cell)
        res = run_episode(straightaway, nominal_episode(straightaway, "OM", 2, seed=0))
        assert res.delta_x > 0.0
        assert not res.violation.violated

    def test_nominal_setting1_attacker_contained(self, straightaway):
        res = run_episode(straightaway, nominal_episode(straightaway, "OM", 1, seed=0))
        assert res.delta_x < 0.0

    def test_settings_2_and_4_never_violate(self, straightaway):
        for setting in (2, 4):
            res = run_episode(
                straightaway, nominal_episode(straightaway, "OM", setting, seed=0)
            )
            assert not res.violation.violated

    def test_violation_flag_recomputable_from_trajectories(self, straightaway):
        from trackduel.rules import sportsmanship_violation

        res = run_episode(straightaway, nominal_episode(straightaway, "OM", 3, seed=0))
        again = sportsmanship_violation(
            res.frenet[DEFENDER], res.frenet[ATTACKER], straightaway.rules("OM")
        )
        assert again.violated == res.violation.violated
        assert again.witness == res.violation.witness

    def test_safety_and_consistency_invariants(self, straightaway):
        res = run_episode(straightaway, nominal_episode(straightaway, "OM", 3, seed=1))
        assert res.min_distance >= straightaway.lattice.d_safe
        assert len(res.block_flags) == straightaway.game.horizon + 1

    def test_setting3_stage2_matches_setting1_defender_when_policy_coincides(
        self, straightaway
    ):
        # feed the setting-1 attacker policy through the stage-2 exact
        # defender solve without the penalty: the realized history must
        # reproduce the setting-1 outcome
        from trackduel.config import ScenarioConfig
        from trackduel.experiment import realize_history
        from trackduel.kinematics import KinematicsConfig, VehicleState
        from trackduel.track import FrenetPose
        from trackduel.trajectory_game import TrajectoryGameSolver
        import random

        sc = straightaway
        ep = nominal_episode(sc, "OM", 1, seed=0)
        kins, starts = {}, {}
        for p in (ATTACKER, DEFENDER):
            d, e, v = ep.starts[p]
            x, y, heading = sc.track.from_frenet(FrenetPose(d, e))
            starts[p] = VehicleState(x, y, heading, v)
            kins[p] = KinematicsConfig(v_max=ep.v_max[p], **sc.kin_base)
        solver = TrajectoryGameSolver(
            sc.track, kins, starts, sc.game, sc.lattice, sc.rules("OM")
        )
        util = solver.utility_fn(frozenset())
        search = SearchConfig(
            exploration=sc.exploration,
            rounds=sc.game.rounds,
            action_set=(-1.0, 1.0),
            iterations=sc.iterations,
        )
        tree = run_mcts(search, util, random.Random(0))
        h1 = realize_history(search, {ATTACKER: tree, DEFENDER: tree})
        pinned = FixedPolicy(tree)
        table, root_v = backward_induction(search, util, forced={ATTACKER: pinned})
        h2 = realize_history(
            search, {ATTACKER: pinned, DEFENDER: ExactPolicy(table, search, root_v)}
        )
        # attacker moves coincide by construction; defender best response
        # reproduces the tree's defender play on the realized path
        assert h2[0::2] == h1[0::2]
        assert solver.solve(h2).progress == solver.solve(h1).progress
