import itertools
import time

import numpy as np
import pytest

from trackduel.errors import LengthMismatch
from trackduel.rules import (
    FrenetTrajectory,
    RuleSet,
    RulesConfig,
    block,
    enough_space_scan,
    one_motion_scan,
    sportsmanship_violation,
    violates_enough_space,
    violates_one_motion,
)

CFG = RulesConfig(car_width=1.8, track_width=5.8, delta_v=1.5, active=RuleSet.BOTH)


def brute_one_motion(flags):
    """Exhaustive O(T^4) oracle over all index quadruples."""
    n = len(flags)
    for t1, t2, t3, t4 in itertools.combinations(range(n), 4):
        if (not flags[t1]) and flags[t2] and (not flags[t3]) and flags[t4]:
            return True
    return False


def brute_enough_space(flags, v_att, v_def, e_att, cfg):
    """Exhaustive O(T^2) oracle over all index pairs."""
    n = len(flags)
    for t1, t2 in itertools.combinations(range(n), 2):
        if (
            (not flags[t1])
            and (v_att[t1] - v_def[t1] > cfg.delta_v)
            and (0.5 * cfg.track_width - abs(e_att[t1]) <= cfg.car_width)
            and flags[t2]
        ):
            return True
    return False


def traj_from_arrays(d, e, v):
    return FrenetTrajectory(tuple(d), tuple(e), tuple(v))


class TestBlock:
    def test_ahead_and_overlapping(self):
        assert block(5.0, 0.0, 0.0, 0.5, 1.8) is True

    def test_defender_behind(self):
        assert block(0.0, 0.0, 5.0, 0.5, 1.8) is False

    def test_lateral_gap_too_wide(self):
        assert block(5.0, 1.0, 0.0, -1.0, 1.8) is False

    def test_boundary_is_inclusive_laterally_strict_longitudinally(self):
        assert block(5.0, 1.8, 0.0, 0.0, 1.8) is True
        assert block(0.0, 0.0, 0.0, 0.0, 1.8) is False


class TestOneMotion:
    @pytest.mark.parametrize(
        "flags,expected",
        [
            ([False, True, False, True], True),
            ([False, True, True, True, True], False),
            ([True, False, True, False], False),
        ],
    )
    def test_known_patterns_match_brute_force(self, flags, expected):
        assert bool(one_motion_scan(flags)) is expected
        assert brute_one_motion(flags) is expected

    def test_witness_is_first_lexicographic(self):
        v = one_motion_scan([False, False, True, False, True, True])
        assert v.violated and v.witness == (0, 2, 3, 4)
        assert v.frames == [4, 5]

    def test_length_mismatch(self):
        a = traj_from_arrays([0, 1], [0, 0], [1, 1])
        b = traj_from_arrays([0, 1, 2], [0, 0, 0], [1, 1, 1])
        with pytest.raises(LengthMismatch):
            violates_one_motion(a, b, CFG)


class TestEnoughSpace:
    def test_constructed_violation(self):
        # step 0: unblocked, attacker 2.0 m/s faster near the wall; step 1: blocked
        d_def = (1.0, 3.0)
        e_def = (0.1, 1.9)
        d_att = (0.0, 1.0)
        e_att = (2.0, 1.0)
        v_def = (10.0, 10.0)
        v_att = (12.0, 12.0)
        res = violates_enough_space(
            traj_from_arrays(d_def, e_def, v_def),
            traj_from_arrays(d_att, e_att, v_att),
            CFG,
        )
        assert res.violated and res.witness == (0, 1)

    def test_attacker_in_track_center_never_qualifies(self):
        d_def = (1.0, 3.0)
        e_def = (0.0, 0.0)
        d_att = (0.0, 1.0)
        e_att = (0.0, 0.0)  # 0.5*5.8 - 0 = 2.9 > 1.8
        res = violates_enough_space(
            traj_from_arrays(d_def, e_def, (10.0, 10.0)),
            traj_from_arrays(d_att, e_att, (12.0, 12.0)),
            CFG,
        )
        assert not res.violated

    def test_no_later_block_matches_brute_force(self):
        flags = [False, False, False]
        v_att, v_def = (12.0,) * 3, (9.0,) * 3
        e_att = (2.0, 2.0, 2.0)
        assert not enough_space_scan(flags, v_att, v_def, e_att, CFG).violated
        assert not brute_enough_space(flags, v_att, v_def, e_att, CFG)


class TestDispatch:
    def _make(self, flags):
        n = len(flags)
        d_def = [float(i) + (1.0 if f else -1.0) for i, f in enumerate(flags)]
        d_att = [float(i) for i in range(n)]
        e = [0.0] * n
        return (
            traj_from_arrays(d_def, e, [10.0] * n),
            traj_from_arrays(d_att, e, [10.0] * n),
        )

    def test_om_active_om_violated(self):
        td, ta = self._make([False, True, False, True])
        cfg = RulesConfig(1.8, 5.8, 1.5, RuleSet.OM)
        assert sportsmanship_violation(td, ta, cfg).violated

    def test_es_active_only_om_violated(self):
        td, ta = self._make([False, True, False, True])  # equal speeds: ES never arms
        cfg = RulesConfig(1.8, 5.8, 1.5, RuleSet.ES)
        assert not sportsmanship_violation(td, ta, cfg).violated

    def test_union_fires_on_es_alone(self):
        d_def = (1.0, 3.0)
        e_def = (0.1, 1.9)
        d_att = (0.0, 1.0)
        e_att = (2.0, 1.0)
        td = traj_from_arrays(d_def, e_def, (10.0, 10.0))
        ta = traj_from_arrays(d_att, e_att, (12.0, 12.0))
        cfg = RulesConfig(1.8, 5.8, 1.5, RuleSet.BOTH)
        res = sportsmanship_violation(td, ta, cfg)
        assert res.violated and res.rule == "enough_space"


class TestOracleEquivalence:
    def test_scan_equals_brute_force_on_random_sequences(self):
        rng = np.random.default_rng(12345)
        start = time.monotonic()
        for _ in range(10_000):
            n = int(rng.integers(1, 16))
            flags = [bool(b) for b in rng.integers(0, 2, size=n)]
            v_att = tuple(float(x) for x in rng.uniform(8.0, 14.0, size=n))
            v_def = tuple(float(x) for x in rng.uniform(8.0, 14.0, size=n))
            e_att = tuple(float(x) for x in rng.uniform(-2.9, 2.9, size=n))
            assert bool(one_motion_scan(flags)) == brute_one_motion(flags)
            assert bool(
                enough_space_scan(flags, v_att, v_def, e_att, CFG)
            ) == brute_enough_space(flags, v_att, v_def, e_att, CFG)
        assert time.monotonic() - start < 10.0

    def test_monotone_under_appending(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            n = int(rng.integers(4, 12))
            flags = [bool(b) for b in rng.integers(0, 2, size=n)]
            if one_motion_scan(flags).violated:
                extended = flags + [bool(b) for b in rng.integers(0, 2, size=3)]
                assert one_motion_scan(extended).violated

    def test_lateral_reflection_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            d_def = np.cumsum(rng.uniform(0.0, 2.0, size=n)) + rng.uniform(0, 3)
            d_att = np.cumsum(rng.uniform(0.0, 2.0, size=n))
            e_def = rng.uniform(-2.0, 2.0, size=n)
            e_att = rng.uniform(-2.0, 2.0, size=n)
            v_def = rng.uniform(8.0, 12.0, size=n)
            v_att = rng.uniform(8.0, 14.0, size=n)
            td = traj_from_arrays(d_def, e_def, v_def)
            ta = traj_from_arrays(d_att, e_att, v_att)
            td_r = traj_from_arrays(d_def, -e_def, v_def)
            ta_r = traj_from_arrays(d_att, -e_att, v_att)
            for active in RuleSet:
                cfg = RulesConfig(1.8, 5.8, 1.5, active)
                assert (
                    sportsmanship_violation(td, ta, cfg).violated
                    == sportsmanship_violation(td_r, ta_r, cfg).violated
                )
