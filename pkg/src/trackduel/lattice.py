"""Station/lateral lattice over the track and the best-response planner.

Each player gets its own lattice per episode. The first planning step is
special: with the discrete vehicle model the step-0 landing is forced to
(start + tau_s*v0 along the start heading) -- steering only modulates the
step length a few centimeters and acceleration only affects later steps.
The lattice is therefore anchored at that forced landing: station grid
``anchor_d + j*d_res``, lateral grid ``anchor_e + i*e_res`` clipped to the
usable half width, and the planner chooses nodes for timesteps 2..T.

A planned path maximizes the negated per-step cost

    w1*(e(tau) - e*(tau))^2 + (step_dist/tau_s - v_max)^2    (tau = 1..T-1)

subject to: step displacement <= v_max*tau_s (+ grid tolerance), heading of
the displacement within gamma_max of the centerline tangent at the station
midpoint, and Euclidean distance to the opponent > the planning safety
radius at every timestep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dp
from .errors import Infeasible
from .kinematics import KinematicsConfig, VehicleState
from .track import Track

DIST_TOL = 1e-9  # grid tolerance on the strict step-length inequality


@dataclass(frozen=True)
class LatticeParams:
    horizon: int                 # T, steps
    d_res: float = 0.2
    e_res: float = 0.2
    gamma_max: float = 0.16
    w1: float = 100.0
    d_safe: float = 1.8
    safety_margin: float = 0.15  # planning pad so tracked paths keep d_safe

    @property
    def d_plan(self) -> float:
        return self.d_safe + self.safety_margin


@dataclass(frozen=True)
class PlannedPath:
    """A per-timestep sequence of positions for one player (T+1 entries).

    ``nodes`` holds the lattice indices for timesteps 1..T (None for
    seed paths that were never planned on the lattice).
    """

    xy: np.ndarray          # [T+1, 2] Cartesian
    d: np.ndarray           # [T+1] stations
    e: np.ndarray           # [T+1] lateral offsets
    nodes: tuple[tuple[int, int], ...] | None = None

    def key(self) -> bytes:
        return self.xy.tobytes()


class Lattice:
    """Per-player planning lattice anchored at the forced first landing."""

    def __init__(
        self,
        track: Track,
        kin: KinematicsConfig,
        start: VehicleState,
        params: LatticeParams,
    ) -> None:
        self.track = track
        self.kin = kin
        self.params = params
        self.start = start

        T = params.horizon
        zx = start.px + kin.tau_s * start.v * math.cos(start.theta)
        zy = start.py + kin.tau_s * start.v * math.sin(start.theta)
        fz = track.to_frenet(zx, zy)
        self.anchor_xy = (zx, zy)
        self.anchor_d = fz.d
        self.anchor_e = fz.e

        self.K = int(math.ceil(kin.v_max * kin.tau_s / params.d_res))
        self.S = (T - 1) * self.K + 1
        if self.anchor_d + (self.S - 1) * params.d_res > track.total_length:
            raise Infeasible("track too short for the planning horizon")

        half = track.usable_half_width
        i_lo = int(math.ceil((-half - self.anchor_e) / params.e_res - 1e-12))
        i_hi = int(math.floor((half - self.anchor_e) / params.e_res + 1e-12))
        self.evals = self.anchor_e + params.e_res * np.arange(i_lo, i_hi + 1)
        self.m_anchor = -i_lo
        self.L = len(self.evals)

        self.stations = self.anchor_d + params.d_res * np.arange(self.S)
        dd, ee = np.meshgrid(self.stations, self.evals, indexing="ij")
        self.P = np.ascontiguousarray(track.from_frenet_batch(dd, ee))

        # unit tangent at the station midpoint of a (j, j+k) transition
        j_idx, k_idx = np.meshgrid(
            np.arange(self.S), np.arange(self.K + 1), indexing="ij"
        )
        mid = self.anchor_d + (j_idx + 0.5 * k_idx) * params.d_res
        mid = np.clip(mid, 0.0, track.total_length)
        xi = track.tangent_angle_batch(mid)
        self.umid = np.ascontiguousarray(
            np.stack([np.cos(xi), np.sin(xi)], axis=-1)
        )

        # lateral index window per station increment; generous on arcs
        arc_margin = 1.0
        for seg in track.segments:
            if seg.is_arc:
                r = 1.0 / abs(seg.curvature)
                arc_margin = max(arc_margin, (r + half) / r)
        tan_g = math.tan(params.gamma_max)
        wk = []
        for k in range(self.K + 1):
            if k == 0:
                wk.append(0)  # perpendicular moves never satisfy the cone
            else:
                reach = tan_g * k * params.d_res * arc_margin * 1.05
                wk.append(min(self.L - 1, int(math.floor(reach / params.e_res)) + 1))
        self.wk = np.asarray(wk, dtype=np.int32)

        self.dist_cap = kin.v_max * kin.tau_s + DIST_TOL
        self.cos_gamma = math.cos(params.gamma_max)
        self.max_lateral_step = self._max_lateral_step()

    def _max_lateral_step(self) -> float:
        """Largest per-step lateral move the grid actually admits.

        Scanned at the anchor row; governs the seed paths so the
        best-response loop starts from lines the lattice can reproduce.
        """
        j1, m1 = 0, self.m_anchor
        best = 0.0
        for k in range(self.K + 1):
            j2 = j1 + k
            if j2 >= self.S:
                break
            for dm in range(-int(self.wk[k]), int(self.wk[k]) + 1):
                m2 = m1 + dm
                if 0 <= m2 < self.L and self.transition_ok(j1, m1, j2, m2):
                    best = max(best, abs(self.evals[m2] - self.evals[m1]))
        return best

    # -- feasibility shared by the DP kernels, extraction, the braking
    #    fallback and the test oracles ------------------------------------

    def transition_ok(self, j1: int, m1: int, j2: int, m2: int) -> bool:
        """Geometric feasibility of a lattice transition (no opponent)."""
        if j2 < j1 or j2 >= self.S or not (0 <= m2 < self.L):
            return False
        dx = self.P[j2, m2, 0] - self.P[j1, m1, 0]
        dy = self.P[j2, m2, 1] - self.P[j1, m1, 1]
        dist = math.sqrt(dx * dx + dy * dy)
        if dist > self.dist_cap:
            return False
        if dist > 0.0:
            ux, uy = self.umid[j1, j2 - j1]
            if dx * ux + dy * uy < self.cos_gamma * dist:
                return False
        return True

    def step_cost_parts(
        self, tau: int, j1: int, m1: int, j2: int, m2: int
    ) -> tuple[float, float]:
        """Lateral and speed cost of the tau -> tau+1 transition.

        Kept split so path costs can be accumulated with exactly the
        kernel's float association lat + (spd + rest).
        """
        dx = self.P[j2, m2, 0] - self.P[j1, m1, 0]
        dy = self.P[j2, m2, 1] - self.P[j1, m1, 1]
        dist = math.sqrt(dx * dx + dy * dy)
        lat = self.evals[m1] - self._estar[tau]
        lat = self.params.w1 * lat * lat
        t = dist / self.kin.tau_s - self.kin.v_max
        return lat, t * t

    def node_mask(self, opponent_xy: np.ndarray) -> np.ndarray:
        """Per-timestep node admissibility against a fixed opponent path."""
        T = self.params.horizon
        d2 = self.params.d_plan * self.params.d_plan
        ox = opponent_xy[:, 0][:, None, None]
        oy = opponent_xy[:, 1][:, None, None]
        ddx = self.P[None, :, :, 0] - ox
        ddy = self.P[None, :, :, 1] - oy
        mask = (ddx * ddx + ddy * ddy) > d2
        return np.ascontiguousarray(mask.astype(np.uint8))

    # -- planning ---------------------------------------------------------

    def best_response(
        self,
        estar: np.ndarray,
        opponent_xy: np.ndarray,
        backend: str | None = None,
    ) -> tuple[PlannedPath, bool]:
        """Optimal lattice path against a fixed opponent trajectory.

        Returns (path, used_fallback). ``estar`` is the per-step lateral
        target, length T. Falls back to a lane-holding braking profile when
        no collision-free path exists from the anchor.
        """
        T = self.params.horizon
        self._estar = np.asarray(estar, dtype=float)
        node_ok = self.node_mask(opponent_xy)
        if not node_ok[1, 0, self.m_anchor]:
            # forced landing already conflicts: braking profile, flagged
            return self._braking_path(node_ok), True

        V = np.full((T + 1, self.S, self.L), np.inf)
        dp.value_table(
            self.P,
            np.ascontiguousarray(self.evals),
            self._estar,
            self.umid,
            node_ok,
            self.wk,
            self.kin.tau_s,
            self.kin.v_max,
            self.params.w1,
            self.cos_gamma,
            self.dist_cap,
            T,
            self.K,
            self.m_anchor,
            V,
            backend=backend,
        )
        if not np.isfinite(V[1, 0, self.m_anchor]) and T > 1:
            return self._braking_path(node_ok), True

        nodes = [(0, self.m_anchor)]
        j1, m1 = 0, self.m_anchor
        for tau in range(1, T):
            best_key = None
            best_node = None
            for k in range(self.K + 1):
                j2 = j1 + k
                if j2 >= self.S:
                    break
                w = int(self.wk[k])
                for m2 in range(max(0, m1 - w), min(self.L - 1, m1 + w) + 1):
                    if not node_ok[tau + 1, j2, m2]:
                        continue
                    if not self.transition_ok(j1, m1, j2, m2):
                        continue
                    dx = self.P[j2, m2, 0] - self.P[j1, m1, 0]
                    dy = self.P[j2, m2, 1] - self.P[j1, m1, 1]
                    dist = math.sqrt(dx * dx + dy * dy)
                    t = dist / self.kin.tau_s - self.kin.v_max
                    total = t * t + V[tau + 1, j2, m2]
                    if not np.isfinite(total):
                        continue
                    e_tb = self._estar[min(tau + 1, T - 1)]
                    key = (total, abs(self.evals[m2] - e_tb), j2, m2)
                    if best_key is None or key < best_key:
                        best_key = key
                        best_node = (j2, m2)
            if best_node is None:  # pragma: no cover - guarded by V check
                return self._braking_path(node_ok), True
            nodes.append(best_node)
            j1, m1 = best_node
        return self._path_from_nodes(nodes), False

    def path_objective(self, path: PlannedPath, estar: np.ndarray) -> float:
        """Total cost of a lattice path, accumulated bit-exactly like the DP.

        The kernel computes V = lat + (spd + V_next); using the same
        association makes the objective of the extracted path equal to
        V[1][anchor] to the last bit.
        """
        assert path.nodes is not None
        self._estar = np.asarray(estar, dtype=float)
        total = 0.0
        for tau in range(len(path.nodes) - 1, 0, -1):
            j1, m1 = path.nodes[tau - 1]
            j2, m2 = path.nodes[tau]
            lat, spd = self.step_cost_parts(tau, j1, m1, j2, m2)
            total = lat + (spd + total)
        return total

    def _braking_path(self, node_ok: np.ndarray) -> PlannedPath:
        """Hold the lateral lane, take the largest feasible increment."""
        T = self.params.horizon
        nodes = [(0, self.m_anchor)]
        j1, m1 = 0, self.m_anchor
        for tau in range(1, T):
            chosen = None
            for k in range(self.K, -1, -1):
                j2 = j1 + k
                if j2 >= self.S:
                    continue
                if node_ok[tau + 1, j2, m1] and self.transition_ok(j1, m1, j2, m1):
                    chosen = (j2, m1)
                    break
            if chosen is None:
                chosen = (j1, m1)  # stand still even if conflicted; flagged upstream
            nodes.append(chosen)
            j1, m1 = chosen
        return self._path_from_nodes(nodes)

    def _path_from_nodes(self, nodes: list[tuple[int, int]]) -> PlannedPath:
        xy = np.empty((len(nodes) + 1, 2))
        d = np.empty(len(nodes) + 1)
        e = np.empty(len(nodes) + 1)
        xy[0] = (self.start.px, self.start.py)
        f0 = self.track.to_frenet(self.start.px, self.start.py)
        d[0], e[0] = f0.d, f0.e
        for t, (j, m) in enumerate(nodes, start=1):
            xy[t] = self.P[j, m]
            d[t] = self.stations[j]
            e[t] = self.evals[m]
        return PlannedPath(xy=xy, d=d, e=e, nodes=tuple(nodes))

    def seed_path(self, estar: np.ndarray | None = None) -> PlannedPath:
        """The grid line this player would drive absent any rival.

        Best-response loops start from these declared-intention paths; the
        seed must be an exact lattice path or the responder's clearance
        margins are calibrated against a line the owner cannot actually
        drive, which reopens passing corridors mid-merge. Computed as a
        best response against an opponent placed far off the track.
        """
        if estar is None:
            f0 = self.track.to_frenet(self.start.px, self.start.py)
            estar = np.full(self.params.horizon, f0.e)
        far = np.full((self.params.horizon + 1, 2), 1e9)
        path, _ = self.best_response(np.asarray(estar, dtype=float), far)
        return path
