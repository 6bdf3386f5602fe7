"""Extensive-form lateral-intention game solved by Monte Carlo tree search.

Players alternate within each round (leader first), for M rounds; a
complete history of 2M lateral-displacement actions indexes a node of the
full tree and, through the trajectory game, a pair of utilities. The
search uses UCT selection among fully expanded nodes, expansion of one
unexplored action, uniform random roll-outs to the end of the game, and
additive back-propagation:

    select:  argmax_a Q(h,a)/N(h+a) + c*sqrt(ln N(h) / N(h+a))
    update:  Q(h,a) += u, N(h) += 1 along the traversed path
    policy:  pi(h) = argmax_a N(h+a)

Backward induction over the same tree provides the exact alternating-move
equilibrium and serves as the test oracle at paper scale (2 actions, 3
rounds, 64 leaves).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

from .errors import NoChildren, TooLarge

UtilityFn = Callable[[list[float]], tuple[float, float]]


@dataclass(frozen=True)
class SearchConfig:
    exploration: float           # c
    rounds: int                  # M
    action_set: tuple[float, ...]
    iterations: int = 5000
    leader: str = "A"

    @property
    def depth(self) -> int:
        return 2 * self.rounds

    def player_to_move(self, depth: int) -> str:
        first, second = (self.leader, "D" if self.leader == "A" else "A")
        return first if depth % 2 == 0 else second


class TreeNode:
    """Search statistics for one history."""

    __slots__ = ("history", "visits", "q", "children", "untried")

    def __init__(self, history: tuple[float, ...], actions: tuple[float, ...]):
        self.history = history
        self.visits = 0
        self.q: dict[float, list[float]] = {}  # action -> [sum u_A, sum u_D]
        self.children: dict[float, TreeNode] = {}
        self.untried: list[float] = list(actions)


def uct_select(node: TreeNode, player: str, exploration: float) -> float:
    """UCT argmax over fully explored children; ties break by action order."""
    if not node.children:
        raise NoChildren(f"history {node.history} has no explored children")
    idx = 0 if player == "A" else 1
    best_action, best_value = None, -math.inf
    for action, child in node.children.items():
        mean = node.q[action][idx] / child.visits
        bonus = exploration * math.sqrt(math.log(node.visits) / child.visits)
        value = mean + bonus
        if value > best_value:
            best_action, best_value = action, value
    return best_action


@dataclass
class SolvedTree:
    root: TreeNode
    nodes: dict[tuple[float, ...], TreeNode]
    config: SearchConfig
    iterations_run: int = 0

    def policy(self, history: tuple[float, ...]) -> float:
        """argmax-visits action; unvisited nodes repeat the player's previous
        round action (first action of the set when there is none)."""
        node = self.nodes.get(history)
        if node is not None and node.children:
            best, best_n = None, -1
            for action in self.config.action_set:
                child = node.children.get(action)
                if child is not None and child.visits > best_n:
                    best, best_n = action, child.visits
            if best is not None:
                return best
        if len(history) >= 2:
            return history[-2]
        return self.config.action_set[0]

class FixedPolicy:
    """A frozen per-history policy (used to pin one player across stages)."""

    def __init__(self, source: SolvedTree):
        self._source = source

    def policy(self, history: tuple[float, ...]) -> float:
        return self._source.policy(history)


def run_mcts(
    config: SearchConfig,
    utility_fn: UtilityFn,
    rng: random.Random,
    forced: dict[str, FixedPolicy] | None = None,
) -> SolvedTree:
    """Run the four-phase search for config.iterations iterations.

    ``forced`` pins named players to fixed policies: their moves are not
    searched (single child per node), which realizes the second stage of
    the asymmetric-knowledge scheme with the same machinery.
    """
    forced = forced or {}
    actions = tuple(config.action_set)
    root = TreeNode((), actions)
    nodes = {(): root}

    def node_actions(history: tuple[float, ...]) -> tuple[float, ...]:
        mover = config.player_to_move(len(history))
        if mover in forced:
            return (forced[mover].policy(history),)
        return actions

    root.untried = list(node_actions(()))

    for _ in range(config.iterations):
        node = root
        path: list[tuple[TreeNode, float]] = []
        # selection: descend fully expanded internal nodes
        while (
            len(node.history) < config.depth
            and not node.untried
            and node.children
        ):
            mover = config.player_to_move(len(node.history))
            action = uct_select(node, mover, config.exploration)
            path.append((node, action))
            node = node.children[action]
        # expansion: attach one unexplored action
        if len(node.history) < config.depth and node.untried:
            action = node.untried.pop(0)
            child_h = node.history + (action,)
            child = TreeNode(child_h, ())
            child.untried = list(node_actions(child_h)) if len(child_h) < config.depth else []
            node.children[action] = child
            node.q[action] = [0.0, 0.0]
            nodes[child_h] = child
            path.append((node, action))
            node = child
        # simulation: uniform random roll-out to the end of the game
        h = node.history
        while len(h) < config.depth:
            mover = config.player_to_move(len(h))
            if mover in forced:
                h = h + (forced[mover].policy(h),)
            else:
                h = h + (rng.choice(actions),)
        u = utility_fn(list(h))
        # back-propagation along the traversed path
        for parent, action in path:
            parent.visits += 1
            parent.q[action][0] += u[0]
            parent.q[action][1] += u[1]
        node.visits += 1
    return SolvedTree(root=root, nodes=nodes, config=config, iterations_run=config.iterations)


def backward_induction(
    config: SearchConfig,
    utility_fn: UtilityFn,
    forced: dict[str, FixedPolicy] | None = None,
    node_budget: int = 200_000,
) -> tuple[dict[tuple[float, ...], float], tuple[float, float]]:
    """Exact alternating-move equilibrium by full enumeration.

    Returns (policy table, root values). The mover at each node maximizes
    its own value; ties break by action order. Raises TooLarge past the
    node budget.
    """
    forced = forced or {}
    n_actions = len(config.action_set)
    total = sum(n_actions ** d for d in range(config.depth + 1))
    if total > node_budget:
        raise TooLarge(f"{total} nodes exceed budget {node_budget}")

    policy: dict[tuple[float, ...], float] = {}

    def value(history: tuple[float, ...]) -> tuple[float, float]:
        if len(history) == config.depth:
            return utility_fn(list(history))
        mover = config.player_to_move(len(history))
        idx = 0 if mover == "A" else 1
        if mover in forced:
            a = forced[mover].policy(history)
            policy[history] = a
            return value(history + (a,))
        best_a, best_v = None, None
        for a in config.action_set:
            v = value(history + (a,))
            if best_v is None or v[idx] > best_v[idx]:
                best_a, best_v = a, v
        policy[history] = best_a
        return best_v

    root_value = value(())
    return policy, root_value


@dataclass
class ExactPolicy:
    """Backward-induction policy table wrapped with the shared interface."""

    table: dict[tuple[float, ...], float]
    config: SearchConfig
    root_value: tuple[float, float] = (0.0, 0.0)

    def policy(self, history: tuple[float, ...]) -> float:
        a = self.table.get(history)
        if a is not None:
            return a
        if len(history) >= 2:
            return history[-2]
        return self.config.action_set[0]
