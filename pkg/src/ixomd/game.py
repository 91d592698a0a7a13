"""Tree-structured two-player zero-sum games with imperfect information.

The arena is an episodic game of fixed horizon H. States are partitioned into
levels S_1..S_H; at every level both players pick an action simultaneously
(alternating-move games are encoded by giving the waiting player a single
placeholder action). Chance is folded into the initial distribution and the
transition kernels. Per-step rewards live in [0, 1]; the max player maximizes
and the min player minimizes the expected total reward.

Every state is reachable by exactly one history (the game is a tree), and each
player's information sets satisfy perfect recall: all states grouped into one
info set share the same sequence of (info set, own action) pairs. Info sets
partition by level. Under these conditions behavioral policies are equivalent
to sequence-form realization plans, which is what the evaluation and averaging
machinery relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator

import numpy as np

PROB_TOL = 1e-9


class Role(Enum):
    """Which side of the zero-sum game a policy or learner controls."""

    MAX = "max"
    MIN = "min"

    def other(self) -> "Role":
        return Role.MIN if self is Role.MAX else Role.MAX


@dataclass
class GameTree:
    """Level-indexed arena with integer state, info-set and action ids.

    ``levels[h-1]`` lists the state ids of S_h. ``transitions[(s, a, b)]`` is a
    sparse successor distribution (list of ``(state, prob)`` pairs); missing
    reward keys default to 0. Action availability attaches to info sets:
    a state ``s`` admits max actions ``0..max_action_count[x(s)]-1`` and min
    actions ``0..min_action_count[y(s)]-1``. ``max_actions``/``min_actions``
    are the global bounds A and B.

    ``value_scale``/``value_offset`` carry the affine map used by builders that
    squeeze an original chip scale into [0, 1] rewards:
    ``original = (mapped_total - value_offset) / value_scale``.

    Instances are treated as immutable after construction.
    """

    horizon: int
    max_actions: int
    min_actions: int
    levels: list[list[int]]
    initial: list[tuple[int, float]]
    max_infoset: list[int]
    min_infoset: list[int]
    max_action_count: dict[int, int]
    min_action_count: dict[int, int]
    transitions: dict[tuple[int, int, int], list[tuple[int, float]]]
    rewards: dict[tuple[int, int, int], float]
    value_scale: float = 1.0
    value_offset: float = 0.0
    level_of: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.level_of:
            level_of = [0] * self.num_states
            for h, states in enumerate(self.levels, start=1):
                for s in states:
                    level_of[s] = h
            self.level_of = level_of

    @property
    def num_states(self) -> int:
        return sum(len(states) for states in self.levels)

    @property
    def num_max_infosets(self) -> int:
        return len(self.max_action_count)

    @property
    def num_min_infosets(self) -> int:
        return len(self.min_action_count)

    def n_max_actions(self, infoset: int) -> int:
        return self.max_action_count[infoset]

    def n_min_actions(self, infoset: int) -> int:
        return self.min_action_count[infoset]

    def reward(self, s: int, a: int, b: int) -> float:
        return self.rewards.get((s, a, b), 0.0)

    def original_value(self, mapped_value: float) -> float:
        """Undo the builder's affine reward map (identity by default)."""
        return (mapped_value - self.value_offset) / self.value_scale

    def action_counts(self, role: Role) -> dict[int, int]:
        return self.max_action_count if role is Role.MAX else self.min_action_count

    def infoset_of(self, role: Role) -> list[int]:
        return self.max_infoset if role is Role.MAX else self.min_infoset


@dataclass
class ValidationReport:
    """Outcome of validate_game: empty problem list means admissible."""

    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def _legal_pairs(g: GameTree, s: int) -> Iterator[tuple[int, int]]:
    na = g.max_action_count.get(g.max_infoset[s], 0)
    nb = g.min_action_count.get(g.min_infoset[s], 0)
    for a in range(na):
        for b in range(nb):
            yield a, b


def state_predecessors(g: GameTree) -> dict[int, tuple[int, int, int]]:
    """Map each non-root state to its unique positive-probability predecessor.

    Assumes the tree-structure invariant holds; use ``validate_game`` for
    inputs that may violate it.
    """
    pred: dict[int, tuple[int, int, int]] = {}
    for (s, a, b), succs in g.transitions.items():
        for s2, p in succs:
            if p > 0.0:
                if s2 in pred:
                    raise ValueError(f"state {s2} has multiple predecessors")
                pred[s2] = (s, a, b)
    return pred


def _own_histories(g: GameTree, role: Role) -> dict[int, tuple]:
    """Player-visible history (infoset, own action, ..., infoset) per state."""
    infoset = g.infoset_of(role)
    hist: dict[int, tuple] = {}
    for s in g.levels[0]:
        hist[s] = (infoset[s],)
    for h in range(1, g.horizon):
        for (s, a, b), succs in g.transitions.items():
            if g.level_of[s] != h or s not in hist:
                continue
            own = a if role is Role.MAX else b
            for s2, p in succs:
                if p > 0.0:
                    hist[s2] = hist[s] + (own, infoset[s2])
    return hist


def validate_game(g: GameTree) -> ValidationReport:
    """Check every structural invariant and report all violations found.

    Violations are data, not exceptions: stochasticity of the initial
    distribution and transition kernels (tolerance 1e-9), rewards inside
    [0, 1], tree structure (unique positive-probability predecessor per
    non-root state), perfect recall for both players, and info sets confined
    to a single level. Index validity (state/info-set ids in range) is a
    precondition and raises instead.
    """
    problems: list[str] = []
    if g.horizon < 1:
        problems.append(f"horizon {g.horizon} < 1")
        return ValidationReport(problems)
    if len(g.levels) != g.horizon:
        problems.append(f"levels list has {len(g.levels)} entries, horizon is {g.horizon}")
        return ValidationReport(problems)

    level_one = set(g.levels[0])
    total = 0.0
    for s, p in g.initial:
        if s not in level_one:
            problems.append(f"initial distribution puts mass on non-root state {s}")
        if p < 0.0:
            problems.append(f"initial probability of state {s} is negative ({p})")
        total += p
    if abs(total - 1.0) > PROB_TOL:
        problems.append(f"initial distribution sums to {total!r}, not 1")

    for key, r in g.rewards.items():
        s, a, b = key
        x, y = g.max_infoset[s], g.min_infoset[s]
        if a >= g.max_action_count[x] or b >= g.min_action_count[y]:
            problems.append(f"reward defined for illegal action pair {key}")
        if not (0.0 <= r <= 1.0):
            problems.append(f"reward {r!r} at {key} outside [0, 1]")

    # Transition stochasticity, level consistency, and coverage of legal pairs.
    pred_count: dict[int, int] = {}
    for (s, a, b), succs in g.transitions.items():
        h = g.level_of[s]
        if h == g.horizon:
            problems.append(f"transition defined at final level from state {s}")
            continue
        x, y = g.max_infoset[s], g.min_infoset[s]
        if a >= g.max_action_count[x] or b >= g.min_action_count[y]:
            problems.append(f"transition defined for illegal action pair {(s, a, b)}")
            continue
        tot = 0.0
        for s2, p in succs:
            if p < 0.0:
                problems.append(f"negative transition probability at {(s, a, b)} -> {s2}")
            if g.level_of[s2] != h + 1:
                problems.append(
                    f"transition {(s, a, b)} -> {s2} skips levels ({h} -> {g.level_of[s2]})"
                )
            if p > 0.0:
                pred_count[s2] = pred_count.get(s2, 0) + 1
            tot += p
        if abs(tot - 1.0) > PROB_TOL:
            problems.append(f"transition kernel at {(s, a, b)} sums to {tot!r}")
    for h in range(1, g.horizon):
        for s in g.levels[h - 1]:
            for a, b in _legal_pairs(g, s):
                if (s, a, b) not in g.transitions:
                    problems.append(f"missing transition kernel at {(s, a, b)}")

    # Tree structure: exactly one positive-probability predecessor below level 1.
    for h in range(2, g.horizon + 1):
        for s in g.levels[h - 1]:
            c = pred_count.get(s, 0)
            if c != 1:
                problems.append(f"state {s} at level {h} has {c} predecessors, expected 1")

    # Info sets partition by level.
    for role in (Role.MAX, Role.MIN):
        infoset = g.infoset_of(role)
        seen_level: dict[int, int] = {}
        for h, states in enumerate(g.levels, start=1):
            for s in states:
                u = infoset[s]
                if u in seen_level and seen_level[u] != h:
                    problems.append(
                        f"{role.value} info set {u} spans levels {seen_level[u]} and {h}"
                    )
                seen_level[u] = h

    # Perfect recall (only meaningful when the tree structure held up).
    if not any("predecessors" in p or "multiple" in p for p in problems):
        for role in (Role.MAX, Role.MIN):
            infoset = g.infoset_of(role)
            hist = _own_histories(g, role)
            rep: dict[int, tuple] = {}
            for s, hs in hist.items():
                u = infoset[s]
                if u in rep and rep[u] != hs:
                    problems.append(
                        f"perfect recall violated at {role.value} info set {u}: "
                        f"histories {rep[u]} vs {hs}"
                    )
                else:
                    rep.setdefault(u, hs)
    return ValidationReport(problems)


@dataclass
class InfoSetTree:
    """One player's information-set forest with sequence-form structure.

    ``parent[x]`` is ``(parent info set, action)`` or None for level-1 info
    sets; ``children[(x, a)]`` lists the info sets directly below sequence
    (x, a). ``action_count`` carries local action counts copied from the game.
    """

    role: Role
    levels: list[list[int]]
    parent: dict[int, tuple[int, int] | None]
    children: dict[tuple[int, int], list[int]]
    states_of: dict[int, list[int]]
    action_count: dict[int, int]

    @property
    def num_infosets(self) -> int:
        return len(self.parent)

    def infosets(self) -> Iterator[int]:
        for lev in self.levels:
            yield from lev

    def sequences(self) -> Iterator[tuple[int, int]]:
        for x in self.infosets():
            for a in range(self.action_count[x]):
                yield (x, a)


def build_infoset_tree(g: GameTree, role: Role) -> InfoSetTree:
    """Group states into the player's info-set forest, linking parents.

    Fails if two states of one info set imply different (parent info set,
    action) pairs, i.e. on a perfect-recall breach.
    """
    infoset = g.infoset_of(role)
    pred = state_predecessors(g)
    levels: list[list[int]] = []
    parent: dict[int, tuple[int, int] | None] = {}
    states_of: dict[int, list[int]] = {}
    action_count = dict(g.action_counts(role))
    for h, states in enumerate(g.levels, start=1):
        level_sets: list[int] = []
        for s in states:
            u = infoset[s]
            if h == 1:
                par = None
            else:
                ps, a, b = pred[s]
                par = (infoset[ps], a if role is Role.MAX else b)
            if u in parent:
                if parent[u] != par:
                    raise ValueError(
                        f"{role.value} info set {u} has conflicting parents "
                        f"{parent[u]} and {par}"
                    )
            else:
                parent[u] = par
                level_sets.append(u)
                states_of[u] = []
            states_of[u].append(s)
        levels.append(level_sets)
    children: dict[tuple[int, int], list[int]] = {}
    for x, par in parent.items():
        if par is not None:
            children.setdefault(par, []).append(x)
    return InfoSetTree(role, levels, parent, children, states_of, action_count)


_UNIFORM_CACHE: dict[int, list[float]] = {}


def uniform_probs(n: int) -> list[float]:
    """Cached uniform distribution over n actions (treat as read-only)."""
    probs = _UNIFORM_CACHE.get(n)
    if probs is None:
        if n < 1:
            raise ValueError(f"cannot build a distribution over {n} actions")
        probs = [1.0 / n] * n
        _UNIFORM_CACHE[n] = probs
    return probs


class BehaviorPolicy:
    """Sparse per-info-set action distributions with a lazy uniform default.

    Only info sets that were ever explicitly set occupy memory; querying an
    unknown info set yields the uniform distribution over its local action
    count, which the caller supplies. Returned lists are owned by the policy
    and must not be mutated in place.
    """

    __slots__ = ("role", "table")

    def __init__(self, role: Role, table: dict[int, list[float]] | None = None):
        self.role = role
        self.table: dict[int, list[float]] = table if table is not None else {}

    def probs(self, infoset: int, n_actions: int | None = None) -> list[float]:
        stored = self.table.get(infoset)
        if stored is not None:
            return stored
        if n_actions is None:
            raise KeyError(
                f"info set {infoset} has no stored distribution and no action count"
            )
        return uniform_probs(n_actions)

    def prob(self, infoset: int, action: int, n_actions: int | None = None) -> float:
        return self.probs(infoset, n_actions)[action]

    def set(self, infoset: int, probs: Iterable[float]) -> None:
        self.table[infoset] = list(probs)

    def is_stored(self, infoset: int) -> bool:
        return infoset in self.table

    def copy(self) -> "BehaviorPolicy":
        return BehaviorPolicy(self.role, {x: list(p) for x, p in self.table.items()})

    def __len__(self) -> int:
        return len(self.table)


def uniform_policy(role: Role) -> BehaviorPolicy:
    return BehaviorPolicy(role)


@dataclass
class RealizationPlan:
    """Sequence-form weights of a behavioral policy.

    ``weights[(x, a)]`` is the product of the policy's own probabilities along
    the unique info-set path ending with action a at x; ``prefix[x]`` is the
    same product excluding the final level (1 at the roots).
    """

    role: Role
    weights: dict[tuple[int, int], float]
    prefix: dict[int, float]


def realization_plan(tree: InfoSetTree, policy: BehaviorPolicy) -> RealizationPlan:
    """Forward products over the info-set forest; errors on foreign info sets."""
    if policy.role is not tree.role:
        raise ValueError(f"policy role {policy.role} does not match tree role {tree.role}")
    for x in policy.table:
        if x not in tree.action_count:
            raise ValueError(f"policy stores unknown info set {x}")
    weights: dict[tuple[int, int], float] = {}
    prefix: dict[int, float] = {}
    for h, level in enumerate(tree.levels):
        for x in level:
            if h == 0:
                pre = 1.0
            else:
                pre = weights[tree.parent[x]]  # type: ignore[index]
            prefix[x] = pre
            probs = policy.probs(x, tree.action_count[x])
            for a, p in enumerate(probs):
                weights[(x, a)] = pre * p
    return RealizationPlan(tree.role, weights, prefix)


@dataclass
class Trajectory:
    """One player's view of one episode: H records of (infoset, action, reward).

    The min player's records carry the raw reward r; the role tag tells the
    learner to treat it as a loss directly.
    """

    role: Role
    steps: list[tuple[int, int, float]]
    episode: int = 0


def _draw(entries: list[tuple[int, float]], u: float) -> int:
    acc = 0.0
    for item, p in entries:
        acc += p
        if u < acc:
            return item
    return entries[-1][0]


def _draw_index(probs: list[float], u: float) -> int:
    acc = 0.0
    n = len(probs)
    for i in range(n - 1):
        acc += probs[i]
        if u < acc:
            return i
    return n - 1


def sample_episode(
    g: GameTree,
    mu: BehaviorPolicy,
    nu: BehaviorPolicy,
    rng: np.random.Generator,
    episode: int = 0,
) -> tuple[Trajectory, Trajectory]:
    """Play one episode under (mu, nu) and return both players' trajectories.

    Consumes the generator in a fixed order (initial draw, then per level: max
    action, min action, transition), so a seeded generator reproduces episodes
    bit-exactly.
    """
    max_infoset = g.max_infoset
    min_infoset = g.min_infoset
    na = g.max_action_count
    nb = g.min_action_count
    rand = rng.random
    s = _draw(g.initial, rand())
    steps_max: list[tuple[int, int, float]] = []
    steps_min: list[tuple[int, int, float]] = []
    horizon = g.horizon
    for h in range(1, horizon + 1):
        x = max_infoset[s]
        y = min_infoset[s]
        pa = mu.probs(x, na[x])
        a = _draw_index(pa, rand()) if len(pa) > 1 else 0
        pb = nu.probs(y, nb[y])
        b = _draw_index(pb, rand()) if len(pb) > 1 else 0
        r = g.rewards.get((s, a, b), 0.0)
        steps_max.append((x, a, r))
        steps_min.append((y, b, r))
        if h < horizon:
            succs = g.transitions[(s, a, b)]
            s = succs[0][0] if len(succs) == 1 else _draw(succs, rand())
    return (
        Trajectory(Role.MAX, steps_max, episode),
        Trajectory(Role.MIN, steps_min, episode),
    )
