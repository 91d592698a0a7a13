"""Exact full-model evaluation: values, best responses, regret, bounds.

Everything here sweeps the complete game tree, so it is reserved for tests
and reporting; learners never see it. Values are bilinear in the players'
realization plans, best responses are backward inductions over one player's
info-set forest weighted by counterfactual reach (chance times opponent), and
the regret machinery exploits that same bilinearity to aggregate per-episode
loss vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .game import (
    BehaviorPolicy,
    GameTree,
    InfoSetTree,
    RealizationPlan,
    Role,
    build_infoset_tree,
    realization_plan,
)

LossTable = dict[tuple[int, int], float]


def reach_probabilities(
    g: GameTree, mu: BehaviorPolicy, nu: BehaviorPolicy
) -> dict[int, float]:
    """P(reach s) = chance * both players' choices strictly above s's level."""
    w: dict[int, float] = {s: p for s, p in g.initial if p != 0.0}
    out = dict(w)
    for h in range(1, g.horizon):
        nxt: dict[int, float] = {}
        for s, ws in w.items():
            x, y = g.max_infoset[s], g.min_infoset[s]
            pa = mu.probs(x, g.max_action_count[x])
            pb = nu.probs(y, g.min_action_count[y])
            for a, pav in enumerate(pa):
                for b, pbv in enumerate(pb):
                    joint = ws * pav * pbv
                    if joint == 0.0:
                        continue
                    for s2, tp in g.transitions[(s, a, b)]:
                        if tp != 0.0:
                            nxt[s2] = nxt.get(s2, 0.0) + joint * tp
        out.update(nxt)
        w = nxt
    return out


def expected_value(g: GameTree, mu: BehaviorPolicy, nu: BehaviorPolicy) -> float:
    """Exact expected total reward of the profile, by forward sweep."""
    w: dict[int, float] = {s: p for s, p in g.initial if p != 0.0}
    total = 0.0
    for h in range(1, g.horizon + 1):
        nxt: dict[int, float] = {}
        expanding = h < g.horizon
        for s, ws in w.items():
            x, y = g.max_infoset[s], g.min_infoset[s]
            pa = mu.probs(x, g.max_action_count[x])
            pb = nu.probs(y, g.min_action_count[y])
            for a, pav in enumerate(pa):
                for b, pbv in enumerate(pb):
                    joint = ws * pav * pbv
                    if joint == 0.0:
                        continue
                    r = g.rewards.get((s, a, b))
                    if r is not None:
                        total += joint * r
                    if expanding:
                        for s2, tp in g.transitions[(s, a, b)]:
                            if tp != 0.0:
                                nxt[s2] = nxt.get(s2, 0.0) + joint * tp
        w = nxt
    return total


def counterfactual_reach(g: GameTree, opponent: BehaviorPolicy, role: Role) -> dict[int, float]:
    """Chance-times-opponent reach of every state, the responder unweighted."""
    w: dict[int, float] = {s: p for s, p in g.initial if p != 0.0}
    out = dict(w)
    opp_infoset = g.infoset_of(role.other())
    opp_counts = g.action_counts(role.other())
    for h in range(1, g.horizon):
        nxt: dict[int, float] = {}
        for s, ws in w.items():
            u = opp_infoset[s]
            pv = opponent.probs(u, opp_counts[u])
            x, y = g.max_infoset[s], g.min_infoset[s]
            na = g.max_action_count[x]
            nb = g.min_action_count[y]
            for a in range(na):
                for b in range(nb):
                    opp_p = pv[b] if role is Role.MAX else pv[a]
                    if opp_p == 0.0:
                        continue
                    for s2, tp in g.transitions[(s, a, b)]:
                        if tp != 0.0:
                            nxt[s2] = nxt.get(s2, 0.0) + ws * opp_p * tp
        out.update(nxt)
        w = nxt
    return out


def exact_loss_vector(g: GameTree, opponent: BehaviorPolicy, role: Role) -> LossTable:
    """The loss table the bandit estimator is unbiased for, computed exactly.

    For the max player, loss[(x, a)] = sum over states s in x and opponent
    actions b of reach * opponent_prob * (1 - r); the min player's uses the
    raw reward. <plan, loss> then equals H minus the profile's expected value.
    """
    w = counterfactual_reach(g, opponent, role)
    opp_infoset = g.infoset_of(role.other())
    opp_counts = g.action_counts(role.other())
    own_infoset = g.infoset_of(role)
    own_counts = g.action_counts(role)
    is_max = role is Role.MAX
    table: LossTable = {}
    for states in g.levels:
        for s in states:
            ws = w.get(s, 0.0)
            u = opp_infoset[s]
            pv = opponent.probs(u, opp_counts[u])
            own = own_infoset[s]
            for own_a in range(own_counts[own]):
                key = (own, own_a)
                acc = table.get(key, 0.0)
                for opp_a, opp_p in enumerate(pv):
                    if opp_p == 0.0:
                        continue
                    a, b = (own_a, opp_a) if is_max else (opp_a, own_a)
                    r = g.rewards.get((s, a, b), 0.0)
                    acc += ws * opp_p * ((1.0 - r) if is_max else r)
                table[key] = acc
    return table


def best_sequence_value(
    tree: InfoSetTree, table: LossTable, maximize: bool
) -> tuple[float, BehaviorPolicy]:
    """Optimal deterministic policy for an additive sequence-weighted table.

    Dynamic program over the info-set forest: the value of an info set is the
    best action's table entry plus its child info sets' values; the total is
    the sum over root info sets. Ties break toward the lowest action id.
    """
    values: dict[int, float] = {}
    policy = BehaviorPolicy(tree.role)
    for level in reversed(tree.levels):
        for x in level:
            best_v = None
            best_a = 0
            for a in range(tree.action_count[x]):
                v = table.get((x, a), 0.0)
                for child in tree.children.get((x, a), ()):
                    v += values[child]
                if best_v is None or (v > best_v if maximize else v < best_v):
                    best_v = v
                    best_a = a
            values[x] = best_v  # type: ignore[assignment]
            probs = [0.0] * tree.action_count[x]
            probs[best_a] = 1.0
            policy.set(x, probs)
    total = sum(values[x] for x in tree.levels[0]) if tree.levels else 0.0
    return total, policy


def best_response(
    g: GameTree,
    opponent: BehaviorPolicy,
    role: Role,
    tree: InfoSetTree | None = None,
) -> tuple[float, BehaviorPolicy]:
    """Exact best response against a fixed opponent: (value, pure policy).

    The value is the responder's optimal expected total reward (max player
    maximizes it, min player minimizes it). Deterministic everywhere, ties to
    the lowest action id.
    """
    if tree is None:
        tree = build_infoset_tree(g, role)
    w = counterfactual_reach(g, opponent, role)
    opp_infoset = g.infoset_of(role.other())
    opp_counts = g.action_counts(role.other())
    own_infoset = g.infoset_of(role)
    is_max = role is Role.MAX
    gains: LossTable = {}
    for states in g.levels:
        for s in states:
            ws = w.get(s, 0.0)
            if ws == 0.0:
                continue
            u = opp_infoset[s]
            pv = opponent.probs(u, opp_counts[u])
            own = own_infoset[s]
            for own_a in range(tree.action_count[own]):
                key = (own, own_a)
                acc = gains.get(key, 0.0)
                for opp_a, opp_p in enumerate(pv):
                    if opp_p == 0.0:
                        continue
                    a, b = (own_a, opp_a) if is_max else (opp_a, own_a)
                    r = g.rewards.get((s, a, b))
                    if r is not None:
                        acc += ws * opp_p * r
                gains[key] = acc
    return best_sequence_value(tree, gains, maximize=is_max)


def exploitability(
    g: GameTree,
    mu: BehaviorPolicy,
    nu: BehaviorPolicy,
    trees: tuple[InfoSetTree, InfoSetTree] | None = None,
) -> float:
    """Sum of both players' best-response gains; zero exactly at equilibria."""
    tmax = trees[0] if trees else None
    tmin = trees[1] if trees else None
    br_max, _ = best_response(g, nu, Role.MAX, tmax)
    br_min, _ = best_response(g, mu, Role.MIN, tmin)
    return br_max - br_min


@dataclass
class RegretResult:
    """Empirical regret against the best fixed comparator in hindsight."""

    max_regret: float
    series: list[tuple[int, float]] = field(default_factory=list)


def empirical_regret(
    tree: InfoSetTree,
    plans: Sequence[RealizationPlan],
    losses: Sequence[LossTable],
    at: Iterable[int] | None = None,
) -> RegretResult:
    """max over comparators of sum_t <mu^t - comparator, loss^t>.

    Computed as the accumulated instantaneous losses minus the best fixed
    sequence-form policy against the summed loss table (linearity of the
    regret in the comparator). ``at`` selects the episodes at which the
    series is evaluated (all episodes by default).
    """
    if len(plans) != len(losses):
        raise ValueError("plans and losses must align per episode")
    probe = set(at) if at is not None else None
    cumulative: LossTable = {}
    inst_sum = 0.0
    series: list[tuple[int, float]] = []
    result = 0.0
    for t, (plan, table) in enumerate(zip(plans, losses), start=1):
        for key, v in table.items():
            cumulative[key] = cumulative.get(key, 0.0) + v
            inst_sum += plan.weights[key] * v
        if probe is None or t in probe or t == len(plans):
            best, _ = best_sequence_value(tree, cumulative, maximize=False)
            result = inst_sum - best
            series.append((t, result))
    return RegretResult(result, series)


def theorem2_bound(
    T: int, X: int, A: int, H: int, eta: float, gamma: float, delta: float
) -> float:
    """High-probability regret bound for given hyperparameters.

    iota = log(3 H X A / delta); the bound is
    H sqrt(2 T iota) + gamma T X A + X iota / (2 gamma) + X log(A) / eta
    + eta (1+H) T X A + eta (1+H) H iota / (2 gamma).
    For the min player substitute that player's info-set and action counts.
    """
    if min(T, X, A, H) < 1:
        raise ValueError("T, X, A, H must all be >= 1")
    if eta <= 0.0 or gamma <= 0.0:
        raise ValueError("the bound needs eta > 0 and gamma > 0")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    iota = math.log(3.0 * H * X * A / delta)
    return (
        H * math.sqrt(2.0 * T * iota)
        + gamma * T * X * A
        + X * iota / (2.0 * gamma)
        + X * math.log(A) / eta
        + eta * (1.0 + H) * T * X * A
        + eta * (1.0 + H) * H * iota / (2.0 * gamma)
    )


def theorem2_bound_tuned(T: int, X: int, A: int, H: int, delta: float) -> float:
    """The bound at its minimizing (eta, gamma), in closed form.

    Equals ``theorem2_bound`` evaluated at eta = sqrt(log A / (T (1+H) A)) and
    gamma = sqrt(iota / (2 T A)). The eta-balanced pair contributes
    2 X sqrt(T (1+H) A log A); each a/p + p*b pair reduces to 2 sqrt(a b).
    """
    if A < 2:
        raise ValueError("tuned bound needs an action bound of at least 2")
    iota = math.log(3.0 * H * X * A / delta)
    log_a = math.log(A)
    return (
        H * math.sqrt(2.0 * T * iota)
        + X * math.sqrt(2.0 * T * A * iota)
        + 2.0 * X * math.sqrt(T * (1.0 + H) * A * log_a)
        + H * math.sqrt((1.0 + H) * iota * log_a / 2.0)
    )


def average_profile_identity_check(
    tree: InfoSetTree,
    snapshots: Sequence[BehaviorPolicy] | Sequence[RealizationPlan],
    average: BehaviorPolicy,
) -> float:
    """Max deviation between the average profile's realization weights and the
    mean of the per-episode weights; exact averaging keeps this at float noise."""
    if not snapshots:
        raise ValueError("need at least one snapshot")
    plans = [
        p if isinstance(p, RealizationPlan) else realization_plan(tree, p)
        for p in snapshots
    ]
    avg_plan = realization_plan(tree, average)
    worst = 0.0
    inv = 1.0 / len(plans)
    for key, w in avg_plan.weights.items():
        mean = math.fsum(plan.weights[key] for plan in plans) * inv
        worst = max(worst, abs(mean - w))
    return worst


def enumerate_episodes(
    g: GameTree, mu: BehaviorPolicy, nu: BehaviorPolicy
) -> Iterable[tuple[float, list[tuple[int, int, float]], list[tuple[int, int, float]]]]:
    """All (probability, max steps, min steps) triples; small games only."""

    def walk(s: int, h: int, prob: float, smax: list, smin: list):
        x, y = g.max_infoset[s], g.min_infoset[s]
        pa = mu.probs(x, g.max_action_count[x])
        pb = nu.probs(y, g.min_action_count[y])
        for a, pav in enumerate(pa):
            for b, pbv in enumerate(pb):
                joint = prob * pav * pbv
                if joint == 0.0:
                    continue
                r = g.rewards.get((s, a, b), 0.0)
                nmax = smax + [(x, a, r)]
                nmin = smin + [(y, b, r)]
                if h == g.horizon:
                    yield joint, nmax, nmin
                else:
                    for s2, tp in g.transitions[(s, a, b)]:
                        if tp != 0.0:
                            yield from walk(s2, h + 1, joint * tp, nmax, nmin)

    for s, p in g.initial:
        if p != 0.0:
            yield from walk(s, 1, p, [], [])


@dataclass
class EvalReport:
    """One full-model evaluation snapshot of a (possibly averaged) profile."""

    episode: int
    value: float
    br_value_max: float
    br_value_min: float
    exploitability: float
    regret_max: float = float("nan")
    regret_min: float = float("nan")
    bound_max: float = float("nan")
    bound_min: float = float("nan")
    delta: float = float("nan")

    @classmethod
    def of_profile(
        cls,
        g: GameTree,
        mu: BehaviorPolicy,
        nu: BehaviorPolicy,
        episode: int = 0,
        trees: tuple[InfoSetTree, InfoSetTree] | None = None,
    ) -> "EvalReport":
        tmax = trees[0] if trees else None
        tmin = trees[1] if trees else None
        br_max, _ = best_response(g, nu, Role.MAX, tmax)
        br_min, _ = best_response(g, mu, Role.MIN, tmin)
        return cls(
            episode=episode,
            value=expected_value(g, mu, nu),
            br_value_max=br_max,
            br_value_min=br_min,
            exploitability=br_max - br_min,
        )
