"""Built-in game constructors.

Alternating-move card games (Kuhn, Leduc) are encoded into the simultaneous
arena by giving the waiting player a single placeholder action per level and
padding finished hands with absorbing states to the fixed horizon. Chip
outcomes are squeezed into per-step [0, 1] rewards: every step pays the mapped
zero (0.5) except the settling step, which pays 0.5 + chips / (2 * bound).
``GameTree.original_value`` undoes the map for reporting.

``build_random_tree`` grows perfect-recall trees of controllable size for
validation sweeps and complexity checks; info sets are own-history classes
whose granularity is set by observation-label counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameTree


def build_matrix_game(payoff) -> GameTree:
    """One-shot game from a payoff matrix with entries in [0, 1]."""
    mat = np.asarray(payoff, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError(f"payoff must be a non-empty 2-D matrix, got shape {mat.shape}")
    if np.any(mat < 0.0) or np.any(mat > 1.0):
        raise ValueError("payoff entries must lie in [0, 1]")
    n, m = mat.shape
    rewards = {(0, a, b): float(mat[a, b]) for a in range(n) for b in range(m)}
    return GameTree(
        horizon=1,
        max_actions=n,
        min_actions=m,
        levels=[[0]],
        initial=[(0, 1.0)],
        max_infoset=[0],
        min_infoset=[0],
        max_action_count={0: n},
        min_action_count={0: m},
        transitions={},
        rewards=rewards,
    )


# ---------------------------------------------------------------------------
# Alternating-move assembler


class _Assembler:
    """Turn an alternating-move card game into the leveled arena.

    ``rules`` supplies: deals() -> [(node, prob)], is_terminal(node),
    chips(node) for terminal nodes (signed, max player's view),
    mover(node) -> 0/1, num_actions(node), play(node, act) -> [(node', prob)],
    and view(node, player) -> hashable observation history. Terminal nodes are
    padded with single-action levels down to the horizon.
    """

    def __init__(self, rules, horizon: int, chip_bound: float):
        self.rules = rules
        self.horizon = horizon
        self.scale = 0.5 / chip_bound
        self.nodes: list = []
        self.state_ids: dict = {}
        self.levels: list[list[int]] = [[] for _ in range(horizon)]
        self.max_infoset: list[int] = []
        self.min_infoset: list[int] = []
        self.x_ids: dict = {}
        self.y_ids: dict = {}
        self.max_action_count: dict[int, int] = {}
        self.min_action_count: dict[int, int] = {}
        self.transitions: dict = {}
        self.rewards: dict = {}

    def _intern_state(self, level: int, node) -> int:
        key = (level, node)
        s = self.state_ids.get(key)
        if s is not None:
            return s
        s = len(self.nodes)
        self.state_ids[key] = s
        self.nodes.append(node)
        self.levels[level - 1].append(s)
        rules = self.rules
        if rules.is_terminal(node):
            na, nb = 1, 1
        elif rules.mover(node) == 0:
            na, nb = rules.num_actions(node), 1
        else:
            na, nb = 1, rules.num_actions(node)
        x = self._intern_infoset(self.x_ids, self.max_action_count, level, rules.view(node, 0), na)
        y = self._intern_infoset(self.y_ids, self.min_action_count, level, rules.view(node, 1), nb)
        self.max_infoset.append(x)
        self.min_infoset.append(y)
        return s

    @staticmethod
    def _intern_infoset(ids: dict, counts: dict, level: int, view, n_actions: int) -> int:
        key = (level, view)
        u = ids.get(key)
        if u is None:
            u = len(ids)
            ids[key] = u
            counts[u] = n_actions
        elif counts[u] != n_actions:
            raise ValueError(f"observation {key} seen with action counts {counts[u]} and {n_actions}")
        return u

    def build(self) -> GameTree:
        rules = self.rules
        base = 0.5
        initial: dict[int, float] = {}
        for node, p in rules.deals():
            s = self._intern_state(1, node)
            initial[s] = initial.get(s, 0.0) + p
        for h in range(1, self.horizon + 1):
            for s in list(self.levels[h - 1]):
                node = self.nodes[s]
                if rules.is_terminal(node):
                    self.rewards[(s, 0, 0)] = base
                    if h < self.horizon:
                        self.transitions[(s, 0, 0)] = [(self._intern_state(h + 1, node), 1.0)]
                    continue
                m = rules.mover(node)
                for act in range(rules.num_actions(node)):
                    a, b = (act, 0) if m == 0 else (0, act)
                    outs = rules.play(node, act)
                    if any(rules.is_terminal(n2) for n2, _ in outs):
                        if len(outs) != 1:
                            raise ValueError("chance branching into terminal nodes is unsupported")
                        self.rewards[(s, a, b)] = base + self.scale * rules.chips(outs[0][0])
                    else:
                        if h == self.horizon:
                            raise ValueError("hand still live at the final level")
                        self.rewards[(s, a, b)] = base
                    if h < self.horizon:
                        self.transitions[(s, a, b)] = [
                            (self._intern_state(h + 1, n2), p) for n2, p in outs
                        ]
        return GameTree(
            horizon=self.horizon,
            max_actions=max(self.max_action_count.values()),
            min_actions=max(self.min_action_count.values()),
            levels=self.levels,
            initial=sorted(initial.items()),
            max_infoset=self.max_infoset,
            min_infoset=self.min_infoset,
            max_action_count=self.max_action_count,
            min_action_count=self.min_action_count,
            transitions=self.transitions,
            rewards=self.rewards,
            value_scale=self.scale,
            value_offset=self.horizon * base,
        )


# ---------------------------------------------------------------------------
# Kuhn poker

_CHECK, _BET = 0, 1
_FOLD, _CALL = 0, 1


class _KuhnRules:
    """Three cards, one ante each, single bet of 1; chips in [-2, 2].

    Node: (c1, c2, plies, chips) with chips None while the hand is live.
    Betting: P1 checks or bets; P2 then checks/bets (after check) or
    folds/calls (after bet); after check-bet P1 folds or calls.
    """

    def deals(self):
        third = 1.0 / 6.0
        return [
            ((c1, c2, (), None), third)
            for c1 in range(3)
            for c2 in range(3)
            if c1 != c2
        ]

    def is_terminal(self, node) -> bool:
        return node[3] is not None

    def chips(self, node) -> float:
        return node[3]

    def mover(self, node) -> int:
        return len(node[2]) % 2

    def num_actions(self, node) -> int:
        return 2

    def play(self, node, act: int):
        c1, c2, plies, _ = node
        win = 1.0 if c1 > c2 else -1.0
        done = None
        if len(plies) == 0:
            pass
        elif len(plies) == 1:
            if plies[0] == _CHECK:
                if act == _CHECK:
                    done = win  # check-check showdown for the ante
            else:
                done = 1.0 if act == _FOLD else 2.0 * win
        else:
            done = -1.0 if act == _FOLD else 2.0 * win
        return [((c1, c2, plies + (act,), done), 1.0)]

    def view(self, node, player: int):
        return (node[player], node[2])


def build_kuhn() -> GameTree:
    return _Assembler(_KuhnRules(), horizon=3, chip_bound=2.0).build()


# ---------------------------------------------------------------------------
# Leduc hold'em

_LFOLD, _LCALL, _LRAISE = 0, 1, 2


class _LeducRules:
    """Two betting rounds over a 6-card deck (ranks 0..2, two copies each).

    One ante each; round bets are 2 then 4 chips with at most one bet and one
    raise per round; the board card is revealed between rounds. Node:
    (r1, r2, events, board, rnd, seq, t1, t2, chips) where events is the full
    public history (ints for betting plies, ('B', rank) for the reveal), seq
    is the current round's betting sequence and t1/t2 are total contributions
    including the ante. Worst case each player stakes 13 chips.
    """

    def deals(self):
        out = []
        for r1 in range(3):
            for r2 in range(3):
                p = 1.0 / 15.0 if r1 == r2 else 2.0 / 15.0
                out.append(((r1, r2, (), None, 1, (), 1, 1, None), p))
        return out

    def is_terminal(self, node) -> bool:
        return node[8] is not None

    def chips(self, node) -> float:
        return node[8]

    @staticmethod
    def _phase(seq):
        """Return (mover, n_actions) for the current round sequence."""
        if seq == ():
            return 0, 2
        if seq == (_CHECK,):
            return 1, 2
        if seq == (_CHECK, _BET):
            return 0, 3
        if seq == (_BET,):
            return 1, 3
        if seq == (_CHECK, _BET, _LRAISE):
            return 1, 2
        if seq == (_BET, _LRAISE):
            return 0, 2
        raise AssertionError(f"no decision at round sequence {seq}")

    def mover(self, node) -> int:
        return self._phase(node[5])[0]

    def num_actions(self, node) -> int:
        return self._phase(node[5])[1]

    def play(self, node, act: int):
        r1, r2, events, board, rnd, seq, t1, t2, _ = node
        m = self._phase(seq)[0]
        z = 2 if rnd == 1 else 4
        facing = seq not in ((), (_CHECK,))
        new_seq = seq + (act,)
        new_events = events + (act,)
        folded = False
        over = False
        if not facing:
            if act == _BET:
                if m == 0:
                    t1 = t2 + z
                else:
                    t2 = t1 + z
            elif seq == (_CHECK,):
                over = True  # check-check
        else:
            if act == _LFOLD:
                folded = True
            elif act == _LCALL:
                if m == 0:
                    t1 = t2
                else:
                    t2 = t1
                over = True
            else:  # raise
                if m == 0:
                    t1 = t2 + z
                else:
                    t2 = t1 + z
        if folded:
            chips = float(t2) if m == 1 else float(-t1)
            return [((r1, r2, new_events, board, rnd, new_seq, t1, t2, chips), 1.0)]
        if over:
            if rnd == 1:
                outs = []
                for bd in range(3):
                    cnt = 2 - (bd == r1) - (bd == r2)
                    if cnt > 0:
                        nxt = (r1, r2, new_events + (("B", bd),), bd, 2, (), t1, t2, None)
                        outs.append((nxt, cnt / 4.0))
                return outs
            chips = self._showdown(r1, r2, board, t1)
            return [((r1, r2, new_events, board, rnd, new_seq, t1, t2, chips), 1.0)]
        return [((r1, r2, new_events, board, rnd, new_seq, t1, t2, None), 1.0)]

    @staticmethod
    def _showdown(r1: int, r2: int, board: int, stake: int) -> float:
        if r1 == board:
            return float(stake)
        if r2 == board:
            return float(-stake)
        if r1 != r2:
            return float(stake) if r1 > r2 else float(-stake)
        return 0.0

    def view(self, node, player: int):
        return (node[player], node[2])


def build_leduc() -> GameTree:
    return _Assembler(_LeducRules(), horizon=8, chip_bound=13.0).build()


# ---------------------------------------------------------------------------
# Random perfect-recall trees


@dataclass(frozen=True)
class RandomTreeParams:
    """Shape of a random game: fixed action counts, chance branching, seed.

    ``max_obs``/``min_obs`` bound how many distinct observation labels a
    player can see below one of their sequences; info sets are own-history
    classes, so labels control the info-set count independently of the state
    count. None means the chance branch index is fully revealed.
    """

    horizon: int
    max_actions: int
    min_actions: int
    branching: int
    seed: int
    max_obs: int | None = None
    min_obs: int | None = None
    reward_dist: str = "uniform"
    max_states: int = 500_000

    def __post_init__(self):
        for name in ("horizon", "max_actions", "min_actions", "branching"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.reward_dist not in ("uniform", "bernoulli"):
            raise ValueError(f"unknown reward distribution {self.reward_dist!r}")


def build_random_tree(params: RandomTreeParams) -> GameTree:
    """Grow a random tree; same params (incl. seed) build the identical game."""
    rng = np.random.default_rng(params.seed)
    H, A, B, K = params.horizon, params.max_actions, params.min_actions, params.branching
    m_max = params.max_obs if params.max_obs is not None else K
    m_min = params.min_obs if params.min_obs is not None else K

    def draw_reward() -> float:
        if params.reward_dist == "uniform":
            return float(rng.random())
        return float(rng.integers(0, 2))

    def random_dist(n: int) -> list[float]:
        w = rng.random(n) + 1e-3
        w /= w.sum()
        return [float(v) for v in w]

    levels: list[list[int]] = [[] for _ in range(H)]
    max_infoset: list[int] = []
    min_infoset: list[int] = []
    x_ids: dict = {}
    y_ids: dict = {}
    transitions: dict = {}
    rewards: dict = {}
    total = 0

    def new_state(level: int, xkey, ykey) -> int:
        nonlocal total
        s = total
        total += 1
        levels[level - 1].append(s)
        max_infoset.append(x_ids.setdefault(xkey, len(x_ids)))
        min_infoset.append(y_ids.setdefault(ykey, len(y_ids)))
        return s

    if K > params.max_states:
        raise ValueError(f"level 1 would hold {K} states, over the {params.max_states} cap")
    roots = [new_state(1, ("r", i % m_max), ("r", i % m_min)) for i in range(K)]
    initial = list(zip(roots, random_dist(K)))
    for h in range(1, H + 1):
        here = levels[h - 1]
        if h < H and len(here) * A * B * K + total > params.max_states:
            raise ValueError(
                f"level {h + 1} would push the tree over the {params.max_states} state cap"
            )
        for s in here:
            x, y = max_infoset[s], min_infoset[s]
            for a in range(A):
                for b in range(B):
                    rewards[(s, a, b)] = draw_reward()
                    if h == H:
                        continue
                    probs = random_dist(K)
                    succs = []
                    for j, p in enumerate(probs):
                        xkey = (x, a, (b * K + j) % m_max)
                        ykey = (y, b, (a * K + j) % m_min)
                        succs.append((new_state(h + 1, xkey, ykey), p))
                    transitions[(s, a, b)] = succs
    return GameTree(
        horizon=H,
        max_actions=A,
        min_actions=B,
        levels=levels,
        initial=initial,
        max_infoset=max_infoset,
        min_infoset=min_infoset,
        max_action_count={x: A for x in range(len(x_ids))},
        min_action_count={y: B for y in range(len(y_ids))},
        transitions=transitions,
        rewards=rewards,
    )


# ---------------------------------------------------------------------------
# CLI-facing constructor


def game_from_spec(spec: str) -> GameTree:
    """Build a game from a command-line descriptor.

    Accepted forms: ``kuhn``, ``leduc``, ``matrix:<file>`` (whitespace-
    separated payoff rows), ``random:H,A,B,branching,seed[,max_obs[,min_obs]]``
    and ``file:<path>`` for the textual game format.
    """
    if spec == "kuhn":
        return build_kuhn()
    if spec == "leduc":
        return build_leduc()
    if spec.startswith("matrix:"):
        mat = np.loadtxt(spec.split(":", 1)[1], ndmin=2)
        return build_matrix_game(mat)
    if spec.startswith("random:"):
        raw = spec.split(":", 1)[1].split(",")
        if not 5 <= len(raw) <= 7:
            raise ValueError(
                "random game spec needs H,A,B,branching,seed with optional ,max_obs,min_obs"
            )
        vals = [int(v) for v in raw]
        extra = {}
        if len(vals) >= 6:
            extra["max_obs"] = vals[5]
        if len(vals) == 7:
            extra["min_obs"] = vals[6]
        return build_random_tree(RandomTreeParams(*vals[:5], **extra))
    if spec.startswith("file:"):
        from .gamefile import load_game

        return load_game(spec.split(":", 1)[1])
    raise ValueError(f"unknown game spec {spec!r}")
