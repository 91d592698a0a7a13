"""Textual game description files.

Line-oriented grammar; fields are whitespace-separated, `#` starts a comment,
blank lines are ignored. Record kinds:

    game H A B                  header, must come first
    rewardmap SCALE OFFSET      optional affine map back to original units
    state ID LEVEL XID YID      one per state (LEVEL is 1-based)
    xactions XID COUNT          action count of a max-player info set
    yactions YID COUNT          action count of a min-player info set
    init STATE PROB             initial-distribution entry (level-1 states)
    trans STATE A B SUCC PROB   one successor of the kernel at (STATE, A, B)
    reward STATE A B VALUE      reward entry; omitted entries default to 0

State and info-set ids are non-negative integers; states must be numbered
0..S-1. Probabilities and rewards are written with ``repr`` so that
parse -> serialize -> parse is the identity on every stored float.
"""

from __future__ import annotations

from .game import GameTree


def serialize_game(g: GameTree) -> str:
    lines = [f"game {g.horizon} {g.max_actions} {g.min_actions}"]
    if g.value_scale != 1.0 or g.value_offset != 0.0:
        lines.append(f"rewardmap {g.value_scale!r} {g.value_offset!r}")
    for h, states in enumerate(g.levels, start=1):
        for s in sorted(states):
            lines.append(f"state {s} {h} {g.max_infoset[s]} {g.min_infoset[s]}")
    for x in sorted(g.max_action_count):
        lines.append(f"xactions {x} {g.max_action_count[x]}")
    for y in sorted(g.min_action_count):
        lines.append(f"yactions {y} {g.min_action_count[y]}")
    for s, p in sorted(g.initial):
        lines.append(f"init {s} {p!r}")
    for (s, a, b) in sorted(g.transitions):
        for s2, p in g.transitions[(s, a, b)]:
            lines.append(f"trans {s} {a} {b} {s2} {p!r}")
    for (s, a, b) in sorted(g.rewards):
        lines.append(f"reward {s} {a} {b} {g.rewards[(s, a, b)]!r}")
    return "\n".join(lines) + "\n"


class GameFileError(ValueError):
    """Raised on malformed game files, with a line reference."""


def _fail(lineno: int, msg: str) -> GameFileError:
    return GameFileError(f"line {lineno}: {msg}")


def parse_game(text: str) -> GameTree:
    header: tuple[int, int, int] | None = None
    value_scale, value_offset = 1.0, 0.0
    state_rows: list[tuple[int, int, int, int]] = []
    xactions: dict[int, int] = {}
    yactions: dict[int, int] = {}
    initial: list[tuple[int, float]] = []
    transitions: dict[tuple[int, int, int], list[tuple[int, float]]] = {}
    rewards: dict[tuple[int, int, int], float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind, args = fields[0], fields[1:]
        try:
            if kind == "game":
                if header is not None:
                    raise _fail(lineno, "duplicate game header")
                h, a, b = (int(v) for v in args)
                header = (h, a, b)
            elif header is None:
                raise _fail(lineno, f"'{kind}' record before game header")
            elif kind == "rewardmap":
                value_scale, value_offset = (float(v) for v in args)
            elif kind == "state":
                s, lev, x, y = (int(v) for v in args)
                state_rows.append((s, lev, x, y))
            elif kind == "xactions":
                x, n = (int(v) for v in args)
                xactions[x] = n
            elif kind == "yactions":
                y, n = (int(v) for v in args)
                yactions[y] = n
            elif kind == "init":
                initial.append((int(args[0]), float(args[1])))
            elif kind == "trans":
                s, a, b, s2 = (int(v) for v in args[:4])
                transitions.setdefault((s, a, b), []).append((s2, float(args[4])))
            elif kind == "reward":
                s, a, b = (int(v) for v in args[:3])
                rewards[(s, a, b)] = float(args[3])
            else:
                raise _fail(lineno, f"unknown record kind '{kind}'")
        except GameFileError:
            raise
        except (ValueError, IndexError) as exc:
            raise _fail(lineno, f"malformed '{kind}' record: {exc}") from None

    if header is None:
        raise GameFileError("missing game header")
    horizon, max_actions, min_actions = header
    if horizon < 1:
        raise GameFileError(f"horizon {horizon} < 1")
    num_states = len(state_rows)
    ids = sorted(s for s, _, _, _ in state_rows)
    if ids != list(range(num_states)):
        raise GameFileError("state ids must be exactly 0..S-1 with no duplicates")
    levels: list[list[int]] = [[] for _ in range(horizon)]
    max_infoset = [0] * num_states
    min_infoset = [0] * num_states
    for s, lev, x, y in state_rows:
        if not 1 <= lev <= horizon:
            raise GameFileError(f"state {s} has level {lev} outside 1..{horizon}")
        levels[lev - 1].append(s)
        max_infoset[s] = x
        min_infoset[s] = y
    for x in set(max_infoset):
        if x not in xactions:
            raise GameFileError(f"max info set {x} lacks an xactions record")
    for y in set(min_infoset):
        if y not in yactions:
            raise GameFileError(f"min info set {y} lacks a yactions record")
    for x, n in xactions.items():
        if not 1 <= n <= max_actions:
            raise GameFileError(f"xactions {x} count {n} outside 1..{max_actions}")
    for y, n in yactions.items():
        if not 1 <= n <= min_actions:
            raise GameFileError(f"yactions {y} count {n} outside 1..{min_actions}")
    for refs, what in ((initial, "init"),):
        for s, _ in refs:
            if not 0 <= s < num_states:
                raise GameFileError(f"{what} record references unknown state {s}")
    for (s, a, b), succs in transitions.items():
        if not 0 <= s < num_states:
            raise GameFileError(f"trans record references unknown state {s}")
        for s2, _ in succs:
            if not 0 <= s2 < num_states:
                raise GameFileError(f"trans record references unknown successor {s2}")
    for s, a, b in rewards:
        if not 0 <= s < num_states:
            raise GameFileError(f"reward record references unknown state {s}")
    return GameTree(
        horizon=horizon,
        max_actions=max_actions,
        min_actions=min_actions,
        levels=levels,
        initial=initial,
        max_infoset=max_infoset,
        min_infoset=min_infoset,
        max_action_count=xactions,
        min_action_count=yactions,
        transitions=transitions,
        rewards=rewards,
        value_scale=value_scale,
        value_offset=value_offset,
    )


def save_game(g: GameTree, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_game(g))


def load_game(path: str) -> GameTree:
    with open(path) as fh:
        return parse_game(fh.read())
