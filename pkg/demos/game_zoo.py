"""Tour of the built-in games: sizes, values, and how bad uniform play is.

Builds each game the harness knows how to spell, prints its structural
numbers, and evaluates the uniform profile exactly (expected value plus
both best responses). Run it to sanity-check an install.
"""

from __future__ import annotations

from ixomd import (
    Role,
    build_infoset_tree,
    exploitability,
    expected_value,
    game_from_spec,
    uniform_policy,
    validate_game,
)

SPECS = [
    "kuhn",
    "leduc",
    "random:3,2,2,2,7",
    "random:4,3,2,2,11,2,2",
]


def describe(spec: str) -> None:
    g = game_from_spec(spec)
    report = validate_game(g)
    assert report, f"{spec} failed validation: {report.problems[:3]}"
    tmax = build_infoset_tree(g, Role.MAX)
    tmin = build_infoset_tree(g, Role.MIN)
    mu, nu = uniform_policy(Role.MAX), uniform_policy(Role.MIN)
    value = expected_value(g, mu, nu)
    gap = exploitability(g, mu, nu)
    print(f"{spec}")
    print(f"  horizon {g.horizon}, states {g.num_states}")
    print(f"  info sets: max {tmax.num_infosets}, min {tmin.num_infosets}")
    print(f"  reward scale {g.value_scale:g} (stored rewards live in [0, 1])")
    print(f"  uniform vs uniform value  {value:.6f}")
    print(f"  uniform profile exploitability {gap:.6f}")
    if g.value_scale != 1.0:
        print(f"  ... which is {gap / g.value_scale:.6f} in the game's original units")
    print()


def main() -> None:
    print("=== built-in game zoo ===\n")
    for spec in SPECS:
        describe(spec)
    print("random:<H,A,B,branching,seed[,max_obs,min_obs]> games are seeded:")
    print("the same spec always builds the same tree.")


if __name__ == "__main__":
    main()
