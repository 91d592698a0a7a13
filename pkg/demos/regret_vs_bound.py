"""Measured regret against its high-probability guarantee.

The max player learns against a fixed uniform opponent on Kuhn poker while
the harness tracks exact empirical regret online. The printed table compares
that measured regret to the theoretical bound for the tuned rates -- the
guarantee is loose by design (it holds for every game of this size), so
expect a couple of orders of magnitude of slack.
"""

from __future__ import annotations

from ixomd import (
    Role,
    RunConfig,
    build_infoset_tree,
    build_kuhn,
    run_vs_opponent,
    theorem2_bound_tuned,
)

EPISODES = 20_000
DELTA = 0.1


def main() -> None:
    g = build_kuhn()
    tree = build_infoset_tree(g, Role.MAX)
    x, a, h = tree.num_infosets, max(tree.action_count.values()), g.horizon
    cfg = RunConfig(
        game="kuhn",
        episodes=EPISODES,
        delta=DELTA,
        opponent="fixed:uniform",
        track_regret=True,
    )
    print(
        f"max player vs fixed uniform opponent, T={EPISODES}, delta={DELTA}\n"
        f"(X={x} info sets, A={a} actions, horizon {h})\n"
    )
    report = run_vs_opponent(cfg)[0]
    print(f"{'episode':>8}  {'measured regret':>15}  {'bound':>10}  {'ratio':>7}")
    for row in report.rows:
        ratio = row.regret_max / row.bound_max
        print(
            f"{row.episode:>8}  {row.regret_max:>15.2f}  {row.bound_max:>10.1f}  {ratio:>7.4f}"
        )

    print("\nthe bound at a few scales (tuned rates, same game):")
    for t in (10**3, 10**4, 10**5, 10**6):
        print(f"  T={t:>7}: {theorem2_bound_tuned(t, x, a, h, DELTA):>10.1f}")
    print("\nboth sides grow like sqrt(T); the measured curve keeps the same")
    print("shape as the guarantee, just far below it on this small game.")


if __name__ == "__main__":
    main()
