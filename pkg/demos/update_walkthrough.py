"""One episode of the learner, by hand: estimate, normalize, update.

Plays a single episode on Kuhn poker and prints every quantity the learner
derives from it -- the visited info sets, the implicit-exploration loss
estimates with their reach denominators, the backward log-normalizers, and
the resulting closed-form policy change at each visited info set.
"""

from __future__ import annotations

import math

import numpy as np

from ixomd import (
    IXConfig,
    IXLearner,
    Role,
    backward_log_z,
    build_infoset_tree,
    build_kuhn,
    sample_episode,
    uniform_policy,
)

ETA = 0.2
GAMMA = 0.05
SEED = 9


def main() -> None:
    g = build_kuhn()
    tree = build_infoset_tree(g, Role.MAX)
    learner = IXLearner(
        Role.MAX,
        IXConfig(eta=ETA, gamma=GAMMA, horizon=g.horizon, max_actions=2),
        tree.action_count.__getitem__,
    )
    rng = np.random.default_rng(SEED)

    print(f"eta {ETA}, gamma {GAMMA}; max player starts uniform\n")
    traj, _ = sample_episode(g, learner.policy, uniform_policy(Role.MIN), rng)
    print("observed trajectory (info set, action, reward):")
    for h, (x, a, r) in enumerate(traj.steps, start=1):
        print(f"  level {h}: info set {x:>2}, action {a}, reward {r:g}")

    est = learner.estimate_losses(traj)
    print("\nloss estimates  (loss at level h) / (own reach + gamma):")
    reach = 1.0
    for h, ((x, a, r), value) in enumerate(zip(traj.steps, est.values), start=1):
        reach *= learner.act(x)[a]
        loss = 1.0 - r  # the max player turns reward into loss
        print(
            f"  level {h}: loss {loss:g}, reach {reach:.4f} "
            f"-> estimate {loss:g}/({reach:.4f}+{GAMMA}) = {value:.4f}"
        )

    probs = [learner.act(x)[a] for x, a, _ in traj.steps]
    zs = backward_log_z(probs, est.values, ETA)
    print("\nbackward log-normalizers (level -> log Z):")
    for h, z in enumerate(zs[:-1], start=1):
        print(f"  level {h}: {z:+.6f}")

    before = {x: list(learner.act(x)) for x, _, _ in traj.steps}
    learner.omd_update(traj, est)
    print("\npolicy change at the visited info sets:")
    for h, (x, a, _) in enumerate(traj.steps, start=1):
        old, new = before[x], learner.act(x)
        moved = " ".join(f"{p:.4f}->{q:.4f}" for p, q in zip(old, new))
        print(f"  info set {x:>2} (played action {a}): {moved}")
    print("\nthe played action's probability is reweighted by exp(-eta * estimate)")
    print("times the continuation normalizer, then renormalized through the")
    print("level's own Z; unvisited info sets are untouched, so the learner")
    print(f"stores only {len(learner.policy.table)} of {tree.num_infosets} info sets after this episode.")

    x, a, _ = traj.steps[0]
    expected = before[x][a] * math.exp(-ETA * est.values[0] + zs[1]) / math.exp(zs[0])
    print(f"\nfirst level by hand: {before[x][a]:.4f} * exp(-eta*est + logZ_2) / Z_1 = {expected:.6f}")
    print(f"learner's value:     {learner.act(x)[a]:.6f}")


if __name__ == "__main__":
    main()
