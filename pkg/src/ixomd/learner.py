"""Bandit-feedback mirror-descent learner with lazy updates.

The learner sees only its own trajectory (info set, action, reward per level)
plus an oracle for local action counts; it never touches the game model. Each
episode it forms implicit-exploration loss estimates along the visited path,
folds the episode's behavioral probabilities into an incremental average, and
applies the closed-form mirror-descent step that solves

    argmin_mu  eta * <mu, losses> + D(mu || current)

over the sequence-form polytope, where D is the dilated entropy. Because the
loss estimate is supported on the visited path only, the step touches exactly
the H visited info sets, so per-episode work is O(H * A) and memory grows with
visited info sets only.

The incremental average keeps, per visited info set, the running sum of
realization weights mu^u_{1:h}(x, a) over episodes u. Between visits the
behavioral distribution at x is frozen, so the sum advances by (parent sum
delta) * current probabilities; ``finalize_average`` flushes the lag without
mutating the accumulator and normalizes into the average behavioral profile.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

from .game import BehaviorPolicy, InfoSetTree, RealizationPlan, Role, Trajectory, realization_plan

logger = logging.getLogger(__name__)

_RENORM_TOL = 1e-9


@dataclass(frozen=True)
class IXConfig:
    """Learner hyperparameters: step size eta, exploration bonus gamma.

    ``gamma = 0`` gives the plain importance-sampling estimator (no implicit
    exploration). ``horizon`` and ``max_actions`` describe the environment the
    learner is about to face; tuning helpers may leave them 0 when unknown,
    but a learner cannot be constructed from such a config.
    """

    eta: float
    gamma: float
    horizon: int = 0
    max_actions: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gamma", float(self.gamma))
        if not (self.eta > 0.0) or not math.isfinite(self.eta):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")
        if self.gamma < 0.0 or not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be non-negative and finite, got {self.gamma!r}")


@dataclass
class StepLoss:
    """Per-level loss estimates along one trajectory."""

    values: list[float]


def recommended_hyperparams(
    T: int,
    horizon: int | None = None,
    max_actions: int | None = None,
    num_infosets: int | None = None,
    delta: float = 0.1,
) -> IXConfig:
    """Regret-bound-minimizing (eta, gamma) for a T-episode run.

    Knowledge tiers: with horizon, action bound and the player's info-set
    count, both parameters follow the analysis exactly (gamma uses
    iota = log(3 * H * X * A / delta)); without the info-set count, gamma
    falls back to 1 / sqrt(2 * T * A); with only T known (or a degenerate
    action bound of 1), eta = gamma = 1 / sqrt(T).
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if horizon is None or max_actions is None or max_actions < 2:
        root = 1.0 / math.sqrt(T)
        return IXConfig(root, root, horizon or 0, max_actions or 0)
    eta = math.sqrt(math.log(max_actions) / (T * (1 + horizon) * max_actions))
    if num_infosets is not None:
        iota = math.log(3.0 * horizon * num_infosets * max_actions / delta)
        gamma = math.sqrt(iota / (2.0 * T * max_actions))
    else:
        gamma = 1.0 / math.sqrt(2.0 * T * max_actions)
    return IXConfig(eta, gamma, horizon, max_actions)


def backward_log_z(step_probs: list[float], losses: list[float], eta: float) -> list[float]:
    """Log-normalizers of the closed-form update along a trajectory.

    Returns ``z`` with ``z[i]`` the log-normalizer for 0-based level i and
    ``z[H] = 0`` (the empty suffix); computed by the backward recursion
    Z_h = 1 - p_h + p_h * exp(-eta * loss_h + log Z_{h+1}).
    """
    H = len(step_probs)
    z = [0.0] * (H + 1)
    for h in range(H - 1, -1, -1):
        p = step_probs[h]
        w = math.exp(-eta * losses[h] + z[h + 1])
        val = 1.0 - p + p * w
        if not (val > 0.0 and math.isfinite(val)):
            raise OverflowError(
                f"normalizer at level {h + 1} is {val!r} "
                f"(p={p!r}, loss={losses[h]!r}, eta={eta!r})"
            )
        z[h] = math.log(val)
    return z


class IXLearner:
    """Single-owner learner state; methods mutate it sequentially.

    ``action_count_of`` is the only environment access: local action counts
    at encountered info sets. The policy table, average accumulator and
    episode counter are exactly what the checkpoint format stores.
    """

    def __init__(self, role: Role, config: IXConfig, action_count_of: Callable[[int], int]):
        if config.horizon < 1:
            raise ValueError(f"config without a usable horizon: {config.horizon}")
        if config.max_actions < 1:
            raise ValueError(f"config without a usable action bound: {config.max_actions}")
        self.role = role
        self.config = config
        self.action_count_of = action_count_of
        self.policy = BehaviorPolicy(role)
        self.t = 0
        self._mu_dot: dict[int, list[float]] = {}
        self._last: dict[int, float] = {}
        self._pred: dict[int, tuple[int, int] | None] = {}
        self._level: dict[int, int] = {}
        self._accumulated = False

    # -- acting ------------------------------------------------------------

    def act(self, infoset: int, n_actions: int | None = None) -> list[float]:
        """Current distribution at an info set (uniform before first visit)."""
        if n_actions is None and not self.policy.is_stored(infoset):
            n_actions = self.action_count_of(infoset)
        return self.policy.probs(infoset, n_actions)

    # -- loss estimation ----------------------------------------------------

    def estimate_losses(self, traj: Trajectory) -> StepLoss:
        """Implicit-exploration estimates along the visited path.

        The reach is the running product of the learner's own stored
        probabilities, so the trajectory must have been played with
        ``self.policy``. With gamma = 0 this is the plain importance-sampling
        estimate; a zero reach is then a division by zero and flags a
        trajectory inconsistent with the policy.
        """
        if traj.role is not self.role:
            raise ValueError(f"trajectory role {traj.role} != learner role {self.role}")
        gamma = self.config.gamma
        is_max = self.role is Role.MAX
        reach = 1.0
        values: list[float] = []
        for x, a, r in traj.steps:
            reach *= self.act(x)[a]
            loss = (1.0 - r) if is_max else r
            denom = reach + gamma
            if denom <= 0.0:
                raise ZeroDivisionError(
                    f"zero reach at info set {x} with gamma=0; trajectory is "
                    "inconsistent with the current policy"
                )
            values.append(loss / denom)
        return StepLoss(values)

    # -- mirror-descent step --------------------------------------------------

    def omd_update(self, traj: Trajectory, losses: StepLoss) -> None:
        """Closed-form dilated-entropy mirror-descent step along the path.

        Backward pass computes the per-level log-normalizers; the visited
        action at level h is reweighted by exp(-eta * loss_h + log Z_{h+1}) and
        the whole distribution is divided by Z_h. Only visited info sets are
        touched. Advances the episode counter.
        """
        steps = traj.steps
        if len(steps) != self.config.horizon:
            raise ValueError(
                f"trajectory has {len(steps)} steps, learner horizon is {self.config.horizon}"
            )
        if len(losses.values) != len(steps):
            raise ValueError("losses do not match trajectory length")
        eta = self.config.eta
        probs_per_step = [self.act(x) for x, _, _ in steps]
        pvals = [probs_per_step[h][steps[h][1]] for h in range(len(steps))]
        zs = backward_log_z(pvals, losses.values, eta)
        for h, (x, a, _) in enumerate(steps):
            probs = probs_per_step[h]
            inv = math.exp(-zs[h])
            new = [q * inv for q in probs]
            new[a] = pvals[h] * math.exp(-eta * losses.values[h] + zs[h + 1] - zs[h])
            total = math.fsum(new)
            drift = abs(total - 1.0)
            if drift > _RENORM_TOL:
                # Sub-1e-6 drift is ordinary rounding accumulated over many
                # visits; anything larger points at a broken loss or update.
                level = logging.WARNING if drift > 1e-6 else logging.DEBUG
                logger.log(level, "renormalizing info set %d after drift %.3e", x, drift)
                new = [v / total for v in new]
            self.policy.table[x] = new
        self.t += 1
        self._accumulated = False

    # -- incremental averaging --------------------------------------------------

    def accumulate_average(self, traj: Trajectory) -> None:
        """Fold this episode's realization weights into the running average.

        Must be called with the policy that played the episode, i.e. before
        ``omd_update``, and once per episode. Parent info sets are updated
        before their children within the same pass, which is what makes the
        lag-correction by parent-sum deltas exact.
        """
        if self._accumulated:
            raise RuntimeError("accumulate_average already called for this episode")
        t_now = float(self.t + 1)
        prev: tuple[int, int] | None = None
        for h, (x, a, _) in enumerate(traj.steps):
            probs = self.act(x)
            vec = self._mu_dot.get(x)
            if vec is None:
                if x in self._pred:
                    raise RuntimeError(f"info set {x} tracked without accumulator state")
                self._pred[x] = prev
                self._level[x] = h
                vec = [0.0] * len(probs)
                self._mu_dot[x] = vec
                self._last[x] = 0.0
            elif self._pred[x] != prev:
                raise ValueError(
                    f"info set {x} reached through {prev}, previously through "
                    f"{self._pred[x]}; perfect recall violated"
                )
            anchor = t_now if prev is None else self._mu_dot[prev[0]][prev[1]]
            diff = anchor - self._last[x]
            self._last[x] = anchor
            if diff != 0.0:
                for i, p in enumerate(probs):
                    vec[i] += diff * p
            prev = (x, a)
        self._accumulated = True

    def finalize_average(self, episodes: int | None = None) -> BehaviorPolicy:
        """Flush the averaging lag and return the average behavioral profile.

        Non-destructive: the accumulator is copied, so learning can continue
        afterwards (probes use this). Info sets never visited normalize to
        the uniform default by omission. ``episodes`` must equal the number
        of accumulated episodes when given.
        """
        if episodes is None:
            episodes = self.t
        elif episodes != self.t:
            raise ValueError(f"{episodes} episodes requested, {self.t} accumulated")
        flushed: dict[int, list[float]] = {}
        table: dict[int, list[float]] = {}
        for x in sorted(self._mu_dot, key=self._level.__getitem__):
            pred = self._pred[x]
            anchor = float(episodes) if pred is None else flushed[pred[0]][pred[1]]
            diff = anchor - self._last[x]
            probs = self.act(x)
            vec = [m + diff * p for m, p in zip(self._mu_dot[x], probs)]
            flushed[x] = vec
            total = math.fsum(vec)
            if total > 0.0:
                table[x] = [v / total for v in vec]
        return BehaviorPolicy(self.role, table)

    # -- conveniences --------------------------------------------------------

    def observe_episode(self, traj: Trajectory) -> StepLoss:
        """estimate -> accumulate -> update, the per-episode routine."""
        losses = self.estimate_losses(traj)
        self.accumulate_average(traj)
        self.omd_update(traj, losses)
        return losses

    @property
    def visited_infosets(self) -> int:
        return len(self._mu_dot)

    # -- checkpointing ---------------------------------------------------------

    CHECKPOINT_VERSION = 1

    def to_payload(self) -> dict:
        """JSON-serializable snapshot; floats as hex for bit-exact round-trips."""
        return {
            "version": self.CHECKPOINT_VERSION,
            "role": self.role.value,
            "t": self.t,
            "config": {
                "eta": self.config.eta.hex(),
                "gamma": self.config.gamma.hex(),
                "horizon": self.config.horizon,
                "max_actions": self.config.max_actions,
            },
            "policy": {str(x): [v.hex() for v in p] for x, p in self.policy.table.items()},
            "mu_dot": {str(x): [v.hex() for v in vec] for x, vec in self._mu_dot.items()},
            "last_mu_dot": {str(x): v.hex() for x, v in self._last.items()},
            "pred": {str(x): list(p) if p is not None else None for x, p in self._pred.items()},
            "level": {str(x): h for x, h in self._level.items()},
        }

    @classmethod
    def from_payload(cls, payload: dict, action_count_of: Callable[[int], int]) -> "IXLearner":
        if payload.get("version") != cls.CHECKPOINT_VERSION:
            raise ValueError(f"unsupported learner checkpoint version {payload.get('version')!r}")
        cfg = payload["config"]
        config = IXConfig(
            float.fromhex(cfg["eta"]),
            float.fromhex(cfg["gamma"]),
            cfg["horizon"],
            cfg["max_actions"],
        )
        learner = cls(Role(payload["role"]), config, action_count_of)
        learner.t = payload["t"]
        learner.policy.table = {
            int(x): [float.fromhex(v) for v in p] for x, p in payload["policy"].items()
        }
        learner._mu_dot = {
            int(x): [float.fromhex(v) for v in vec] for x, vec in payload["mu_dot"].items()
        }
        learner._last = {int(x): float.fromhex(v) for x, v in payload["last_mu_dot"].items()}
        learner._pred = {
            int(x): tuple(p) if p is not None else None for x, p in payload["pred"].items()
        }
        learner._level = {int(x): h for x, h in payload["level"].items()}
        return learner


def dilated_divergence(
    tree: InfoSetTree, p: BehaviorPolicy, q: BehaviorPolicy
) -> float:
    """Reach-weighted KL between behavioral policies over the info-set tree.

    D(p || q) = sum over (x, a) of p_{1:h}(x, a) * log(p(a|x) / q(a|x)).
    q must be strictly positive wherever p puts realization weight.
    """
    plan = realization_plan(tree, p)
    total = 0.0
    for x in tree.infosets():
        n = tree.action_count[x]
        pv = p.probs(x, n)
        qv = q.probs(x, n)
        pre = plan.prefix[x]
        if pre == 0.0:
            continue
        for a in range(n):
            w = pre * pv[a]
            if w == 0.0:
                continue
            if qv[a] <= 0.0:
                raise ValueError(
                    f"q({a}|{x}) = 0 on the support of p; divergence undefined"
                )
            total += w * math.log(pv[a] / qv[a])
    return total
