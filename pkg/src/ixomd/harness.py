"""Experiment runner: configs, play loops, probes, CSV output, checkpoints.

The harness owns the separation of concerns the library is built around: the
learners receive only their own trajectories (info set ids, actions, rewards),
while evaluation probes get the full game model to compute exploitability and
regret. A run is fully determined by (config, seed); wall-clock timing is off
by default so emitted files are byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .game import (
    BehaviorPolicy,
    GameTree,
    InfoSetTree,
    RealizationPlan,
    Role,
    build_infoset_tree,
    realization_plan,
    sample_episode,
    validate_game,
)
from .games import game_from_spec
from .learner import IXConfig, IXLearner, recommended_hyperparams
from .evaluation import (
    LossTable,
    best_response,
    best_sequence_value,
    exact_loss_vector,
    theorem2_bound,
)

CSV_HEADER = "episode,exploitability,regret_max,regret_min,bound_max,bound_min,wall_ms"
SNAPSHOT_EPISODE_CAP = 10_000
REGRET_EPISODE_CAP = 100_000
CHECKPOINT_VERSION = 1


class ConfigError(ValueError):
    """A run configuration violates its invariants."""


class CheckpointError(RuntimeError):
    """A checkpoint file is unreadable, corrupted, or incompatible."""


class OpponentFileError(ValueError):
    """A fixed or scripted opponent file is malformed."""


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run, minus the seed-specific stream.

    ``eta``/``gamma`` may be explicit floats or "auto" (tuned from T and the
    game's counts). ``eval_every`` is a probe stride, or "geom" for powers of
    two plus the final episode; ``probes`` overrides the schedule outright.
    ``opponent`` is "selfplay", "fixed:uniform", "fixed:<policy file>", or
    "scripted-adversary:<file>". Snapshot mode stores every iterate and is
    capped to small runs; regret tracking defaults to on for runs up to
    10^5 episodes and off beyond.
    """

    game: str
    episodes: int
    eta: float | str = "auto"
    gamma: float | str = "auto"
    delta: float = 0.1
    eval_every: int | str = "geom"
    seeds: tuple[int, ...] = (0,)
    snapshot: bool = False
    out: str | None = None
    opponent: str = "selfplay"
    checkpoint: str | None = None
    checkpoint_at: int | None = None
    resume: str | None = None
    probes: tuple[int, ...] | None = None
    track_regret: bool | None = None
    timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        for name in ("eta", "gamma"):
            v = getattr(self, name)
            if isinstance(v, str):
                if v != "auto":
                    raise ConfigError(f"{name} must be a number or 'auto', got {v!r}")
            elif not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        if isinstance(self.eta, (int, float)) and not self.eta > 0.0:
            raise ConfigError("explicit eta must be positive")
        if isinstance(self.gamma, (int, float)) and self.gamma < 0.0:
            raise ConfigError("explicit gamma must be non-negative")
        if self.eval_every != "geom":
            if not isinstance(self.eval_every, int) or self.eval_every < 1:
                raise ConfigError(
                    f"eval_every must be 'geom' or an integer >= 1, got {self.eval_every!r}"
                )
        if self.probes is not None:
            if not self.probes:
                raise ConfigError("probes override must be non-empty")
            if list(self.probes) != sorted(set(self.probes)):
                raise ConfigError("probes must be strictly increasing")
            if self.probes[0] < 1 or self.probes[-1] > self.episodes:
                raise ConfigError("probes must lie within [1, episodes]")
        if self.snapshot and self.episodes > SNAPSHOT_EPISODE_CAP:
            raise ConfigError(
                f"snapshot mode stores every iterate and is capped to "
                f"{SNAPSHOT_EPISODE_CAP} episodes; got {self.episodes}"
            )
        if self.checkpoint_at is not None:
            if self.checkpoint is None:
                raise ConfigError("checkpoint_at requires a checkpoint path")
            if not 0 <= self.checkpoint_at <= self.episodes:
                raise ConfigError(
                    f"checkpoint_at must lie in [0, episodes], got {self.checkpoint_at}"
                )
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        _parse_opponent_spec(self.opponent)

    def identity(self, seed: int) -> dict:
        """The fields a resumed run must agree on, as a comparable dict."""
        return {
            "game": self.game,
            "episodes": self.episodes,
            "eta": self.eta if isinstance(self.eta, str) else float(self.eta).hex(),
            "gamma": self.gamma if isinstance(self.gamma, str) else float(self.gamma).hex(),
            "delta": float(self.delta).hex(),
            "eval_every": self.eval_every,
            "snapshot": self.snapshot,
            "opponent": self.opponent,
            "probes": list(self.probes) if self.probes is not None else None,
            "track_regret": self.track_regret,
            "seed": seed,
        }


def run_config_from_dict(data: dict) -> RunConfig:
    """Build a RunConfig from parsed structured text (e.g. a JSON config file)."""
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    coerced = dict(data)
    for key in ("seeds", "probes"):
        if coerced.get(key) is not None:
            coerced[key] = tuple(int(v) for v in coerced[key])
    return RunConfig(**coerced)


def probe_schedule(
    episodes: int, eval_every: int | str, probes: tuple[int, ...] | None = None
) -> list[int]:
    """Episodes at which the average profile is evaluated; always sorted.

    The default geometric schedule takes powers of two plus the final episode,
    which gives evenly spaced points on a log axis for rate fitting. A stride
    schedule hits every multiple and always appends the final episode.
    """
    if probes is not None:
        return list(probes)
    if eval_every == "geom":
        out = []
        e = 1
        while e < episodes:
            out.append(e)
            e *= 2
        out.append(episodes)
        return out
    out = list(range(eval_every, episodes + 1, eval_every))
    if not out or out[-1] != episodes:
        out.append(episodes)
    return out


# --------------------------------------------------------------------------
# opponents


def _parse_opponent_spec(spec: str) -> tuple[str, str | None]:
    if spec == "selfplay":
        return "selfplay", None
    if spec.startswith("fixed:"):
        ref = spec[len("fixed:"):]
        if not ref:
            raise ConfigError("fixed opponent needs 'uniform' or a policy file path")
        return "fixed", ref
    if spec.startswith("scripted-adversary:"):
        ref = spec[len("scripted-adversary:"):]
        if not ref:
            raise ConfigError("scripted adversary needs a file path")
        return "scripted", ref
    raise ConfigError(
        f"opponent must be 'selfplay', 'fixed:<uniform|file>', or "
        f"'scripted-adversary:<file>', got {spec!r}"
    )


def _parse_policy_table(raw: dict, where: str) -> dict[int, list[float]]:
    table: dict[int, list[float]] = {}
    for key, probs in raw.items():
        try:
            x = int(key)
        except (TypeError, ValueError):
            raise OpponentFileError(f"{where}: info set key {key!r} is not an integer")
        if not isinstance(probs, list) or not probs:
            raise OpponentFileError(f"{where}: info set {x} needs a non-empty list")
        vec = [float(p) for p in probs]
        if any(p < 0.0 for p in vec):
            raise OpponentFileError(f"{where}: info set {x} has a negative probability")
        if abs(math.fsum(vec) - 1.0) > 1e-9:
            raise OpponentFileError(f"{where}: info set {x} probabilities sum to {math.fsum(vec)!r}")
        table[x] = vec
    return table


def save_policy(policy: BehaviorPolicy, path: str | Path) -> None:
    """Write a policy as JSON: {"role": ..., "table": {infoset: [probs...]}}."""
    doc = {"role": policy.role.value, "table": {str(x): p for x, p in policy.table.items()}}
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_policy(path: str | Path, role: Role) -> BehaviorPolicy:
    """Read a policy file, checking the role tag and distribution sanity."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise OpponentFileError(f"cannot read policy file {path}: {e}") from e
    if not isinstance(doc, dict):
        raise OpponentFileError(f"policy file {path} must hold a JSON object")
    if doc.get("role") != role.value:
        raise OpponentFileError(
            f"policy file {path} is for role {doc.get('role')!r}, expected {role.value!r}"
        )
    table = doc.get("table")
    if not isinstance(table, dict):
        raise OpponentFileError(
            f"policy file {path} needs a 'table' object mapping info sets to distributions"
        )
    return BehaviorPolicy(role, _parse_policy_table(table, str(path)))


class _Opponent:
    """Per-episode policy source for the non-learning side (always min)."""

    def __init__(self, policies: list[BehaviorPolicy], schedule: list[int] | None):
        self.policies = policies
        self.schedule = schedule
        self.fixed = len(policies) == 1 and schedule is None

    def policy_at(self, t: int) -> BehaviorPolicy:
        if self.fixed:
            return self.policies[0]
        if self.schedule is None:
            return self.policies[(t - 1) % len(self.policies)]
        if t > len(self.schedule):
            raise OpponentFileError(
                f"scripted adversary schedule covers {len(self.schedule)} episodes, "
                f"episode {t} requested"
            )
        return self.policies[self.schedule[t - 1]]


def load_opponent(spec: str) -> _Opponent | None:
    """Materialize the opponent for a run; None means self-play."""
    kind, ref = _parse_opponent_spec(spec)
    if kind == "selfplay":
        return None
    if kind == "fixed":
        if ref == "uniform":
            return _Opponent([BehaviorPolicy(Role.MIN)], None)
        return _Opponent([load_policy(ref, Role.MIN)], None)
    try:
        doc = json.loads(Path(ref).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise OpponentFileError(f"cannot read scripted adversary file {ref}: {e}") from e
    if not isinstance(doc, dict):
        raise OpponentFileError(f"scripted adversary file {ref} must hold a JSON object")
    if doc.get("role", Role.MIN.value) != Role.MIN.value:
        raise OpponentFileError(f"scripted adversary {ref} must play the min role")
    raw = doc.get("policies")
    if not isinstance(raw, list) or not raw:
        raise OpponentFileError(f"{ref}: 'policies' must be a non-empty list")
    policies = [
        BehaviorPolicy(Role.MIN, _parse_policy_table(p, f"{ref} policy {i}"))
        for i, p in enumerate(raw)
    ]
    schedule = doc.get("schedule", "cycle")
    if schedule == "cycle":
        return _Opponent(policies, None)
    if not isinstance(schedule, list):
        raise OpponentFileError(f"{ref}: 'schedule' must be \"cycle\" or a list of indices")
    idx = [int(i) for i in schedule]
    if any(i < 0 or i >= len(policies) for i in idx):
        raise OpponentFileError(f"{ref}: schedule indexes outside the policy list")
    return _Opponent(policies, idx)


# --------------------------------------------------------------------------
# online regret tracking


class RegretTracker:
    """Accumulates sum_t <mu^t, loss^t> and the summed loss table online.

    The empirical regret at any point is the accumulated instantaneous loss
    minus the best fixed sequence-form policy against the summed table, which
    by linearity equals the max over comparators of the per-episode gaps.
    A constant loss table (fixed opponent) enables a scaled fast path.
    """

    def __init__(self, tree: InfoSetTree, constant_loss: LossTable | None = None):
        self.tree = tree
        self.t = 0
        self.inst = 0.0
        self.constant_loss = constant_loss
        self.cumulative: LossTable = {}
        self._constant_best: float | None = None

    def record(self, policy: BehaviorPolicy, loss: LossTable | None = None) -> None:
        table = self.constant_loss if loss is None else loss
        if table is None:
            raise ValueError("no loss table to record")
        plan = realization_plan(self.tree, policy)
        self.inst += math.fsum(plan.weights[k] * v for k, v in table.items())
        self.t += 1
        if self.constant_loss is None:
            for k, v in table.items():
                self.cumulative[k] = self.cumulative.get(k, 0.0) + v

    def regret(self) -> float:
        if self.t == 0:
            return 0.0
        if self.constant_loss is not None:
            if self._constant_best is None:
                self._constant_best, _ = best_sequence_value(
                    self.tree, self.constant_loss, maximize=False
                )
            return self.inst - self.t * self._constant_best
        best, _ = best_sequence_value(self.tree, self.cumulative, maximize=False)
        return self.inst - best

    def to_payload(self) -> dict:
        return {
            "t": self.t,
            "inst": self.inst.hex(),
            "cumulative": {f"{x},{a}": v.hex() for (x, a), v in self.cumulative.items()},
        }

    def restore(self, payload: dict) -> None:
        self.t = payload["t"]
        self.inst = float.fromhex(payload["inst"])
        self.cumulative = {}
        for key, v in payload["cumulative"].items():
            x, a = key.split(",")
            self.cumulative[(int(x), int(a))] = float.fromhex(v)


# --------------------------------------------------------------------------
# reports


@dataclass
class ProbeRow:
    """One evaluation point; regret/bound columns are NaN when not tracked."""

    episode: int
    exploitability: float
    regret_max: float
    regret_min: float
    bound_max: float
    bound_min: float
    wall_ms: float

    def values(self) -> list[float]:
        return [
            self.exploitability,
            self.regret_max,
            self.regret_min,
            self.bound_max,
            self.bound_min,
            self.wall_ms,
        ]


@dataclass
class RunReport:
    """Everything one seed's run produced, plus the echo needed to redo it."""

    config: RunConfig
    seed: int
    rows: list[ProbeRow]
    avg_max: BehaviorPolicy
    avg_min: BehaviorPolicy
    eta_max: float
    gamma_max: float
    eta_min: float
    gamma_min: float
    value_scale: float
    versions: dict[str, str]
    snapshots: list[tuple[BehaviorPolicy, BehaviorPolicy]] | None = None
    checkpointed_at: int | None = None

    def __post_init__(self):
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.episode <= prev.episode:
                raise ValueError("probe episodes must be strictly increasing")

    @property
    def final_exploitability(self) -> float:
        return self.rows[-1].exploitability if self.rows else float("nan")

    def summary(self) -> dict:
        out = {
            "config": _config_echo(self.config),
            "seed": self.seed,
            "eta": {"max": self.eta_max, "min": self.eta_min},
            "gamma": {"max": self.gamma_max, "min": self.gamma_min},
            "probes": len(self.rows),
            "final_episode": self.rows[-1].episode if self.rows else 0,
            "final_exploitability": self.final_exploitability,
            "final_exploitability_original_units": (
                self.final_exploitability / self.value_scale if self.rows else float("nan")
            ),
            "value_scale": self.value_scale,
            "versions": self.versions,
        }
        if self.rows and math.isfinite(self.rows[-1].regret_max):
            out["final_regret_max"] = self.rows[-1].regret_max
        return out


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    echo["seeds"] = list(cfg.seeds)
    echo["probes"] = list(cfg.probes) if cfg.probes is not None else None
    return echo


def _versions() -> dict[str, str]:
    from . import __version__

    return {
        "ixomd": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


# --------------------------------------------------------------------------
# CSV / plot data


def _fmt(v: float) -> str:
    return f"{v:.16e}"


def emit_csv(report: RunReport) -> str:
    """The probe table as text: fixed header, 17-significant-digit decimals."""
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(",".join([str(row.episode)] + [_fmt(v) for v in row.values()]))
    return "\n".join(lines) + "\n"


def write_csv(report: RunReport, path: str | Path) -> None:
    Path(path).write_text(emit_csv(report))


def parse_csv(text: str) -> list[ProbeRow]:
    """Inverse of emit_csv; round-trips every row exactly."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if ",".join(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(ProbeRow(int(rec[0]), *(float(v) for v in rec[1:])))
    return rows


def plot_data_lines(rows: Sequence[ProbeRow]) -> list[str]:
    """(log10 episode, log10 exploitability) pairs for slope fitting.

    Rows with non-positive exploitability have no log and are skipped.
    """
    out = []
    for row in rows:
        if row.exploitability > 0.0:
            out.append(f"{_fmt(math.log10(row.episode))} {_fmt(math.log10(row.exploitability))}")
    return out


def loglog_slope(rows: Sequence[ProbeRow], min_episode: int = 1) -> float:
    """Least-squares slope of log10 exploitability against log10 episode."""
    pts = [
        (math.log10(r.episode), math.log10(r.exploitability))
        for r in rows
        if r.episode >= min_episode and r.exploitability > 0.0
    ]
    if len(pts) < 2:
        raise ValueError("need at least two positive probes to fit a slope")
    xs, ys = zip(*pts)
    slope, _ = np.polyfit(np.array(xs), np.array(ys), 1)
    return float(slope)


# --------------------------------------------------------------------------
# checkpoints


def _canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def save_checkpoint(path: str | Path, doc: dict) -> None:
    """Write a versioned, checksummed snapshot of a run in progress."""
    body = dict(doc)
    body["version"] = CHECKPOINT_VERSION
    body["checksum"] = hashlib.sha256(_canonical_json(body).encode()).hexdigest()
    Path(path).write_text(_canonical_json(body))


def load_checkpoint(path: str | Path) -> dict:
    """Read a checkpoint, refusing version mismatches and corruption."""
    try:
        body = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if body.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {body.get('version')!r} unsupported "
            f"(expected {CHECKPOINT_VERSION})"
        )
    stored = body.pop("checksum", None)
    expect = hashlib.sha256(_canonical_json(body).encode()).hexdigest()
    if stored != expect:
        raise CheckpointError(f"checkpoint {path} failed its checksum; refusing partial load")
    return body


def _policy_payload(policy: BehaviorPolicy) -> dict:
    return {str(x): [v.hex() for v in p] for x, p in policy.table.items()}


def _policy_restore(payload: dict, role: Role) -> BehaviorPolicy:
    return BehaviorPolicy(
        role, {int(x): [float.fromhex(v) for v in p] for x, p in payload.items()}
    )


def _row_payload(row: ProbeRow) -> list:
    return [row.episode] + [v.hex() for v in row.values()]


def _row_restore(rec: list) -> ProbeRow:
    return ProbeRow(int(rec[0]), *(float.fromhex(v) for v in rec[1:]))


# --------------------------------------------------------------------------
# the run itself


def _resolve_hyperparams(
    cfg: RunConfig, horizon: int, max_actions: int, num_infosets: int
) -> IXConfig:
    auto = recommended_hyperparams(
        cfg.episodes,
        horizon=horizon,
        max_actions=max_actions,
        num_infosets=num_infosets,
        delta=cfg.delta,
    )
    eta = auto.eta if cfg.eta == "auto" else float(cfg.eta)
    gamma = auto.gamma if cfg.gamma == "auto" else float(cfg.gamma)
    return IXConfig(eta, gamma, horizon=horizon, max_actions=max_actions)


def _bound_or_inf(T: int, X: int, A: int, H: int, eta: float, gamma: float, delta: float) -> float:
    if gamma <= 0.0:
        return float("inf")
    return theorem2_bound(T, X, A, H, eta, gamma, delta)


def _mean_policy_from_weight_sums(
    tree: InfoSetTree, sums: dict[tuple[int, int], float]
) -> BehaviorPolicy:
    table: dict[int, list[float]] = {}
    for x in tree.infosets():
        vec = [sums.get((x, a), 0.0) for a in range(tree.action_count[x])]
        total = math.fsum(vec)
        if total > 0.0:
            table[x] = [v / total for v in vec]
    return BehaviorPolicy(tree.role, table)


def run_seed(cfg: RunConfig, seed: int) -> RunReport:
    """One seed's complete (or checkpoint-truncated, or resumed) run."""
    g = game_from_spec(cfg.game)
    report = validate_game(g)
    if not report:
        raise ConfigError(
            "game failed validation: " + "; ".join(report.problems[:5])
        )
    tree_max = build_infoset_tree(g, Role.MAX)
    tree_min = build_infoset_tree(g, Role.MIN)
    T = cfg.episodes
    horizon = g.horizon
    a_max = max(tree_max.action_count.values())
    a_min = max(tree_min.action_count.values())
    x_max = tree_max.num_infosets
    x_min = tree_min.num_infosets

    opponent = load_opponent(cfg.opponent)
    selfplay = opponent is None
    cfg_max = _resolve_hyperparams(cfg, horizon, a_max, x_max)
    cfg_min = _resolve_hyperparams(cfg, horizon, a_min, x_min)
    bound_max = _bound_or_inf(T, x_max, a_max, horizon, cfg_max.eta, cfg_max.gamma, cfg.delta)
    bound_min = (
        _bound_or_inf(T, x_min, a_min, horizon, cfg_min.eta, cfg_min.gamma, cfg.delta)
        if selfplay
        else float("nan")
    )

    track = cfg.track_regret if cfg.track_regret is not None else T <= REGRET_EPISODE_CAP
    learner_max = IXLearner(Role.MAX, cfg_max, tree_max.action_count.__getitem__)
    learner_min = (
        IXLearner(Role.MIN, cfg_min, tree_min.action_count.__getitem__) if selfplay else None
    )
    rng = np.random.default_rng(seed)
    rows: list[ProbeRow] = []
    snapshots: list[tuple[BehaviorPolicy, BehaviorPolicy]] | None = (
        [] if cfg.snapshot else None
    )
    tracker_max: RegretTracker | None = None
    tracker_min: RegretTracker | None = None
    fixed_loss_max: LossTable | None = None
    if track:
        if not selfplay and opponent.fixed:
            fixed_loss_max = exact_loss_vector(g, opponent.policy_at(1), Role.MAX)
            tracker_max = RegretTracker(tree_max, constant_loss=fixed_loss_max)
        else:
            tracker_max = RegretTracker(tree_max)
        tracker_min = RegretTracker(tree_min) if selfplay else None
    # Mean opponent realization weights, for exploitability probes against a
    # non-learning opponent. A fixed opponent averages to itself; skip.
    opp_weight_sums: dict[tuple[int, int], float] | None = (
        {} if (not selfplay and not opponent.fixed) else None
    )

    t0 = 0
    if cfg.resume is not None:
        body = load_checkpoint(cfg.resume)
        if body["identity"] != cfg.identity(seed):
            raise CheckpointError(
                "checkpoint was written by a different (config, seed); refusing to resume"
            )
        t0 = body["episode"]
        rng.bit_generator.state = json.loads(body["rng_state"])
        learner_max = IXLearner.from_payload(
            body["learner_max"], tree_max.action_count.__getitem__
        )
        if selfplay:
            learner_min = IXLearner.from_payload(
                body["learner_min"], tree_min.action_count.__getitem__
            )
        rows = [_row_restore(rec) for rec in body["rows"]]
        if tracker_max is not None:
            tracker_max.restore(body["tracker_max"])
        if tracker_min is not None:
            tracker_min.restore(body["tracker_min"])
        if snapshots is not None:
            snapshots = [
                (_policy_restore(pm, Role.MAX), _policy_restore(pn, Role.MIN))
                for pm, pn in body["snapshots"]
            ]
        if opp_weight_sums is not None:
            opp_weight_sums = {}
            for key, v in body["opp_weight_sums"].items():
                x, a = key.split(",")
                opp_weight_sums[(int(x), int(a))] = float.fromhex(v)

    probes = probe_schedule(T, cfg.eval_every, cfg.probes)
    probe_set = set(probes)
    stop_at = T if cfg.checkpoint_at is None else cfg.checkpoint_at
    if stop_at < t0:
        raise ConfigError(
            f"checkpoint_at={stop_at} is before the resumed episode {t0}"
        )
    started = time.perf_counter()

    def probe(t: int) -> None:
        avg_max = learner_max.finalize_average(t)
        if selfplay:
            avg_min = learner_min.finalize_average(t)
        elif opponent.fixed:
            avg_min = opponent.policy_at(1)
        else:
            avg_min = _mean_policy_from_weight_sums(tree_min, opp_weight_sums)
        br_max, _ = best_response(g, avg_min, Role.MAX, tree_max)
        br_min, _ = best_response(g, avg_max, Role.MIN, tree_min)
        rows.append(
            ProbeRow(
                episode=t,
                exploitability=max(0.0, br_max - br_min),
                regret_max=tracker_max.regret() if tracker_max else float("nan"),
                regret_min=tracker_min.regret() if tracker_min else float("nan"),
                bound_max=bound_max,
                bound_min=bound_min,
                wall_ms=(time.perf_counter() - started) * 1000.0 if cfg.timing else 0.0,
            )
        )

    for t in range(t0 + 1, stop_at + 1):
        mu_policy = learner_max.policy
        nu_policy = learner_min.policy if selfplay else opponent.policy_at(t)
        if snapshots is not None:
            snapshots.append((mu_policy.copy(), nu_policy.copy()))
        if tracker_max is not None:
            if fixed_loss_max is not None:
                tracker_max.record(mu_policy)
            else:
                tracker_max.record(mu_policy, exact_loss_vector(g, nu_policy, Role.MAX))
        if tracker_min is not None:
            tracker_min.record(nu_policy, exact_loss_vector(g, mu_policy, Role.MIN))
        if opp_weight_sums is not None:
            plan = realization_plan(tree_min, nu_policy)
            for key, w in plan.weights.items():
                opp_weight_sums[key] = opp_weight_sums.get(key, 0.0) + w
        traj_max, traj_min = sample_episode(g, mu_policy, nu_policy, rng, episode=t)
        learner_max.observe_episode(traj_max)
        if selfplay:
            learner_min.observe_episode(traj_min)
        if t in probe_set:
            probe(t)

    if cfg.checkpoint is not None:
        body = {
            "identity": cfg.identity(seed),
            "episode": stop_at,
            "rng_state": json.dumps(rng.bit_generator.state),
            "learner_max": learner_max.to_payload(),
            "learner_min": learner_min.to_payload() if selfplay else None,
            "rows": [_row_payload(r) for r in rows],
            "tracker_max": tracker_max.to_payload() if tracker_max else None,
            "tracker_min": tracker_min.to_payload() if tracker_min else None,
            "snapshots": (
                [[_policy_payload(pm), _policy_payload(pn)] for pm, pn in snapshots]
                if snapshots is not None
                else None
            ),
            "opp_weight_sums": (
                {f"{x},{a}": v.hex() for (x, a), v in opp_weight_sums.items()}
                if opp_weight_sums is not None
                else None
            ),
        }
        save_checkpoint(cfg.checkpoint, body)

    final_t = stop_at
    avg_max = learner_max.finalize_average(final_t) if final_t > 0 else BehaviorPolicy(Role.MAX)
    if selfplay:
        avg_min = learner_min.finalize_average(final_t) if final_t > 0 else BehaviorPolicy(Role.MIN)
    elif opponent.fixed:
        avg_min = opponent.policy_at(1)
    else:
        avg_min = _mean_policy_from_weight_sums(tree_min, opp_weight_sums)
    return RunReport(
        config=cfg,
        seed=seed,
        rows=rows,
        avg_max=avg_max,
        avg_min=avg_min,
        eta_max=cfg_max.eta,
        gamma_max=cfg_max.gamma,
        eta_min=cfg_min.eta,
        gamma_min=cfg_min.gamma,
        value_scale=g.value_scale,
        versions=_versions(),
        snapshots=snapshots,
        checkpointed_at=stop_at if cfg.checkpoint is not None else None,
    )


def _seed_path(base: str | Path, seed: int, multi: bool) -> Path:
    p = Path(base)
    if not multi:
        return p
    return p.with_name(f"{p.stem}_seed{seed}{p.suffix}")


def _run_seed_with_paths(cfg: RunConfig, seed: int) -> RunReport:
    multi = len(cfg.seeds) > 1
    adjusted = cfg
    if cfg.checkpoint is not None or cfg.resume is not None:
        adjusted = replace(
            cfg,
            checkpoint=(
                str(_seed_path(cfg.checkpoint, seed, multi)) if cfg.checkpoint else None
            ),
            resume=str(_seed_path(cfg.resume, seed, multi)) if cfg.resume else None,
        )
    report = run_seed(adjusted, seed)
    if cfg.out is not None:
        out = Path(cfg.out)
        if out.suffix == ".csv":
            csv_path = _seed_path(out, seed, multi)
        else:
            out.mkdir(parents=True, exist_ok=True)
            csv_path = out / f"seed{seed}.csv"
        write_csv(report, csv_path)
        csv_path.with_suffix(".summary.json").write_text(
            json.dumps(report.summary(), indent=1, sort_keys=True, default=str) + "\n"
        )
    return report


def run(cfg: RunConfig) -> list[RunReport]:
    """All seeds of a config; parallel across seeds when jobs > 1.

    Self-play and fixed/scripted-opponent modes share this entry point: the
    opponent field of the config decides which loop a seed runs.
    """
    if cfg.jobs == 1 or len(cfg.seeds) == 1:
        return [_run_seed_with_paths(cfg, seed) for seed in cfg.seeds]
    with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(cfg.seeds))) as pool:
        futures = [pool.submit(_run_seed_with_paths, cfg, seed) for seed in cfg.seeds]
        return [f.result() for f in futures]


def run_self_play(cfg: RunConfig) -> list[RunReport]:
    """Both players learn; cfg.opponent must be "selfplay"."""
    if cfg.opponent != "selfplay":
        raise ConfigError(f"run_self_play needs opponent='selfplay', got {cfg.opponent!r}")
    return run(cfg)


def run_vs_opponent(cfg: RunConfig) -> list[RunReport]:
    """Only the max player learns, against a fixed or scripted min player."""
    if cfg.opponent == "selfplay":
        raise ConfigError("run_vs_opponent needs a fixed or scripted opponent")
    return run(cfg)
