"""Self-play learning of approximate equilibria under bandit feedback.

The library splits along the information boundary the algorithm lives on:

- :mod:`ixomd.game` — the arena: episodic two-player zero-sum games with
  imperfect information, behavioral policies, realization plans, sampling.
- :mod:`ixomd.games` — concrete games: matrix games, two card-poker
  benchmarks, seeded random trees, and a plain-text game file format
  (:mod:`ixomd.gamefile`).
- :mod:`ixomd.learner` — the bandit learner: implicit-exploration loss
  estimates, lazy closed-form mirror-descent updates, incremental averaging.
- :mod:`ixomd.evaluation` — full-model verification: expected value, best
  response, exploitability, empirical regret, and the high-probability
  regret bound.
- :mod:`ixomd.harness` — reproducible experiment runs: probe schedules,
  CSV emission, checkpoints, multi-seed orchestration (CLI: ``ixomd``).
"""

from .game import (
    BehaviorPolicy,
    GameTree,
    InfoSetTree,
    RealizationPlan,
    Role,
    Trajectory,
    ValidationReport,
    build_infoset_tree,
    realization_plan,
    sample_episode,
    uniform_policy,
    validate_game,
)
from .gamefile import GameFileError, load_game, parse_game, save_game, serialize_game
from .games import (
    RandomTreeParams,
    build_kuhn,
    build_leduc,
    build_matrix_game,
    build_random_tree,
    game_from_spec,
)
from .learner import (
    IXConfig,
    IXLearner,
    StepLoss,
    backward_log_z,
    dilated_divergence,
    recommended_hyperparams,
)
from .evaluation import (
    EvalReport,
    average_profile_identity_check,
    best_response,
    best_sequence_value,
    counterfactual_reach,
    empirical_regret,
    enumerate_episodes,
    exact_loss_vector,
    expected_value,
    exploitability,
    theorem2_bound,
    theorem2_bound_tuned,
)
from .harness import (
    CheckpointError,
    ConfigError,
    ProbeRow,
    RegretTracker,
    RunConfig,
    RunReport,
    emit_csv,
    load_checkpoint,
    load_policy,
    loglog_slope,
    parse_csv,
    plot_data_lines,
    probe_schedule,
    run,
    run_self_play,
    run_seed,
    run_vs_opponent,
    save_checkpoint,
    save_policy,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BehaviorPolicy",
    "CheckpointError",
    "ConfigError",
    "EvalReport",
    "GameFileError",
    "GameTree",
    "IXConfig",
    "IXLearner",
    "InfoSetTree",
    "ProbeRow",
    "RandomTreeParams",
    "RealizationPlan",
    "RegretTracker",
    "Role",
    "RunConfig",
    "RunReport",
    "StepLoss",
    "Trajectory",
    "ValidationReport",
    "average_profile_identity_check",
    "backward_log_z",
    "best_response",
    "best_sequence_value",
    "build_infoset_tree",
    "build_kuhn",
    "build_leduc",
    "build_matrix_game",
    "build_random_tree",
    "counterfactual_reach",
    "dilated_divergence",
    "emit_csv",
    "empirical_regret",
    "enumerate_episodes",
    "exact_loss_vector",
    "expected_value",
    "exploitability",
    "game_from_spec",
    "load_checkpoint",
    "load_game",
    "load_policy",
    "loglog_slope",
    "parse_csv",
    "parse_game",
    "plot_data_lines",
    "probe_schedule",
    "realization_plan",
    "recommended_hyperparams",
    "run",
    "run_seed",
    "run_self_play",
    "run_vs_opponent",
    "sample_episode",
    "save_checkpoint",
    "save_game",
    "save_policy",
    "serialize_game",
    "theorem2_bound",
    "theorem2_bound_tuned",
    "uniform_policy",
    "validate_game",
    "write_csv",
]
