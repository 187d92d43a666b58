from .config import ALGORITHMS, PRESETS, ExperimentConfig, parse_config, write_resolved_config
from .experiment import (
    DEFAULT_DP_SWEEP,
    ExperimentReport,
    SweepReport,
    ablate_updates,
    aggregate_rows,
    aggregate_run_dir,
    run_comparison,
    run_experiment,
    sweep_dp,
)
from .logs import setup_logger
from .trial import TrialResult, TrialRunner, episode_columns, run_trial

__all__ = [
    'ALGORITHMS',
    'DEFAULT_DP_SWEEP',
    'PRESETS',
    'ExperimentConfig',
    'ExperimentReport',
    'SweepReport',
    'TrialResult',
    'TrialRunner',
    'ablate_updates',
    'aggregate_rows',
    'aggregate_run_dir',
    'episode_columns',
    'parse_config',
    'run_comparison',
    'run_experiment',
    'run_trial',
    'setup_logger',
    'sweep_dp',
    'write_resolved_config',
]
