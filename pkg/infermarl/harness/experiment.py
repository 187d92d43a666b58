import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import TrialFailure
from .config import ExperimentConfig, write_resolved_config
from .plotting import plot_comparison, plot_mse_sweep, plot_reward_curves, primary_reward_column
from .trial import TrialResult, run_trial, write_csv

logger = logging.getLogger(__name__)

DEFAULT_DP_SWEEP = (0.0, 0.5, 1.0, 1.5, 2.0)
KEY_COLUMNS = ("episode", "phase")
UPDATE_ARMS = ((True, True), (True, False), (False, True), (False, False))


@dataclass
class ExperimentReport:
    """Outcome of ``config.trials`` trials written to ``out_dir``"""

    config: ExperimentConfig
    out_dir: Optional[Path]
    results: List[TrialResult]
    failures: List[TrialFailure] = field(default_factory=list)
    columns: List[str] = field(default_factory=list)
    aggregate: List[Dict] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures or not self.results else 0

    def series(self, column: str) -> np.ndarray:
        return np.array([row[column] for row in self.aggregate], dtype=float)


def aggregate_rows(trial_rows: Sequence[Sequence[Dict]]) -> Tuple[List[str], List[Dict]]:
    """
    Per-episode mean and population standard deviation of every metric across trials.

    Args:
        trial_rows: One list of episode rows per trial, all with the same columns and length
    """
    if not trial_rows:
        return [], []
    lengths = {len(rows) for rows in trial_rows}
    if len(lengths) != 1:
        raise ValueError(f"trials have different episode counts: {sorted(lengths)}")
    metrics = [c for c in trial_rows[0][0] if c not in KEY_COLUMNS]
    columns = list(KEY_COLUMNS) + ["trials"]
    for c in metrics:
        columns += [f"{c}_mean", f"{c}_std"]

    out = []
    for episode_rows in zip(*trial_rows):
        first = episode_rows[0]
        row = {"episode": int(first["episode"]), "phase": int(first["phase"]), "trials": len(episode_rows)}
        for c in metrics:
            values = np.array([float(r[c]) for r in episode_rows])
            row[f"{c}_mean"] = float(np.mean(values))
            row[f"{c}_std"] = float(np.std(values))
        out.append(row)
    return columns, out


def read_csv(path: Union[str, Path]) -> List[Dict]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def aggregate_run_dir(run_dir: Union[str, Path]) -> Tuple[List[str], List[Dict]]:
    """Recompute the aggregate from the per-trial CSVs on disk"""
    paths = sorted(Path(run_dir).glob("trial_*/episodes.csv"))
    return aggregate_rows([read_csv(p) for p in paths])


def _trial_job(args) -> TrialResult:
    config, index, out_dir = args
    return run_trial(config, index, out_dir)


def _run_trials(config: ExperimentConfig, out_dir: Optional[Path]) -> Tuple[List[TrialResult], List[TrialFailure]]:
    jobs = [(config, index, out_dir) for index in range(config.trials)]
    results, failures = [], []

    def collect(index: int, outcome) -> None:
        try:
            results.append(outcome())
        except Exception as exc:
            logger.exception("Trial %d failed", index)
            failures.append(TrialFailure(index, exc))

    if config.workers == 1:
        for job in jobs:
            collect(job[1], lambda job=job: _trial_job(job))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            futures = [executor.submit(_trial_job, job) for job in jobs]
            for index, future in enumerate(futures):
                collect(index, future.result)
    return results, failures


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    plot: bool = True,
) -> ExperimentReport:
    """
    Run every trial, then write the aggregate CSV and the reward plot.

    A failing trial is logged and recorded; aggregation proceeds over the completed trials
    and ``exit_code`` turns nonzero.
    """
    config.validate()
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        write_resolved_config(config, out_path)
    logger.info(
        "Running %d trial(s) of %s on %s (seeds %d..%d)",
        config.trials,
        config.algorithm,
        config.scenario,
        config.seed,
        config.seed + config.trials - 1,
    )
    results, failures = _run_trials(config, out_path)
    columns, aggregate = aggregate_rows([r.rows for r in results])
    report = ExperimentReport(config, out_path, results, failures, columns, aggregate)
    if out_path is not None and aggregate:
        write_csv(out_path / "aggregate.csv", columns, aggregate)
        if plot:
            reward = primary_reward_column(columns)
            plot_reward_curves(
                aggregate,
                reward,
                config.episodes_centralized,
                out_path / "reward.svg",
                title=f"{config.algorithm} on {config.scenario}",
            )
    if failures:
        logger.error("%d of %d trials failed", len(failures), config.trials)
    return report


def _run_arms(
    arms: Dict[str, ExperimentConfig],
    out_dir: Optional[Path],
    plot_name: str,
) -> Dict[str, ExperimentReport]:
    reports = {}
    for label, arm_config in arms.items():
        arm_dir = out_dir / label if out_dir is not None else None
        reports[label] = run_experiment(arm_config, arm_dir)
    if out_dir is not None:
        curves = {label: r.aggregate for label, r in reports.items() if r.aggregate}
        if curves:
            first = next(iter(reports.values()))
            column = primary_reward_column(first.columns)
            plot_comparison(curves, column, first.config.episodes_centralized, out_dir / plot_name)
    return reports


def run_comparison(
    config: ExperimentConfig,
    algorithms: Sequence[str] = ("maddpg_infer", "maddpg", "ddpg"),
    out_dir: Optional[Union[str, Path]] = None,
) -> Dict[str, ExperimentReport]:
    """Run several algorithms over the same seed list and plot them together"""
    out_path = Path(out_dir) if out_dir is not None else None
    arms = {algo: config.replace(algorithm=algo) for algo in algorithms}
    return _run_arms(arms, out_path, "comparison.svg")


def ablate_updates(
    config: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
) -> Dict[str, ExperimentReport]:
    """The four combinations of decentralized policy and GAN updates"""
    out_path = Path(out_dir) if out_dir is not None else None
    arms = {
        f"policy_{'on' if p else 'off'}_gan_{'on' if g else 'off'}": config.replace(policy_updates=p, gan_updates=g)
        for p, g in UPDATE_ARMS
    }
    return _run_arms(arms, out_path, "ablation.svg")


@dataclass
class SweepReport:
    d_ps: Tuple[float, ...]
    reports: Dict[float, ExperimentReport]
    columns: List[str]
    rows: List[Dict]

    @property
    def exit_code(self) -> int:
        return max((r.exit_code for r in self.reports.values()), default=1)


def mse_column(d_p: float) -> str:
    return f"mse_dp_{d_p:g}"


def sweep_dp(
    config: ExperimentConfig,
    d_ps: Sequence[float] = DEFAULT_DP_SWEEP,
    out_dir: Optional[Union[str, Path]] = None,
) -> SweepReport:
    """
    Run ``maddpg_infer`` once per observability distance.

    The combined CSV holds one row per decentralized episode and one column per distance:
    the trial-mean error of the inferred entries agents acted on.
    """
    if not d_ps:
        raise ValueError("d_P list must not be empty")
    out_path = Path(out_dir) if out_dir is not None else None
    reports: Dict[float, ExperimentReport] = {}
    for d in d_ps:
        arm = config.replace(algorithm="maddpg_infer", d_p=float(d))
        reports[float(d)] = run_experiment(arm, out_path / f"dp_{d:g}" if out_path is not None else None)

    columns = list(KEY_COLUMNS) + [mse_column(d) for d in reports]
    rows = []
    for episode in range(config.episodes_centralized, config.total_episodes):
        row = {"episode": episode, "phase": 2}
        for d, report in reports.items():
            row[mse_column(d)] = report.aggregate[episode]["inference_mse_mean"] if report.aggregate else 0.0
        rows.append(row)
    if out_path is not None:
        write_csv(out_path / "mse_sweep.csv", columns, rows)
        plot_mse_sweep(rows, list(reports), out_path / "mse_sweep.svg")
    return SweepReport(tuple(reports), reports, columns, rows)
