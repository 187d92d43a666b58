"""Static SVG figures; everything here can be regenerated from the CSVs of a run directory."""
import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "infermarl"
_SVG_METADATA = {"Date": None, "Creator": None}


def primary_reward_column(columns: Sequence[str]) -> str:
    """Cooperating agents' reward when the scenario has teams, the all-agent mean otherwise"""
    return "reward_good" if "reward_good_mean" in columns or "reward_good" in columns else "reward_mean"


def _values(rows: Sequence[Dict], key: str) -> np.ndarray:
    return np.array([float(r[key]) for r in rows])


def _finish(fig, ax, phase_boundary: Optional[int], path: Path, ylabel: str) -> Path:
    if phase_boundary is not None:
        ax.axvline(phase_boundary, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel("episode")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.info("Wrote %s", path)
    return path


def _band(ax, rows: Sequence[Dict], column: str, label: Optional[str] = None) -> None:
    episodes = _values(rows, "episode")
    mean = _values(rows, f"{column}_mean")
    std = _values(rows, f"{column}_std")
    line, = ax.plot(episodes, mean, linewidth=1.2, label=label)
    ax.fill_between(episodes, mean - std, mean + std, color=line.get_color(), alpha=0.25, linewidth=0)


def plot_reward_curves(
    rows: Sequence[Dict],
    column: str,
    phase_boundary: Optional[int],
    path: Union[str, Path],
    title: str = "",
) -> Path:
    """Mean +- std band of one aggregate column with the decentralization episode dashed"""
    fig, ax = plt.subplots(figsize=(6, 4))
    _band(ax, rows, column)
    ax.set_title(title)
    return _finish(fig, ax, phase_boundary, path, column)


def plot_comparison(
    curves: Dict[str, Sequence[Dict]],
    column: str,
    phase_boundary: Optional[int],
    path: Union[str, Path],
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in curves.items():
        _band(ax, rows, column, label)
    ax.legend(loc="best", fontsize="small")
    return _finish(fig, ax, phase_boundary, path, column)


def plot_mse_sweep(rows: Sequence[Dict], d_ps: Sequence[float], path: Union[str, Path]) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    episodes = _values(rows, "episode")
    for d in d_ps:
        ax.plot(episodes, _values(rows, f"mse_dp_{d:g}"), linewidth=1.2, label=f"d_P = {d:g}")
    ax.legend(loc="best", fontsize="small")
    return _finish(fig, ax, None, path, "inference MSE")


def _read(path: Path) -> List[Dict]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def _boundary(run_dir: Path) -> Optional[int]:
    config = run_dir / "resolved_config.txt"
    if not config.is_file():
        return None
    for line in config.read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        if key.strip() == "episodes_centralized":
            return int(value)
    return None


def regenerate(run_dir: Union[str, Path]) -> List[Path]:
    """Redraw every figure of a run, comparison, ablation or sweep directory from its CSVs"""
    run_dir = Path(run_dir)
    written = []
    aggregate = run_dir / "aggregate.csv"
    if aggregate.is_file():
        rows = _read(aggregate)
        column = primary_reward_column(rows[0].keys()) if rows else "reward_mean"
        written.append(plot_reward_curves(rows, column, _boundary(run_dir), run_dir / "reward.svg"))

    arms = sorted(p.parent for p in run_dir.glob("*/aggregate.csv"))
    sweep = run_dir / "mse_sweep.csv"
    if sweep.is_file():
        rows = _read(sweep)
        d_ps = [float(c[len("mse_dp_"):]) for c in rows[0] if c.startswith("mse_dp_")] if rows else []
        written.append(plot_mse_sweep(rows, d_ps, run_dir / "mse_sweep.svg"))
    elif arms:
        curves = {arm.name: _read(arm / "aggregate.csv") for arm in arms}
        first = next(iter(curves.values()))
        column = primary_reward_column(first[0].keys()) if first else "reward_mean"
        name = "ablation.svg" if all(a.name.startswith("policy_") for a in arms) else "comparison.svg"
        written.append(plot_comparison(curves, column, _boundary(arms[0]), run_dir / name))
    for arm in arms:
        written.extend(regenerate(arm))
    return written
