import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..exceptions import ConfigError
from .config import ALGORITHMS, PRESETS, parse_config
from .experiment import DEFAULT_DP_SWEEP, ablate_updates, run_comparison, run_experiment, sweep_dp
from .logs import setup_logger
from .plotting import regenerate

logger = logging.getLogger(__name__)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat key = value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="Episode-count preset applied before the file")
    parser.add_argument("--scenario", help="physical_deception, predator_prey or cooperative_navigation")
    parser.add_argument("--algo", help=f"One of {', '.join(ALGORITHMS)}; comma-separate several to compare (run only)")
    parser.add_argument("--dp", help="Partial observability distance; comma-separated list for sweep-dp")
    parser.add_argument("--trials", type=int, help="Number of independent trials")
    parser.add_argument("--seed", type=int, help="Base seed; trial i uses seed + i")
    parser.add_argument("--episodes-centralized", type=int, dest="episodes_centralized")
    parser.add_argument("--episodes-decentralized", type=int, dest="episodes_decentralized")
    parser.add_argument("--perturb", action="store_true", default=None, help="Shift the dynamics in the decentralized phase")
    parser.add_argument("--policy-updates", dest="policy_updates", help="on/off: keep updating policies after decentralizing")
    parser.add_argument("--gan-updates", dest="gan_updates", help="on/off: keep updating the GAN after decentralizing")
    parser.add_argument("--workers", type=int, help="Parallel trial processes")
    parser.add_argument("--out", help="Run directory")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infermarl", description="MADDPG with generative observation inference")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_experiment_flags(sub.add_parser("run", help="Run trials of one or several algorithms"))
    _add_experiment_flags(sub.add_parser("sweep-dp", help="Inference error over several observability distances"))
    _add_experiment_flags(sub.add_parser("ablate-updates", help="Four decentralized update toggle arms"))
    plot = sub.add_parser("plot", help="Regenerate figures from the CSVs of a run directory")
    plot.add_argument("run_dir")
    return parser


def _overrides(args: argparse.Namespace) -> Dict:
    keys = (
        "scenario",
        "trials",
        "seed",
        "episodes_centralized",
        "episodes_decentralized",
        "perturb",
        "policy_updates",
        "gan_updates",
        "workers",
    )
    values = {k: getattr(args, k) for k in keys}
    algos = _split(args.algo)
    if len(algos) == 1:
        values["algorithm"] = algos[0]
    if args.dp is not None and args.command != "sweep-dp":
        values["d_p"] = args.dp
    return values


def _split(raw: Optional[str]) -> List[str]:
    return [part.strip() for part in raw.split(",") if part.strip()] if raw else []


def _default_out(command: str, config) -> Path:
    return Path("runs") / f"{command}_{config.scenario}_{config.algorithm}_seed{config.seed}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        setup_logger(level=logging.INFO)
        written = regenerate(args.run_dir)
        if not written:
            logger.error("No CSVs found under %s", args.run_dir)
            return 1
        return 0

    try:
        config = parse_config(args.config, _overrides(args), preset=args.preset)
        d_ps = [float(d) for d in _split(args.dp)] if args.command == "sweep-dp" else []
    except (ConfigError, ValueError) as exc:
        print(f"infermarl: configuration error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out) if args.out else _default_out(args.command, config)
    setup_logger(out_dir / "run.log", getattr(logging, args.log_level))

    if args.command == "sweep-dp":
        return sweep_dp(config, d_ps or DEFAULT_DP_SWEEP, out_dir).exit_code
    if args.command == "ablate-updates":
        reports = ablate_updates(config, out_dir)
        return max(r.exit_code for r in reports.values())
    algos = _split(args.algo)
    if len(algos) > 1:
        try:
            for algo in algos:
                config.replace(algorithm=algo)
        except ConfigError as exc:
            print(f"infermarl: configuration error: {exc}", file=sys.stderr)
            return 2
        reports = run_comparison(config, algos, out_dir)
        return max(r.exit_code for r in reports.values())
    return run_experiment(config, out_dir).exit_code


if __name__ == "__main__":
    raise SystemExit(main())
