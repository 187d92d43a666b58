"""Same configuration and seed, same bytes on disk"""
import pytest

from infermarl.harness import run_experiment


@pytest.mark.parametrize("algorithm", ["maddpg_infer", "ddpg"])
def test_repeated_runs_are_byte_identical(tiny_config, tmp_path, algorithm):
    config = tiny_config.replace(algorithm=algorithm, trials=2, perturb=True, d_p=0.5)
    run_experiment(config, tmp_path / "a")
    run_experiment(config, tmp_path / "b")
    for name in ("aggregate.csv", "trial_000/episodes.csv", "trial_001/episodes.csv", "trial_001/gan_metrics.csv",
                 "trial_001/fingerprints.json", "trial_001/checkpoint.json", "reward.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_worker_pool_matches_sequential(tiny_config, tmp_path):
    config = tiny_config.replace(trials=2, checkpoint=False)
    sequential = run_experiment(config, tmp_path / "seq", plot=False)
    pooled = run_experiment(config.replace(workers=2), tmp_path / "pool", plot=False)
    assert pooled.exit_code == 0
    assert [r.rows for r in pooled.results] == [r.rows for r in sequential.results]
    assert (tmp_path / "seq" / "aggregate.csv").read_bytes() == (tmp_path / "pool" / "aggregate.csv").read_bytes()


def test_trials_differ_from_each_other(tiny_config):
    report = run_experiment(tiny_config.replace(trials=2, checkpoint=False), plot=False)
    first, second = report.results
    assert first.seed != second.seed
    assert first.rows[0]["reward_mean"] != second.rows[0]["reward_mean"]
