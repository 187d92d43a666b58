import pytest

from infermarl.exceptions import ConfigError
from infermarl.harness import ExperimentConfig, parse_config, write_resolved_config
from infermarl.harness.config import PRESETS, read_config_file


def test_defaults_match_full_protocol():
    config = ExperimentConfig().validate()
    assert config.d_p == 1.0
    assert config.trials == 30
    assert config.total_episodes == 3000
    assert config.episode_length == 200
    assert config.gan_betas == (0.5, 0.9)


def test_config_file_with_comments(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# decentralized inference\n"
        "scenario = predator_prey   # four agents\n"
        "\n"
        "d_p = 0.5\n"
        "perturb = yes\n"
        "buffer_capacity = 1e5\n"
        "gan_betas = 0.0, 0.99\n"
    )
    config = parse_config(path)
    assert config.scenario == "predator_prey"
    assert config.d_p == 0.5
    assert config.perturb is True
    assert config.buffer_capacity == 100_000
    assert config.gan_betas == (0.0, 0.99)


def test_overrides_win_over_file_and_preset(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("trials = 4\nseed = 7\nepisodes_centralized = 12\n")
    config = parse_config(path, {"trials": 2, "seed": None, "gan_updates": "off"}, preset="smoke")
    assert config.trials == 2
    assert config.seed == 7
    assert config.episodes_centralized == 12
    assert config.episodes_decentralized == PRESETS["smoke"]["episodes_decentralized"]
    assert config.gan_updates is False


def test_unknown_key_is_named(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("learning_rate = 0.1\n")
    with pytest.raises(ConfigError) as info:
        parse_config(path)
    assert info.value.key == "learning_rate"


def test_bad_scenario_lists_valid_names():
    with pytest.raises(ConfigError) as info:
        parse_config(overrides={"scenario": "simple_tag"})
    assert info.value.key == "scenario"
    for name in ("physical_deception", "predator_prey", "cooperative_navigation"):
        assert name in str(info.value)


@pytest.mark.parametrize(
    "changes, key",
    [
        ({"episode_length": 25}, "episode_length"),
        ({"trials": 0}, "trials"),
        ({"d_p": -1.0}, "d_p"),
        ({"tau": 0.0}, "tau"),
        ({"algorithm": "qmix"}, "algorithm"),
        ({"gan_betas": (0.5,)}, "gan_betas"),
        ({"episodes_centralized": 0, "episodes_decentralized": 0}, "episodes_centralized"),
    ],
)
def test_validation_errors(changes, key):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig().replace(**changes)
    assert info.value.key == key


def test_unparsable_value():
    with pytest.raises(ConfigError) as info:
        parse_config(overrides={"perturb": "maybe"})
    assert info.value.key == "perturb"


def test_missing_file_and_malformed_line(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.cfg")
    path = tmp_path / "bad.cfg"
    path.write_text("trials 3\n")
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_unknown_preset():
    with pytest.raises(ConfigError) as info:
        parse_config(preset="huge")
    assert info.value.key == "preset"


def test_resolved_config_reads_back(tmp_path):
    config = ExperimentConfig(scenario="physical_deception", d_p=1.5, perturb=True, lr_gan=3e-4, seed=11)
    path = write_resolved_config(config, tmp_path / "run")
    assert path.name == "resolved_config.txt"
    assert parse_config(path) == config
