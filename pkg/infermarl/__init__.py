from infermarl.__version__ import __version__
from infermarl.agents import MaddpgAgent, maddpg_update
from infermarl.env import ParticleEnv, build_scenario
from infermarl.exceptions import CheckpointError, ConfigError, ContractViolation, InfermarlError, TrialFailure
from infermarl.gan import CCWGAN
from infermarl.harness import ExperimentConfig, parse_config, run_experiment, run_trial

__all__ = [
    '__version__',
    'CCWGAN',
    'CheckpointError',
    'ConfigError',
    'ContractViolation',
    'ExperimentConfig',
    'InfermarlError',
    'MaddpgAgent',
    'ParticleEnv',
    'TrialFailure',
    'build_scenario',
    'maddpg_update',
    'parse_config',
    'run_experiment',
    'run_trial',
]
