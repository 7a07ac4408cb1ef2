# Experiments module
from .config_loader import ExperimentConfig, resolve_config
from .runner import ExperimentRunner, run_experiment
