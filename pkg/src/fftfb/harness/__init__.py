from .config import ExperimentConfig, load_config, parse_config
from .runner import ResultSet, TrialRecord, run_experiment, run_papr, run_psd, validate, write_outputs

__all__ = [
    "ExperimentConfig",
    "ResultSet",
    "TrialRecord",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_papr",
    "run_psd",
    "validate",
    "write_outputs",
]
