from .config import ExperimentConfig, load_config, parse_config
