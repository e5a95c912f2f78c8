from cli.ablation import AblationCell, AblationRunner
from cli.commands import Commands
from cli.config import ExperimentConfig, load_config, load_synth_spec
from cli.synth import SynthSpec, SyntheticWorld

__all__ = [
    "AblationCell",
    "AblationRunner",
    "Commands",
    "ExperimentConfig",
    "SynthSpec",
    "SyntheticWorld",
    "load_config",
    "load_synth_spec",
]
