"""Self-triggered networked control of a leader-follower formation over a
bursty fading channel: channel model, box quantizer, trigger rules, plant,
and the Monte-Carlo experiment engine."""

from .channel import ChannelConfig, MarkovChannelState
from .config import ScenarioConfig, defaults_for, parse_config
from .engine import (
    McSummary,
    SamplePath,
    TransmissionRecord,
    inject_deep_fade,
    run_monte_carlo,
    run_sample_path,
    sweep_formations,
)
from .plant import PlantParams, SimState, StateVec
from .quantizer import QuantizerState
from .trigger import EventThreshold, TriggerParams

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "EventThreshold",
    "MarkovChannelState",
    "McSummary",
    "PlantParams",
    "QuantizerState",
    "SamplePath",
    "ScenarioConfig",
    "SimState",
    "StateVec",
    "TransmissionRecord",
    "TriggerParams",
    "defaults_for",
    "inject_deep_fade",
    "parse_config",
    "run_monte_carlo",
    "run_sample_path",
    "sweep_formations",
]
