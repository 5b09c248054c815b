"""simspark: a discrete-time simulator of social media behavior driven by
language-model agents, with full reasoning traces, an event-sourced run
log, deterministic scripted/replay providers, an HTTP control plane, and
a CLI for headless runs."""

__version__ = "0.1.0"

from .config import (
    AgentProfile,
    EventSpec,
    NpcProfile,
    Registry,
    SimulationConfig,
    SocialHabits,
    ValidationReport,
    load_config,
    serialize_config,
    validate_config,
)
from .loop import Ablations, RunState, Simulation
from .providers import (
    LiveProvider,
    ProviderConfig,
    ReplayProvider,
    Script,
    ScriptedProvider,
    extract_json,
    score_from_text,
)

__all__ = [
    "Ablations",
    "AgentProfile",
    "EventSpec",
    "LiveProvider",
    "NpcProfile",
    "ProviderConfig",
    "Registry",
    "ReplayProvider",
    "RunState",
    "Script",
    "ScriptedProvider",
    "Simulation",
    "SimulationConfig",
    "SocialHabits",
    "ValidationReport",
    "extract_json",
    "load_config",
    "score_from_text",
    "serialize_config",
    "validate_config",
]
