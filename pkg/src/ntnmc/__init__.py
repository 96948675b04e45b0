"""Packet-level simulator of satellite-assisted multi-connectivity in a
terrestrial cellular deployment: geometry, link budgets, a TTI-level data
plane with PDCP reordering, secondary-node addition policies, and a
campaign driver with deterministic artifacts.
"""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config
from .simulation import RunResult, Scenario, run_single

__all__ = ["ScenarioConfig", "load_config", "RunResult", "Scenario",
           "run_single", "__version__"]
