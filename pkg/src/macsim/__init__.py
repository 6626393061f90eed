"""Slot-level simulator and analysis toolkit for decentralised collision-free WLAN MACs."""

from .config import SimConfig, validate_config
from .phy import EXPERIMENT_PHY, TABLE_PHY, PhyParams, SlotKind
from .runner import RunResult, run_simulation

__version__ = "0.1.0"

__all__ = [
    "EXPERIMENT_PHY",
    "PhyParams",
    "RunResult",
    "SimConfig",
    "SlotKind",
    "TABLE_PHY",
    "run_simulation",
    "validate_config",
    "__version__",
]
