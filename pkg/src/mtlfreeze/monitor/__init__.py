from .graph import GateGraph, MonitorError, NodeKey, Verdict
from .obstate import ObsState

__all__ = ["GateGraph", "MonitorError", "NodeKey", "ObsState", "Verdict"]
