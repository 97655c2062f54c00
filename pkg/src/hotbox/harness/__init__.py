"""Deployable server and headless test rig: wires the bridge, teleop
controllers, fixtures, and arm simulator into one tick loop; records and
replays operator sessions; injects latency; computes run metrics."""

from hotbox.harness.config import ConfigError, ServerConfig, default_config, load_config
from hotbox.harness.logs import LatencyModel, LogRecord, ReplayError, load_log, save_log
from hotbox.harness.metrics import RunMetrics, compute_metrics
from hotbox.harness.replay import ReplayResult, replay
from hotbox.harness.rig import SimRig

__all__ = [
    "ConfigError",
    "ServerConfig",
    "default_config",
    "load_config",
    "LatencyModel",
    "LogRecord",
    "ReplayError",
    "load_log",
    "save_log",
    "RunMetrics",
    "compute_metrics",
    "ReplayResult",
    "replay",
    "SimRig",
]
