"""Deterministic replay of recorded operator sessions.

Replay runs the whole stack in-process -- broker, rig, controllers -- on
logical tick time, so identical (log, seed, config) inputs always produce
bit-identical metrics. The latency model shapes the injection side only;
the bridge itself stays honest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from hotbox.bridge import TOPIC_SCHEMAS, Broker, LocalClient
from hotbox.harness.config import ServerConfig, default_config
from hotbox.harness.logs import LatencyModel, LogRecord, load_log
from hotbox.harness.metrics import RunMetrics, TickRecord, compute_metrics
from hotbox.harness.rig import SimRig

OBSERVED_TOPICS = (
    "/arm/{side}/twist_cmd",
    "/arm/{side}/joint_states",
    "/arm/{side}/ee_pose",
)


@dataclass
class ReplayResult:
    metrics: RunMetrics
    trace: List[TickRecord] = field(default_factory=list)
    deliveries: List[tuple] = field(default_factory=list)  # (t_tick, topic)
    observed: List[tuple] = field(default_factory=list)  # (t_tick, envelope)


class _LogicalClock:
    def __init__(self):
        self.t = 0.0

    def __call__(self) -> float:
        return self.t


def replay(
    log,
    cfg: Optional[ServerConfig] = None,
    speed: float = 1.0,
    latency: Optional[LatencyModel] = None,
    extra_time: float = 2.0,
    keep_trace: bool = False,
) -> ReplayResult:
    """Re-publish a session's in-direction envelopes through the latency
    model into a fresh in-process stack and collect run metrics.

    `log` is a path or a sequence of LogRecords. `speed` scales original
    timing (2.0 replays twice as fast). The run extends `extra_time` seconds
    of simulated time past the last delivery so servos settle.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    records: Sequence[LogRecord] = load_log(log) if isinstance(log, (str, bytes)) or hasattr(log, "__fspath__") else log
    cfg = cfg or default_config()
    latency = latency or LatencyModel()

    inbound = [r for r in records if r.direction == "in" and r.envelope.op == "publish"]
    if inbound:
        t0 = inbound[0].t
        sends = [((r.t - t0) / speed, r.envelope) for r in inbound]
    else:
        sends = []
    deliveries, dropped = latency.schedule(sends)

    clock = _LogicalClock()
    broker = Broker(queue_capacity=cfg.queue_capacity, clock=clock)
    rig = SimRig(cfg, broker)
    operator = LocalClient(broker, "replay-operator")

    topics = {env.topic for _, _, env in deliveries}
    for topic in sorted(topics):
        operator.advertise(topic, TOPIC_SCHEMAS.get(topic))
    observer = LocalClient(broker, "replay-observer")
    for side in cfg.arms:
        for pattern in OBSERVED_TOPICS:
            observer.subscribe(pattern.format(side=side))

    dt = cfg.dt
    t_end = (deliveries[-1][0] if deliveries else 0.0) + extra_time
    n_ticks = int(round(t_end / dt)) + 1

    result = ReplayResult(metrics=RunMetrics())
    trace: List[TickRecord] = []
    messages_in = 0
    messages_out = 0
    di = 0
    for k in range(n_ticks):
        t = k * dt
        clock.t = t
        while di < len(deliveries) and deliveries[di][0] <= t:
            env = deliveries[di][2]
            operator.send(env)
            if keep_trace:
                result.deliveries.append((t, env.topic))
            messages_in += 1
            di += 1
        rig.drain_inbound(t)
        rec = rig.tick(t)
        trace.append(rec)
        outs = observer.drain()
        messages_out += sum(1 for e in outs if e.op == "publish")
        if keep_trace:
            result.observed.extend((t, e) for e in outs if e.op == "publish")
        operator.drain()  # discard statuses aimed at the operator

    result.metrics = compute_metrics(
        trace, messages_in=messages_in, messages_out=messages_out, dropped=dropped
    )
    if keep_trace:
        result.trace = trace
    return result
