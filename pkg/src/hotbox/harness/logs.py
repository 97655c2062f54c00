"""Session logs and the latency model.

Log format: a `#hotbox-log 1` header line, then one record per line as
`<t_mono> <in|out> <canonical envelope JSON>`. Plain text keeps the logs
diffable, greppable, and append-safe.
"""

from __future__ import annotations

import fnmatch
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from hotbox.messages import DecodeError, Envelope, decode, encode

LOG_HEADER = "#hotbox-log 1"

# Topics flowing operator -> server; everything else is server -> operator.
INPUT_TOPIC_PATTERNS = ("/hand/*", "/teleop/*")


def direction_for_topic(topic: Optional[str]) -> str:
    if topic is not None:
        for pattern in INPUT_TOPIC_PATTERNS:
            if fnmatch.fnmatchcase(topic, pattern):
                return "in"
    return "out"


class ReplayError(ValueError):
    def __init__(self, line_no, detail=""):
        self.line_no = line_no
        super().__init__(f"log line {line_no}: {detail}" if detail else f"log line {line_no}")


@dataclass(frozen=True)
class LogRecord:
    t: float
    direction: str  # in | out
    envelope: Envelope

    def to_line(self) -> str:
        return f"{self.t:.9f} {self.direction} {encode(self.envelope)}"


def save_log(records: Sequence[LogRecord], path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(LOG_HEADER + "\n")
        for rec in records:
            f.write(rec.to_line() + "\n")


def parse_log(text: str) -> List[LogRecord]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != LOG_HEADER:
        raise ReplayError(1, "missing log header")
    records: List[LogRecord] = []
    last_t = None
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(" ", 2)
        if len(parts) != 3:
            raise ReplayError(i, "expected '<t> <dir> <envelope>'")
        t_text, direction, env_text = parts
        try:
            t = float(t_text)
        except ValueError:
            raise ReplayError(i, f"bad timestamp {t_text!r}") from None
        if direction not in ("in", "out"):
            raise ReplayError(i, f"bad direction {direction!r}")
        if last_t is not None and t < last_t:
            raise ReplayError(i, "timestamps must be non-decreasing")
        last_t = t
        try:
            env = decode(env_text)
        except DecodeError as e:
            raise ReplayError(i, str(e)) from None
        records.append(LogRecord(t=t, direction=direction, envelope=env))
    return records


def load_log(path) -> List[LogRecord]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_log(f.read())


@dataclass
class LatencyModel:
    """Uniform-jitter delay plus Bernoulli drops on the injection path.

    Delayed messages queue in order: delivery times are clamped to be
    non-decreasing per topic, so per-topic FIFO is never violated.
    """

    base_ms: float = 0.0
    jitter_ms: float = 0.0
    drop_prob: float = 0.0
    seed: int = 0
    drop_topics: Tuple[str, ...] = ("*",)

    def __post_init__(self):
        if self.base_ms < 0:
            raise ValueError("base latency must be >= 0")
        if not 0 <= self.drop_prob < 1:
            raise ValueError("drop_prob must lie in [0, 1)")

    def _drop_applies(self, topic) -> bool:
        if topic is None:
            return False
        return any(fnmatch.fnmatchcase(topic, p) for p in self.drop_topics)

    def schedule(self, sends: Sequence[Tuple[float, Envelope]]):
        """Map (send_time, envelope) pairs to (delivery_time, index, envelope).

        Returns (deliveries, dropped_count); deliveries are sorted by
        (delivery_time, original index) so ties resolve deterministically.
        """
        rng = random.Random(self.seed)
        deliveries = []
        last_by_topic = {}
        dropped = 0
        for idx, (t_send, env) in enumerate(sends):
            delay = self.base_ms
            if self.jitter_ms > 0:
                delay += rng.uniform(-self.jitter_ms, self.jitter_ms)
            if self.drop_prob > 0 and self._drop_applies(env.topic):
                if rng.random() < self.drop_prob:
                    dropped += 1
                    continue
            t_deliver = t_send + max(0.0, delay) / 1000.0
            key = env.topic
            if key in last_by_topic:
                t_deliver = max(t_deliver, last_by_topic[key])
            last_by_topic[key] = t_deliver
            deliveries.append((t_deliver, idx, env))
        deliveries.sort(key=lambda d: (d[0], d[1]))
        return deliveries, dropped
