"""Pub/sub bridge: topic registry, fan-out, and the WebSocket server.

The broker core is transport-free and fully synchronous -- every effect of
handle_envelope happens before it returns, which makes the registry a single
linearizable decision point. The WebSocket layer (BridgeServer) runs the
broker on one asyncio loop; per-session writer tasks drain outbound queues
independently so a stalled consumer only ever loses its own messages.
"""

from __future__ import annotations

import asyncio
import fnmatch
import itertools
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional

from hotbox.messages import (
    DecodeError,
    Envelope,
    decode,
    encode,
    validate_payload,
)

log = logging.getLogger("hotbox.bridge")

DEFAULT_QUEUE_CAPACITY = 256
WARN_COALESCE_INTERVAL = 1.0  # s

# Latching defaults: late-joining consoles need current arm state; hand
# streams are transient and must not replay.
DEFAULT_LATCH_RULES = (
    ("/arm/*/joint_states", True),
    ("/arm/*/ee_pose", True),
    ("/cloud/points", True),
    ("/hand/*", False),
)

# Canonical topic table.
TOPIC_SCHEMAS = {
    "/hand/left": "PoseStamped",
    "/hand/right": "PoseStamped",
    "/hand/left/grab": "Grab",
    "/hand/right/grab": "Grab",
    "/arm/left/joint_states": "JointState",
    "/arm/right/joint_states": "JointState",
    "/arm/left/ee_pose": "PoseStamped",
    "/arm/right/ee_pose": "PoseStamped",
    "/arm/left/twist_cmd": "Twist",
    "/arm/right/twist_cmd": "Twist",
    "/teleop/scale": "Float64",
    "/teleop/fixtures": "FixtureConfig",
    "/cloud/points": "PointCloud",
}


@dataclass
class TopicRecord:
    name: str
    schema: Optional[str] = None
    advertised: bool = False
    publishers: set = field(default_factory=set)
    subscribers: set = field(default_factory=set)
    latched_last: Optional[Envelope] = None


class Session:
    """One connected client: bounded outbound data queue plus a small
    out-of-band status queue (so drop warnings never displace data)."""

    _ids = itertools.count(1)

    def __init__(self, broker: "Broker", name: str = ""):
        self.id = f"s{next(Session._ids)}"
        self.name = name or self.id
        self.broker = broker
        self.queue: deque = deque()
        self.status_queue: deque = deque()
        self.subscriptions: set = set()
        self.dropped_since_warn = 0
        self.dropped_total = 0
        self.last_warn_t: Optional[float] = None
        self.closed = False
        self.wakeup: Optional[Callable[[], None]] = None

    def pending(self):
        """Drain everything queued, statuses first."""
        out = list(self.status_queue) + list(self.queue)
        self.status_queue.clear()
        self.queue.clear()
        return out

    def _wake(self):
        if self.wakeup is not None:
            self.wakeup()


class Broker:
    """Topic registry and fan-out. Not thread-safe by design: drive it from
    one loop (or hold your own lock)."""

    def __init__(
        self,
        latch_rules: Iterable = DEFAULT_LATCH_RULES,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
        clock: Callable[[], float] = time.monotonic,
        strict_schemas: bool = True,
    ):
        self.latch_rules = tuple(latch_rules)
        self.queue_capacity = queue_capacity
        self.clock = clock
        self.strict_schemas = strict_schemas
        self.topics: Dict[str, TopicRecord] = {}
        self.sessions: Dict[str, Session] = {}

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, name: str = "") -> Session:
        s = Session(self, name)
        self.sessions[s.id] = s
        return s

    def drop_session(self, session: Session):
        """Idempotent removal from every registry set, then GC of dead topics."""
        if session.id not in self.sessions:
            return
        del self.sessions[session.id]
        session.closed = True
        for topic in list(self.topics.values()):
            topic.publishers.discard(session.id)
            topic.subscribers.discard(session.id)
        self._gc()

    def _gc(self):
        dead = [
            name
            for name, t in self.topics.items()
            if not t.publishers and not t.subscribers and t.latched_last is None
        ]
        for name in dead:
            del self.topics[name]

    # -- helpers ---------------------------------------------------------------

    def latch_enabled(self, topic: str) -> bool:
        for pattern, enabled in self.latch_rules:
            if fnmatch.fnmatchcase(topic, pattern):
                return enabled
        return False

    def _status(self, session: Session, level: str, text: str, env_id=None):
        if session.closed:
            return
        session.status_queue.append(Envelope(op="status", id=env_id, level=level, text=text))
        session._wake()

    def _enqueue(self, session: Session, env: Envelope):
        if session.closed:
            return
        q = session.queue
        if len(q) >= self.queue_capacity:
            # Drop-oldest, same topic first: teleop streams are state-like,
            # the newest sample matters most.
            dropped = False
            for i, old in enumerate(q):
                if old.topic == env.topic:
                    del q[i]
                    dropped = True
                    break
            if not dropped:
                q.popleft()
            session.dropped_since_warn += 1
            session.dropped_total += 1
            now = self.clock()
            if session.last_warn_t is None or now - session.last_warn_t >= WARN_COALESCE_INTERVAL:
                self._status(session, "warn", f"dropped {session.dropped_since_warn}")
                session.dropped_since_warn = 0
                session.last_warn_t = now
        q.append(env)
        session._wake()

    # -- envelope handling -----------------------------------------------------

    def handle_envelope(self, session: Session, env: Envelope):
        handler = getattr(self, f"_op_{env.op}", None)
        if handler is None:
            self._status(session, "error", f"unsupported op {env.op!r}", env.id)
            return
        handler(session, env)

    def _op_advertise(self, session: Session, env: Envelope):
        schema = env.type
        if schema is not None and schema not in TOPIC_SCHEMAS.values():
            self._status(session, "error", f"unknown type {schema!r}", env.id)
            return
        rec = self.topics.get(env.topic)
        if rec is None:
            rec = self.topics[env.topic] = TopicRecord(name=env.topic)
        if rec.advertised and rec.schema != schema:
            self._status(
                session,
                "error",
                f"type mismatch on {env.topic}: {rec.schema!r} != {schema!r}",
                env.id,
            )
            return
        rec.schema = schema
        rec.advertised = True
        rec.publishers.add(session.id)

    def _op_unadvertise(self, session: Session, env: Envelope):
        rec = self.topics.get(env.topic)
        if rec is not None:
            rec.publishers.discard(session.id)
            if not rec.publishers:
                rec.advertised = False
            self._gc()

    def _op_subscribe(self, session: Session, env: Envelope):
        rec = self.topics.get(env.topic)
        if rec is None:
            rec = self.topics[env.topic] = TopicRecord(name=env.topic)
        rec.subscribers.add(session.id)
        session.subscriptions.add(env.topic)
        if rec.latched_last is not None:
            self._enqueue(session, rec.latched_last)

    def _op_unsubscribe(self, session: Session, env: Envelope):
        rec = self.topics.get(env.topic)
        session.subscriptions.discard(env.topic)
        if rec is not None:
            rec.subscribers.discard(session.id)
            self._gc()

    def _op_publish(self, session: Session, env: Envelope):
        rec = self.topics.get(env.topic)
        if rec is None or not rec.advertised:
            self._status(session, "error", f"topic not advertised: {env.topic}", env.id)
            return
        if self.strict_schemas and rec.schema is not None:
            try:
                validate_payload(rec.schema, env.msg)
            except DecodeError as e:
                self._status(session, "error", f"payload rejected on {env.topic}: {e}", env.id)
                return
        if self.latch_enabled(env.topic):
            rec.latched_last = env
        for sid in rec.subscribers:
            sub = self.sessions.get(sid)
            if sub is not None:
                self._enqueue(sub, env)

    def _op_status(self, session: Session, env: Envelope):
        # Clients may report status; the bridge only logs it.
        log.debug("status from %s: %s %s", session.name, env.level, env.text)


class BridgeServer:
    """WebSocket front end for a Broker, one envelope per text frame."""

    def __init__(
        self,
        broker: Optional[Broker] = None,
        host: str = "127.0.0.1",
        port: int = 9090,
        process_request=None,
    ):
        self.broker = broker or Broker()
        self.host = host
        self.port = port
        self._server = None
        self._process_request = process_request
        self._writer_tasks = set()

    async def start(self):
        import websockets

        self._server = await websockets.serve(
            self._handle_client,
            self.host,
            self.port,
            process_request=self._process_request,
        )
        return self

    @property
    def bound_port(self) -> int:
        socks = self._server.sockets
        return socks[0].getsockname()[1]

    async def stop(self):
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for t in list(self._writer_tasks):
            t.cancel()

    async def _handle_client(self, ws):
        broker = self.broker
        session = broker.create_session(name=str(ws.remote_address))
        ready = asyncio.Event()
        session.wakeup = ready.set

        async def writer():
            try:
                while True:
                    await ready.wait()
                    ready.clear()
                    for env in session.pending():
                        await ws.send(encode(env))
            except asyncio.CancelledError:
                pass
            except Exception:
                pass

        wtask = asyncio.create_task(writer())
        self._writer_tasks.add(wtask)
        try:
            async for frame in ws:
                try:
                    env = decode(frame)
                except DecodeError as e:
                    broker._status(session, "error", f"bad envelope: {e}")
                    continue
                broker.handle_envelope(session, env)
        except Exception:
            pass
        finally:
            broker.drop_session(session)
            wtask.cancel()
            self._writer_tasks.discard(wtask)


class LocalClient:
    """In-process bridge client used by the simulator and replay engine.

    Speaks the same envelope interface as a socket client; delivery is a
    plain queue drained by the owner.
    """

    def __init__(self, broker: Broker, name: str = "local"):
        self.broker = broker
        self.session = broker.create_session(name=name)

    def send(self, env: Envelope):
        self.broker.handle_envelope(self.session, env)

    def advertise(self, topic: str, schema: Optional[str] = None):
        self.send(Envelope(op="advertise", topic=topic, type=schema or TOPIC_SCHEMAS.get(topic)))

    def subscribe(self, topic: str):
        self.send(Envelope(op="subscribe", topic=topic))

    def publish(self, topic: str, msg):
        self.send(Envelope(op="publish", topic=topic, msg=msg))

    def drain(self):
        return self.session.pending()

    def close(self):
        self.broker.drop_session(self.session)
