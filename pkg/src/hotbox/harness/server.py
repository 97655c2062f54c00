"""Live control-station server: bridge + tick loop on one asyncio loop.

The tick loop runs on absolute deadlines (next deadline advances by exactly
dt each step) so timing error never accumulates: drift over a run is bounded
by one tick regardless of duration.
"""

from __future__ import annotations

import asyncio
import http
import logging
from typing import Optional

from hotbox.bridge import BridgeServer, Broker
from hotbox.harness.config import ServerConfig, default_config
from hotbox.harness.rig import SimRig
from hotbox.messages import dumps_canonical

log = logging.getLogger("hotbox.server")

CHAINS_PATH = "/config/chains"


class HarnessServer:
    def __init__(self, cfg: Optional[ServerConfig] = None):
        self.cfg = cfg or default_config()
        self.broker = Broker(queue_capacity=self.cfg.queue_capacity)
        self.rig = SimRig(self.cfg, self.broker)
        self._chains_doc = dumps_canonical(
            {side: arm.chain.to_payload() for side, arm in self.rig.arms.items()}
        )
        self.ws = BridgeServer(
            self.broker, self.cfg.host, self.cfg.port, process_request=self._process_request
        )
        self._tick_task: Optional[asyncio.Task] = None
        self._stopped = asyncio.Event()

    def _process_request(self, connection, request):
        if request.path == CHAINS_PATH:
            response = connection.respond(http.HTTPStatus.OK, self._chains_doc)
            response.headers["Content-Type"] = "application/json"
            response.headers["Access-Control-Allow-Origin"] = "*"
            return response
        return None

    @property
    def port(self) -> int:
        return self.ws.bound_port

    async def start(self):
        await self.ws.start()
        self._tick_task = asyncio.create_task(self._tick_loop())
        log.info("serving on ws://%s:%d (tick %.0f Hz)", self.cfg.host, self.port, self.cfg.tick_rate)
        return self

    async def _tick_loop(self):
        loop = asyncio.get_running_loop()
        dt = self.cfg.dt
        t0 = loop.time()
        deadline = t0 + dt
        try:
            while True:
                delay = deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                now = loop.time() - t0
                self.rig.drain_inbound(now)
                self.rig.tick(now)
                deadline += dt
        except asyncio.CancelledError:
            pass

    async def stop(self):
        """Clean shutdown: stop ticking, flush final state, close sockets."""
        if self._tick_task is not None:
            self._tick_task.cancel()
            try:
                await self._tick_task
            except asyncio.CancelledError:
                pass
        loop = asyncio.get_running_loop()
        self.rig.publish_state(loop.time())  # final latched states
        await asyncio.sleep(0.05)  # let writer tasks drain
        await self.ws.stop()
        self.rig.close()
        self._stopped.set()

    async def serve_forever(self, stop: Optional[asyncio.Event] = None):
        await self.start()
        try:
            if stop is None:
                await asyncio.Event().wait()
            else:
                await stop.wait()
        finally:
            await self.stop()


async def run_server(cfg: Optional[ServerConfig] = None, stop: Optional[asyncio.Event] = None):
    server = HarnessServer(cfg)
    await server.serve_forever(stop)
    return server
