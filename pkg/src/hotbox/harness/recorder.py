"""Session recorder: a WebSocket client that subscribes to topics and logs
every received envelope with a monotonic timestamp."""

from __future__ import annotations

import asyncio
import time
from typing import Iterable, Optional

from hotbox.harness.logs import LOG_HEADER, LogRecord, direction_for_topic
from hotbox.messages import DecodeError, Envelope, decode, encode


class ConnectError(RuntimeError):
    pass


async def record(
    url: str,
    topics: Iterable[str],
    out_path: str,
    stop: Optional[asyncio.Event] = None,
    max_records: Optional[int] = None,
) -> int:
    """Subscribe to `topics` at `url` and append one log line per envelope.

    Runs until `stop` is set (or max_records is reached); flushes on exit.
    Returns the number of records written.
    """
    import websockets

    try:
        ws = await websockets.connect(url)
    except OSError as e:
        raise ConnectError(f"cannot reach {url}: {e}") from None

    count = 0
    t_start = time.monotonic()
    with open(out_path, "w", encoding="utf-8") as f:
        f.write(LOG_HEADER + "\n")
        try:
            for topic in topics:
                await ws.send(encode(Envelope(op="subscribe", topic=topic)))
            while max_records is None or count < max_records:
                if stop is not None and stop.is_set():
                    break
                try:
                    frame = await asyncio.wait_for(ws.recv(), timeout=0.1)
                except asyncio.TimeoutError:
                    continue
                except Exception:
                    break
                try:
                    env = decode(frame)
                except DecodeError:
                    continue
                rec = LogRecord(
                    t=time.monotonic() - t_start,
                    direction=direction_for_topic(env.topic),
                    envelope=env,
                )
                f.write(rec.to_line() + "\n")
                count += 1
        finally:
            f.flush()
            await ws.close()
    return count
