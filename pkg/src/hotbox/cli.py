"""Command-line face: serve, record, replay."""

from __future__ import annotations

import argparse
import asyncio
import logging
import signal
import sys

from hotbox.harness.config import ConfigError, default_config, load_config
from hotbox.harness.logs import LatencyModel, ReplayError
from hotbox.harness.replay import replay
from hotbox.harness.recorder import ConnectError, record
from hotbox.harness.server import run_server


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hotbox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the control-station server")
    serve.add_argument("--config", help="server config file (JSON)")
    serve.add_argument("--port", type=int, help="override listen port")
    serve.add_argument(
        "--chain",
        action="append",
        default=[],
        metavar="SIDE=FILE",
        help="override a chain file per arm, e.g. left=chains/custom.json",
    )

    rec = sub.add_parser("record", help="record bridge traffic to a session log")
    rec.add_argument("--url", required=True, help="bridge WebSocket URL, e.g. ws://127.0.0.1:9090")
    rec.add_argument("--topics", required=True, help="comma-separated topic list")
    rec.add_argument("--out", required=True, help="output log path")

    rep = sub.add_parser("replay", help="replay a session log headlessly and report metrics")
    rep.add_argument("--log", required=True, help="session log path")
    rep.add_argument("--config", help="server config file (JSON)")
    rep.add_argument("--speed", type=float, default=1.0, help="timing multiplier (default 1.0)")
    rep.add_argument("--latency-base", type=float, default=0.0, help="base injection latency, ms")
    rep.add_argument("--latency-jitter", type=float, default=0.0, help="uniform jitter, +/- ms")
    rep.add_argument("--drop", type=float, default=0.0, help="drop probability in [0, 1)")
    rep.add_argument(
        "--drop-topics",
        default="*",
        help="comma-separated topic patterns the drop probability applies to",
    )
    rep.add_argument("--seed", type=int, default=0, help="latency model RNG seed")
    rep.add_argument("--extra-time", type=float, default=2.0, help="settle time after last delivery, s")
    rep.add_argument("--report", help="write the metrics report to this file")
    return parser


def _load_config(args):
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "port", None) is not None:
        cfg.port = args.port
    for override in getattr(args, "chain", []):
        side, _, path = override.partition("=")
        if not path or side not in cfg.arms:
            raise ConfigError(f"bad --chain override {override!r}")
        cfg.arms[side].chain_ref = path
        cfg.arms[side].resolve_chain()  # fail fast on a bad file
    return cfg


def cmd_serve(args) -> int:
    try:
        cfg = _load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    async def main():
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop.set)
        await run_server(cfg, stop)

    try:
        asyncio.run(main())
    except OSError as e:
        print(f"startup failed: {e}", file=sys.stderr)
        return 1
    return 0


def cmd_record(args) -> int:
    topics = [t for t in args.topics.split(",") if t]

    async def main():
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop.set)
        n = await record(args.url, topics, args.out, stop=stop)
        print(f"wrote {n} records to {args.out}")

    try:
        asyncio.run(main())
    except ConnectError as e:
        print(f"record failed: {e}", file=sys.stderr)
        return 1
    return 0


def cmd_replay(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    latency = LatencyModel(
        base_ms=args.latency_base,
        jitter_ms=args.latency_jitter,
        drop_prob=args.drop,
        seed=args.seed,
        drop_topics=tuple(p for p in args.drop_topics.split(",") if p),
    )
    try:
        result = replay(args.log, cfg, speed=args.speed, latency=latency, extra_time=args.extra_time)
    except (ReplayError, OSError) as e:
        print(f"replay failed: {e}", file=sys.stderr)
        return 1
    report = result.metrics.to_text()
    print(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(report + "\n")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"serve": cmd_serve, "record": cmd_record, "replay": cmd_replay}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
