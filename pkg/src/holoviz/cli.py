"""Launcher: wires bridge, transform tree, plugins and UI sessions together.

    holoviz --config cfg.json
    holoviz --config cfg.json --headless --script events.jsonl --time-scale 10

Startup order is bridge, then plugins, then sessions; shutdown reverses it.
``HOLOVIZ_CONFIG`` provides the config path when ``--config`` is absent.
Exit codes: 0 clean shutdown, 1 bridge unreachable, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import threading
from pathlib import Path

from .align import detection_from_wire
from .bridge.client import BridgeClient
from .clockutil import Clock
from .config import Config, load_config
from .engine import Engine
from .errors import BindError, ConfigError, ConnectRefused
from .plugins import input_event_from_wire
from .session import SessionServer

log = logging.getLogger("holoviz.cli")

ENV_CONFIG = "HOLOVIZ_CONFIG"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holoviz", description=__doc__)
    parser.add_argument("--config", help=f"config file (falls back to ${ENV_CONFIG})")
    parser.add_argument("--url", help="bridge endpoint override (ws:// or tcp://)")
    parser.add_argument("--session-port", type=int, help="UI session port override")
    parser.add_argument("--headless", action="store_true",
                        help="run without serving UI sessions")
    parser.add_argument("--script", help="input-event script to replay (one JSON per line)")
    parser.add_argument("--time-scale", type=float, help="clock acceleration factor")
    parser.add_argument("--log-level", help="debug/info/warning/error")
    parser.add_argument("--run-for", type=float, default=None,
                        help="exit after this many virtual seconds")
    return parser


def replay_script(path: str, engine: Engine, done: threading.Event) -> None:
    """Feed recorded events at their virtual timestamps; kinds: input,
    detect, shutdown."""
    try:
        lines = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        log.error("cannot read script %s: %s", path, exc)
        done.set()
        return
    for event in lines:
        if not engine.clock.sleep_until(float(event.get("t", 0.0))):
            return
        kind = event.get("kind")
        try:
            if kind == "input":
                engine.submit_input(input_event_from_wire(event.get("payload") or {}))
            elif kind == "detect":
                engine.inject_detection(detection_from_wire(event.get("payload") or {}))
            elif kind == "shutdown":
                done.set()
                return
            else:
                log.warning("script: unknown event kind %r", kind)
        except ValueError as exc:
            log.warning("script: bad event skipped: %s", exc)


def run(config: Config, *, headless: bool = False, script: str | None = None,
        run_for: float | None = None) -> int:
    logging.basicConfig(
        level=config.log_level.upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    clock = Clock(scale=config.time_scale)
    engine: Engine | None = None

    def bridge_status(level: str, text: str) -> None:
        if engine is not None:
            engine.status(level, text)
        else:
            log.log(logging.WARNING if level != "info" else logging.INFO, text)

    client = BridgeClient(config.bridge_url, status_handler=bridge_status)
    engine = Engine(
        client,
        tick_hz=config.tick_hz,
        fixed_frame=config.fixed_frame,
        tf_topic=config.tf_topic,
        marker_in_rwcs=config.marker_in_rwcs,
        clock=clock,
    )
    try:
        client.connect()
    except ConnectRefused as exc:
        log.error("%s", exc)
        return 1

    engine.attach_tf()
    try:
        engine.register_plugins(config.plugins)
    except Exception as exc:
        log.error("plugin configuration rejected: %s", exc)
        client.close()
        return 2

    sessions: SessionServer | None = None
    if not headless:
        try:
            sessions = SessionServer(engine, port=config.session_port,
                                     static_dir=config.static_dir).start()
        except BindError as exc:
            log.error("%s", exc)
            client.close()
            return 1

    done = threading.Event()
    try:
        signal.signal(signal.SIGINT, lambda *_: done.set())
        signal.signal(signal.SIGTERM, lambda *_: done.set())
    except ValueError:
        pass  # not on the main thread (tests drive run() directly)

    engine.start()
    if script:
        threading.Thread(target=replay_script, args=(script, engine, done),
                         name="script-replay", daemon=True).start()
    if run_for is not None:
        threading.Thread(
            target=lambda: (clock.sleep_until(run_for), done.set()),
            name="run-for", daemon=True,
        ).start()

    done.wait()
    log.info("shutting down")
    if sessions is not None:
        sessions.stop()
    engine.stop()
    clock.stop()
    client.close()
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config_path = args.config or os.environ.get(ENV_CONFIG)
    try:
        config = load_config(config_path) if config_path else Config()
    except ConfigError as exc:
        print(f"config error: {exc}", flush=True)
        return 2
    if args.url:
        config.bridge_url = args.url
    if args.session_port is not None:
        config.session_port = args.session_port
    if args.time_scale is not None:
        config.time_scale = args.time_scale
    if args.log_level:
        config.log_level = args.log_level
    return run(config, headless=args.headless, script=args.script, run_for=args.run_for)


if __name__ == "__main__":
    raise SystemExit(main())
