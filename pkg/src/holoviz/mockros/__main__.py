"""CLI: run the mock rosbridge server with a scenario.

    mockros --scenario nav --bind 0.0.0.0:9090 --speed 0.5 --time-scale 10
"""

from __future__ import annotations

import argparse
import logging
import signal
import threading

from ..clockutil import Clock
from .scenarios import SCENARIOS, ScenarioParams, build_scenario
from .server import MockRosServer


def parse_bind(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected host:port, got {value!r}")
    return host, int(port)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mockros", description=__doc__)
    parser.add_argument("--scenario", choices=sorted(SCENARIOS), default="nav")
    parser.add_argument("--bind", type=parse_bind, default=("0.0.0.0", 9090),
                        metavar="HOST:PORT")
    parser.add_argument("--speed", type=float, default=0.5, help="robot speed, m/s")
    parser.add_argument("--tf-rate", type=float, default=30.0, help="broadcast rate, Hz")
    parser.add_argument("--time-scale", type=float, default=1.0,
                        help="simulation acceleration factor")
    parser.add_argument("--waypoint", action="append", default=[], metavar="X,Y,YAW",
                        help="patrol waypoint (repeatable)")
    parser.add_argument("--log-level", default="info")
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    waypoints = []
    for spec in args.waypoint:
        x, y, yaw = (float(v) for v in spec.split(","))
        waypoints.append((x, y, yaw))
    params = ScenarioParams(speed=args.speed, tf_rate=args.tf_rate, waypoints=waypoints)
    scenario = build_scenario(args.scenario, params)
    host, port = args.bind
    server = MockRosServer(host=host, port=port, scenario=scenario,
                           clock=Clock(scale=args.time_scale))
    server.start()

    done = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: done.set())
    done.wait()
    server.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
