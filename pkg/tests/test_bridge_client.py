import time

import pytest
from websockets.sync.client import connect as ws_connect

from helpers import Collector, free_port, http_json, wait_for
from holoviz.bridge import envelope
from holoviz.bridge.client import BridgeClient
from holoviz.bridge.envelope import BridgeOp
from holoviz.bridge.messages import (
    POSE_STAMPED,
    STRING,
    TF_MESSAGE,
    CommandString,
    PoseStamped,
    TFMessage,
)
from holoviz.clockutil import Clock
from holoviz.errors import BridgeError, ConnectRefused, EncodeError
from holoviz.geom import Transform, Vec3, quat_from_yaw
from holoviz.mockros import NavScenario, ScenarioParams
from holoviz.mockros.server import MockRosServer
from holoviz.txgraph import Stamp


@pytest.fixture
def server():
    srv = MockRosServer(port=free_port(),
                        scenario=NavScenario(ScenarioParams(tf_rate=30.0)),
                        clock=Clock(scale=2.0)).start()
    yield srv
    srv.stop()


@pytest.fixture
def client(server):
    c = BridgeClient(server.url, backoff_base=0.1, retry_budget=20).connect()
    yield c
    c.close()


class TestSubscribe:
    def test_tf_messages_decoded_and_delivered(self, client):
        got = Collector()
        client.subscribe("/tf", TF_MESSAGE, got)
        wait_for(lambda: len(got) >= 3)
        msg = got.items[0]
        assert isinstance(msg, TFMessage)
        assert msg.transforms[0].parent == "map"
        assert msg.transforms[0].child == "base_link"

    def test_malformed_payload_dropped_and_counted(self, server, client):
        got = Collector()
        handle = client.subscribe("/junk", TF_MESSAGE, got)
        wait_for(lambda: any(
            s["topic"] == "/junk"
            for s in http_json(f"http://127.0.0.1:{server.port}/subscriptions")["subscriptions"]
        ))
        server.publish("/junk", "", {"transforms": "not-a-list"})
        wait_for(lambda: client.drop_count(handle) == 1)
        assert len(got) == 0

    def test_unsubscribe_stops_delivery(self, server, client):
        got = Collector()
        handle = client.subscribe("/robot_pose", POSE_STAMPED, got)
        wait_for(lambda: len(got) >= 1)
        client.unsubscribe(handle)
        wait_for(lambda: not any(
            s["topic"] == "/robot_pose"
            for s in http_json(f"http://127.0.0.1:{server.port}/subscriptions")["subscriptions"]
        ))
        seen = len(got)
        time.sleep(0.3)
        assert len(got) <= seen + 1  # nothing after the unsubscribe settles

    def test_in_order_per_topic(self, client):
        got = Collector()
        client.subscribe("/robot_pose", POSE_STAMPED, got)
        wait_for(lambda: len(got) >= 10)
        seqs = [m.seq for m in got.items[:10]]
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


class TestPublish:
    def test_goal_reaches_scenario(self, server, client):
        goal = PoseStamped(frame_id="map", stamp=Stamp(1, 0),
                           pose=Transform(Vec3(1.5, 0.0, 0.0), quat_from_yaw(0.0)))
        client.publish("/move_base_simple/goal", POSE_STAMPED, goal)
        wait_for(lambda: server.scenario.goal == (1.5, 0.0, 0.0))
        wait_for(lambda: server.scenario.state.x > 0.05)

    def test_command_string(self, server, client):
        got = Collector()
        client.subscribe("/handover/command", STRING, got)
        client.publish("/handover/command", STRING, CommandString("start"))
        wait_for(lambda: len(got) >= 1)
        assert got.items[0] == CommandString("start")

    def test_nan_payload_is_encode_error(self, client):
        bad = {
            "header": {"seq": 0, "stamp": {"secs": 0, "nsecs": 0}, "frame_id": "map"},
            "pose": {"position": {"x": float("nan"), "y": 0, "z": 0},
                     "orientation": {"x": 0, "y": 0, "z": 0, "w": 1}},
        }
        with pytest.raises(EncodeError):
            client.publish("/move_base_simple/goal", POSE_STAMPED, bad)

    def test_advertise_sent_once(self, server, client):
        with ws_connect(server.url) as observer:
            # mockros only tracks advertisements; verify via repeated publishes
            for k in range(3):
                client.publish("/handover/command", STRING, CommandString(f"c{k}"))
        # No assertion failure means envelopes were valid; coverage of the
        # advertise-once bookkeeping:
        assert client._advertised["/handover/command"] == STRING


class TestReconnect:
    def test_subscriptions_restored_after_server_restart(self, server):
        client = BridgeClient(server.url, backoff_base=0.1, retry_budget=30).connect()
        try:
            got = Collector()
            client.subscribe("/tf", TF_MESSAGE, got)
            client.publish("/handover/command", STRING, CommandString("hello"))
            wait_for(lambda: len(got) >= 1)
            port = server.port
            server.stop()
            time.sleep(0.3)
            replacement = MockRosServer(port=port,
                                        scenario=NavScenario(ScenarioParams(tf_rate=30.0)),
                                        clock=Clock(scale=2.0)).start()
            try:
                wait_for(lambda: client.connected.is_set(), timeout=6.0)
                wait_for(lambda: any(
                    s["topic"] == "/tf"
                    for s in http_json(f"http://127.0.0.1:{port}/subscriptions")["subscriptions"]
                ), timeout=6.0)
                before = len(got)
                wait_for(lambda: len(got) > before, timeout=6.0)  # data flows again
            finally:
                replacement.stop()
        finally:
            client.close()


class TestConnect:
    def test_connect_refused_after_budget(self):
        dead = f"ws://127.0.0.1:{free_port()}"
        t0 = time.monotonic()
        with pytest.raises(ConnectRefused):
            BridgeClient(dead, retry_budget=2, backoff_base=0.05).connect()
        assert time.monotonic() - t0 < 5.0

    def test_send_without_connect(self):
        client = BridgeClient("ws://127.0.0.1:1")
        with pytest.raises(BridgeError):
            client.publish("/x", STRING, CommandString("a"))

    def test_unknown_scheme_fails_fast(self):
        with pytest.raises(BridgeError):
            BridgeClient("gopher://nope", retry_budget=1).connect()


class TestTcpFallback:
    def test_tcp_scheme_round_trip(self):
        # Newline-delimited JSON over a raw socket, served by a tiny echo peer.
        import socket
        import threading

        lis = socket.socket()
        lis.bind(("127.0.0.1", 0))
        lis.listen(1)
        port = lis.getsockname()[1]
        received = []

        def peer():
            conn, _ = lis.accept()
            f = conn.makefile("rwb")
            line = f.readline()
            received.append(line)
            # Reply with a status envelope.
            f.write(envelope.encode(BridgeOp(op="status", level="info", msg="hi")) + b"\n")
            f.flush()

        t = threading.Thread(target=peer, daemon=True)
        t.start()
        statuses = []
        client = BridgeClient(f"tcp://127.0.0.1:{port}", retry_budget=1,
                              status_handler=lambda lvl, txt: statuses.append((lvl, txt)))
        client.connect()
        try:
            got = Collector()
            client.subscribe("/x", STRING, got)
            t.join(timeout=2.0)
            assert received and envelope.decode(received[0].rstrip(b"\n")).op == "subscribe"
            wait_for(lambda: ("info", "hi") in statuses)
        finally:
            client.close()
