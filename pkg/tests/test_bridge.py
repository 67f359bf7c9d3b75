import asyncio
import json

import httpx
import pytest
from websockets.asyncio.client import connect

from canalpilot.bridge import BridgeServer
from canalpilot.config import Config
from canalpilot.protocol import decode_snapshot

from conftest import default_user, straight_canal


def run_bridge_test(coro, hz=60.0, **bridge_kwargs):
    """Start a bridge on an ephemeral port, run coro(bridge, port), stop."""

    async def main():
        canal = straight_canal(n=120)
        bridge = BridgeServer(canal, Config(), default_user(), Config(),
                              hz=hz, **bridge_kwargs)
        port = await bridge.start(port=0)
        try:
            await asyncio.wait_for(coro(bridge, port), timeout=30.0)
        finally:
            await bridge.stop()

    asyncio.run(main())


async def say_hello(ws, role="pilot"):
    await ws.send(json.dumps({"kind": "hello", "role": role}))
    welcome = json.loads(await ws.recv())
    assert welcome["kind"] == "welcome"
    return welcome


async def next_of_kind(ws, kind):
    while True:
        data = json.loads(await ws.recv())
        if data.get("kind") == kind:
            return data


class TestHandshake:
    def test_first_pilot_wins(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as first, \
                    connect(f"ws://127.0.0.1:{port}/ws") as second:
                w1 = await say_hello(first, "pilot")
                w2 = await say_hello(second, "pilot")
                assert w1["pilot"] is True
                assert w2["pilot"] is False
                assert w1["canal"] == bridge.digest

        run_bridge_test(scenario)

    def test_pilot_handoff_on_disconnect(self):
        async def scenario(bridge, port):
            first = await connect(f"ws://127.0.0.1:{port}/ws")
            await say_hello(first, "pilot")
            async with connect(f"ws://127.0.0.1:{port}/ws") as second:
                w2 = await say_hello(second, "pilot")
                assert w2["pilot"] is False
                await first.close()
                # wait until the bridge notices and promotes
                for _ in range(100):
                    if bridge.pilot is not None and bridge.pilot.wants_pilot:
                        if bridge.pilot.conn is not first:
                            break
                    await asyncio.sleep(0.02)
                await second.send(json.dumps({"kind": "button", "button": "start"}))
                ack = await next_of_kind(second, "ack")
                assert ack["ok"] is True

        run_bridge_test(scenario)

    def test_non_pilot_inputs_rejected(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as pilot, \
                    connect(f"ws://127.0.0.1:{port}/ws") as watcher:
                await say_hello(pilot, "pilot")
                await say_hello(watcher, "observer")
                await watcher.send(json.dumps({"kind": "button", "button": "start"}))
                reply = await next_of_kind(watcher, "error")
                assert "pilot" in reply["error"]

        run_bridge_test(scenario)


class TestInputsAndSnapshots:
    def test_two_clients_see_identical_sequence_numbers(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as first, \
                    connect(f"ws://127.0.0.1:{port}/ws") as second:
                await say_hello(first, "pilot")
                await say_hello(second, "observer")

                async def collect(ws, n):
                    seqs = []
                    while len(seqs) < n:
                        data = json.loads(await ws.recv())
                        if data["kind"] == "snapshot":
                            seqs.append(data["seq"])
                    return seqs

                seqs_a, seqs_b = await asyncio.gather(
                    collect(first, 15), collect(second, 15))
                # same broadcast: overlapping windows carry identical numbers
                shared = set(seqs_a) & set(seqs_b)
                assert len(shared) >= 10
                tail_a = [s for s in seqs_a if s in shared]
                tail_b = [s for s in seqs_b if s in shared]
                assert tail_a == tail_b

        run_bridge_test(scenario)

    def test_snapshots_flow_with_increasing_seq(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as ws:
                await say_hello(ws)
                seqs = []
                while len(seqs) < 10:
                    data = json.loads(await ws.recv())
                    if data["kind"] == "snapshot":
                        decode_snapshot(json.dumps(data))  # schema-valid
                        seqs.append(data["seq"])
                assert seqs == sorted(seqs)
                assert len(set(seqs)) == len(seqs)

        run_bridge_test(scenario)

    def test_start_button_reaches_controller(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as ws:
                await say_hello(ws)
                await ws.send(json.dumps({"kind": "button", "button": "start"}))
                await next_of_kind(ws, "ack")
                for _ in range(30):
                    snap = await next_of_kind(ws, "snapshot")
                    if snap["mode"] == "advancing":
                        return
                raise AssertionError("controller never started advancing")

        run_bridge_test(scenario)

    def test_stick_clamp_warning_in_ack(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as ws:
                await say_hello(ws)
                await ws.send(json.dumps({"kind": "stick", "u": 7}))
                ack = await next_of_kind(ws, "ack")
                assert ack["warnings"] == ["u clamped"]
                assert bridge.held_stick == (1.0, 0.0)

        run_bridge_test(scenario)

    def test_malformed_input_keeps_connection_open(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as ws:
                await say_hello(ws)
                await ws.send("this is not json")
                reply = await next_of_kind(ws, "error")
                assert "JSON" in reply["error"]
                # still alive: a valid message gets acked
                await ws.send(json.dumps({"kind": "stick", "u": 0.2, "v": 0.0}))
                ack = await next_of_kind(ws, "ack")
                assert ack["ok"] is True

        run_bridge_test(scenario)

    def test_reject_flood_disconnects(self):
        async def scenario(bridge, port):
            async with connect(f"ws://127.0.0.1:{port}/ws") as ws:
                await say_hello(ws)
                for _ in range(20):
                    await ws.send("garbage")
                with pytest.raises(Exception):
                    for _ in range(2000):
                        await asyncio.wait_for(ws.recv(), timeout=5.0)

        run_bridge_test(scenario)


class TestHttpSurface:
    def test_canal_fetch_by_digest(self):
        async def scenario(bridge, port):
            async with httpx.AsyncClient() as client:
                ok = await client.get(
                    f"http://127.0.0.1:{port}/canal/{bridge.digest}")
                assert ok.status_code == 200
                body = ok.json()
                assert body["format"] == "canal"
                assert body["n_states"] == 120
                missing = await client.get(
                    f"http://127.0.0.1:{port}/canal/0000000000000000")
                assert missing.status_code == 404

        run_bridge_test(scenario)

    def test_ui_fallback_page(self):
        async def scenario(bridge, port):
            async with httpx.AsyncClient() as client:
                page = await client.get(f"http://127.0.0.1:{port}/ui")
                assert page.status_code == 200
                assert "canalpilot" in page.text

        run_bridge_test(scenario)

    def test_ui_serves_files_from_dir(self, tmp_path):
        (tmp_path / "index.html").write_text("<html>cockpit</html>")
        (tmp_path / "app.js").write_text("console.log('hi')")

        async def scenario(bridge, port):
            async with httpx.AsyncClient() as client:
                index = await client.get(f"http://127.0.0.1:{port}/ui/")
                assert index.text == "<html>cockpit</html>"
                js = await client.get(f"http://127.0.0.1:{port}/ui/app.js")
                assert js.status_code == 200
                assert "javascript" in js.headers["content-type"]
                escape = await client.get(
                    f"http://127.0.0.1:{port}/ui/../secret")
                assert escape.status_code == 404

        run_bridge_test(scenario, ui_dir=tmp_path)
