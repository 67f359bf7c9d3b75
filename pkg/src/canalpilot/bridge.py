"""Live telemetry/input bridge over WebSocket.

One asyncio loop owns the simulation: a fixed-rate tick task consumes the
queued pilot inputs, steps the controller, and fans the encoded snapshot
out to per-client bounded queues (drop-oldest, so a slow reader can never
stall the control loop).  The first client asking for the pilot role gets
it; everyone else is read-only until the pilot disconnects.

Plain HTTP on the same port serves the cockpit static files under /ui and
the canal geometry at /canal/<digest>.  Protocol details: docs/protocol.md.
"""

import asyncio
import time
from pathlib import Path

from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from . import controller as ctl
from .config import Config
from .io_formats import canal_digest, canal_to_json
from .protocol import (
    ProtocolError,
    decode_input,
    encode_ack,
    encode_error,
    encode_snapshot,
    encode_welcome,
)
from .simulation import World, _snapshot

CLIENT_QUEUE_DEPTH = 16
REJECT_LIMIT_PER_SECOND = 10
HEARTBEAT_S = 5.0
HEARTBEAT_TIMEOUT_S = 15.0

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>canalpilot</title></head>
<body><h1>canalpilot bridge</h1>
<p>No cockpit assets were found. Build the frontend (see frontend/README.md)
and restart with --ui-dir, or connect a WebSocket client to this port.</p>
</body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


class _Client:
    def __init__(self, conn, wants_pilot: bool):
        self.conn = conn
        self.wants_pilot = wants_pilot
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_QUEUE_DEPTH)
        self.rejects = 0
        self.reject_window = time.monotonic()

    def offer(self, message: str) -> None:
        """Queue a snapshot, dropping the oldest when full."""
        while True:
            try:
                self.queue.put_nowait(message)
                return
            except asyncio.QueueFull:
                try:
                    self.queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass


class BridgeServer:
    def __init__(self, canal, canal_cfg: Config, user, cfg: Config,
                 hz: float = 30.0, scenario=None, ui_dir=None):
        self.canal = canal
        self.user = user
        self.cfg = cfg
        self.hz = hz
        self.dt = 1.0 / hz
        self.digest = canal_digest(canal, canal_cfg)
        self.canal_json = canal_to_json(canal, canal_cfg)
        self.ui_dir = Path(ui_dir) if ui_dir else None

        from .simulation import replace_object
        objects = [replace_object(o) for o in scenario.objects] if scenario else []
        self.world = World(objects)
        self.state = ctl.initial_state()
        self.seq = 0
        self.t = 0.0

        self.held_stick = (0.0, 0.0)
        self.pending_buttons: set = set()

        self.clients: list[_Client] = []
        self.pilot: _Client | None = None
        self._server = None
        self._tick_task = None

    # ------------------------------------------------------------------
    # simulation tick
    # ------------------------------------------------------------------

    def _tick_once(self) -> str:
        event = ctl.InputFrameEvent(stick=self.held_stick,
                                    buttons=frozenset(self.pending_buttons))
        self.pending_buttons.clear()
        prev_gripper = self.state.gripper
        self.state, pose, orient = ctl.step(self.state, self.canal, self.user,
                                            event, self.dt, self.cfg)
        self.world.update(pose, self.state.gripper, prev_gripper)
        self.seq += 1
        self.t += self.dt
        snap = _snapshot(self.seq, self.t, self.state, pose, orient,
                         self.canal, self.user, self.cfg, self.world.objects,
                         self.digest)
        return encode_snapshot(snap)

    async def _tick_loop(self):
        loop = asyncio.get_running_loop()
        next_deadline = loop.time() + self.dt
        while True:
            message = self._tick_once()
            for client in self.clients:
                client.offer(message)
            delay = next_deadline - loop.time()
            next_deadline += self.dt
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # Fell behind; never sleep negative, re-anchor gently.
                await asyncio.sleep(0)

    # ------------------------------------------------------------------
    # client handling
    # ------------------------------------------------------------------

    def _promote_pilot(self) -> None:
        if self.pilot is not None:
            return
        for client in self.clients:
            if client.wants_pilot:
                self.pilot = client
                break
        if self.pilot is None:
            # nobody steering: fail safe to a neutral stick
            self.held_stick = (0.0, 0.0)

    async def _sender(self, client: _Client):
        while True:
            message = await client.queue.get()
            await client.conn.send(message)

    def _count_reject(self, client: _Client) -> bool:
        """True when the client exceeded the reject budget and must go."""
        now = time.monotonic()
        if now - client.reject_window >= 1.0:
            client.reject_window = now
            client.rejects = 0
        client.rejects += 1
        return client.rejects > REJECT_LIMIT_PER_SECOND

    async def _handle(self, conn):
        # Handshake: first message must be a hello.
        try:
            raw = await asyncio.wait_for(conn.recv(), timeout=10.0)
            hello, _ = decode_input(raw)
            if hello.kind != "hello":
                raise ProtocolError("expected a hello message first")
        except ProtocolError as exc:
            await conn.send(encode_error(str(exc)))
            return
        except (asyncio.TimeoutError, ConnectionClosed):
            return

        client = _Client(conn, wants_pilot=hello.role == "pilot")
        self.clients.append(client)
        self._promote_pilot()
        await conn.send(encode_welcome(
            role="pilot" if self.pilot is client else "observer",
            pilot=self.pilot is client,
            canal_digest=self.digest, hz=self.hz))

        sender = asyncio.create_task(self._sender(client))
        try:
            async for raw in conn:
                try:
                    event, warnings = decode_input(raw)
                except ProtocolError as exc:
                    await conn.send(encode_error(str(exc)))
                    if self._count_reject(client):
                        break
                    continue
                if event.kind == "hello":
                    await conn.send(encode_error("already connected"))
                    continue
                if self.pilot is not client:
                    await conn.send(encode_error("not the pilot"))
                    continue
                if event.kind == "stick":
                    self.held_stick = event.stick
                elif event.kind == "button":
                    self.pending_buttons.add(event.button)
                await conn.send(encode_ack(warnings, event.client_t))
        except ConnectionClosed:
            pass
        finally:
            sender.cancel()
            self.clients.remove(client)
            if self.pilot is client:
                self.pilot = None
                self.held_stick = (0.0, 0.0)
                self._promote_pilot()

    # ------------------------------------------------------------------
    # plain HTTP: cockpit assets and canal geometry
    # ------------------------------------------------------------------

    def _respond(self, status: int, body: bytes, content_type: str) -> Response:
        headers = Headers([
            ("Content-Type", content_type),
            ("Content-Length", str(len(body))),
            ("Cache-Control", "no-cache"),
        ])
        reasons = {200: "OK", 404: "Not Found"}
        return Response(status, reasons.get(status, ""), headers, body)

    def _serve_static(self, path: str) -> Response:
        rel = path[len("/ui"):].lstrip("/") or "index.html"
        if self.ui_dir is None:
            return self._respond(200, _FALLBACK_PAGE.encode(),
                                 "text/html; charset=utf-8")
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) \
                or not target.is_file():
            return self._respond(404, b"not found", "text/plain")
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        return self._respond(200, target.read_bytes(), ctype)

    def process_request(self, conn, request):
        if "Upgrade" in request.headers:
            return None  # proceed with the WebSocket handshake
        path = request.path.split("?", 1)[0]
        if path == "/" or path == "/ui" or path.startswith("/ui/"):
            if path == "/":
                path = "/ui"
            return self._serve_static(path)
        if path.startswith("/canal/"):
            digest = path[len("/canal/"):]
            if digest == self.digest:
                return self._respond(200, self.canal_json.encode(),
                                     "application/json")
            return self._respond(404, b"unknown canal", "text/plain")
        return self._respond(404, b"not found", "text/plain")

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    async def start(self, port: int = 8080, host: str = "127.0.0.1"):
        self._server = await serve(
            self._handle, host, port,
            process_request=self.process_request,
            ping_interval=HEARTBEAT_S, ping_timeout=HEARTBEAT_TIMEOUT_S,
            max_size=64 * 1024,
        )
        self._tick_task = asyncio.create_task(self._tick_loop())
        return self._server.sockets[0].getsockname()[1]

    async def stop(self):
        if self._tick_task:
            self._tick_task.cancel()
        if self._server:
            self._server.close()
            await self._server.wait_closed()

    async def run(self, port: int = 8080, host: str = "0.0.0.0"):
        await self.start(port=port, host=host)
        try:
            await asyncio.Future()
        finally:
            await self.stop()


def serve_forever(canal, canal_cfg, user, cfg, port=8080, hz=30.0,
                  scenario=None, ui_dir=None):
    """Blocking entry point for the CLI; Ctrl-C shuts down cleanly."""
    bridge = BridgeServer(canal, canal_cfg, user, cfg, hz=hz,
                          scenario=scenario, ui_dir=ui_dir)
    print(f"serving canal {bridge.digest} on port {port} at {hz} Hz "
          f"(cockpit at http://localhost:{port}/ui)")
    try:
        asyncio.run(bridge.run(port=port))
    except KeyboardInterrupt:
        print("shutting down")
