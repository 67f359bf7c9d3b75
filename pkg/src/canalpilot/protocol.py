"""Wire-level telemetry messages: snapshots out, stick/button events in.

Messages are single-line JSON.  Snapshots carry a schema version ("v": 1)
and every numeric field quantized to 9 significant digits, so that
encode -> decode -> encode is byte-stable.  The full schema lives in
docs/protocol.md.
"""

import json
import math
from dataclasses import dataclass

MAX_INPUT_BYTES = 4096
BUTTON_NAMES = ("start", "stop", "toggle_direction", "toggle_gripper")


class ProtocolError(ValueError):
    """Malformed inbound message; the reason is safe to echo to the client."""


def quantize(x: float) -> float:
    """Canonical 9-significant-digit value used in every encoded message."""
    if not math.isfinite(x):
        raise ValueError("non-finite value in message")
    return float(f"{x:.9g}")


def _qlist(values) -> list:
    return [quantize(float(v)) for v in values]


@dataclass(frozen=True)
class ObjectSummary:
    object_id: str
    position: tuple
    state: str


@dataclass(frozen=True)
class StateSnapshot:
    seq: int
    t: float
    pose: tuple
    orient: tuple
    s: int
    rho: float
    phi: float
    mode: str
    direction: int
    gripper: str
    disk_class: str | None
    a_x: tuple | None
    a_y: tuple | None
    d_x: int | None
    d_y: int | None
    objects: tuple          # of ObjectSummary
    canal_digest: str


def encode_snapshot(snap: StateSnapshot) -> str:
    payload = {
        "v": 1,
        "kind": "snapshot",
        "seq": snap.seq,
        "t": quantize(snap.t),
        "pose": _qlist(snap.pose),
        "orient": _qlist(snap.orient),
        "s": snap.s,
        "rho": quantize(snap.rho),
        "phi": quantize(snap.phi),
        "mode": snap.mode,
        "direction": snap.direction,
        "gripper": snap.gripper,
        "disk_class": snap.disk_class,
        "a_x": None if snap.a_x is None else _qlist(snap.a_x),
        "a_y": None if snap.a_y is None else _qlist(snap.a_y),
        "d_x": snap.d_x,
        "d_y": snap.d_y,
        "objects": [
            {"id": o.object_id, "p": _qlist(o.position), "state": o.state}
            for o in snap.objects
        ],
        "canal": snap.canal_digest,
    }
    return json.dumps(payload, separators=(",", ":"))


def decode_snapshot(line: str) -> StateSnapshot:
    data = json.loads(line)
    if data.get("kind") != "snapshot" or data.get("v") != 1:
        raise ProtocolError("not a v1 snapshot message")
    return StateSnapshot(
        seq=int(data["seq"]),
        t=float(data["t"]),
        pose=tuple(data["pose"]),
        orient=tuple(data["orient"]),
        s=int(data["s"]),
        rho=float(data["rho"]),
        phi=float(data["phi"]),
        mode=data["mode"],
        direction=int(data["direction"]),
        gripper=data["gripper"],
        disk_class=data["disk_class"],
        a_x=None if data["a_x"] is None else tuple(data["a_x"]),
        a_y=None if data["a_y"] is None else tuple(data["a_y"]),
        d_x=None if data["d_x"] is None else int(data["d_x"]),
        d_y=None if data["d_y"] is None else int(data["d_y"]),
        objects=tuple(
            ObjectSummary(o["id"], tuple(o["p"]), o["state"])
            for o in data["objects"]
        ),
        canal_digest=data["canal"],
    )


@dataclass(frozen=True)
class WireInput:
    kind: str                     # "stick" | "button" | "hello"
    stick: tuple | None = None
    button: str | None = None
    role: str | None = None      # hello only
    client_t: float | None = None


def decode_input(raw) -> tuple[WireInput, list[str]]:
    """Validate an inbound client message.

    Returns the event plus any warnings (currently only stick clamping).
    Raises ProtocolError for anything malformed.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    if len(raw.encode("utf-8")) > MAX_INPUT_BYTES:
        raise ProtocolError("message exceeds 4 KiB")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ProtocolError("message must be a JSON object")

    kind = data.get("kind")
    client_t = data.get("client_t")
    if client_t is not None and not isinstance(client_t, (int, float)):
        raise ProtocolError("client_t must be a number")

    if kind == "stick":
        warnings = []
        values = []
        for axis in ("u", "v"):
            value = data.get(axis, 0.0)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ProtocolError(f"stick {axis} must be a finite number")
            if value < -1.0 or value > 1.0:
                warnings.append(f"{axis} clamped")
                value = max(-1.0, min(1.0, value))
            values.append(float(value))
        return WireInput("stick", stick=(values[0], values[1]),
                         client_t=client_t), warnings

    if kind == "button":
        name = data.get("button")
        if name not in BUTTON_NAMES:
            raise ProtocolError(f"unknown button {name!r}")
        return WireInput("button", button=name, client_t=client_t), []

    if kind == "hello":
        role = data.get("role", "observer")
        if role not in ("pilot", "observer"):
            raise ProtocolError(f"unknown role {role!r}")
        return WireInput("hello", role=role, client_t=client_t), []

    raise ProtocolError(f"unknown message kind {kind!r}")


def encode_ack(warnings: list[str], client_t: float | None = None) -> str:
    payload = {"v": 1, "kind": "ack", "ok": True, "warnings": warnings}
    if client_t is not None:
        payload["client_t"] = client_t
    return json.dumps(payload, separators=(",", ":"))


def encode_error(reason: str) -> str:
    return json.dumps({"v": 1, "kind": "error", "ok": False, "error": reason},
                      separators=(",", ":"))


def encode_welcome(role: str, pilot: bool, canal_digest: str, hz: float) -> str:
    return json.dumps({"v": 1, "kind": "welcome", "role": role, "pilot": pilot,
                       "canal": canal_digest, "hz": quantize(hz)},
                      separators=(",", ":"))
