"""On-disk formats: demo recordings, canal files, scenarios, metrics, traces.

Every float written anywhere goes through the same 9-significant-digit
quantization, so files are byte-stable across platforms and save/load/save
is the identity on bytes.  Formats are documented in docs/formats.md and
each has a committed sample under samples/.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .canal import Canal
from .config import Config, config_from_dict, config_to_dict
from .demo_pipeline import Demonstration
from .input_mapping import UserFrame
from .protocol import encode_snapshot, quantize
from .simulation import RunMetrics, Scenario, ScriptEvent, WallPlane, WorldObject


class FormatError(ValueError):
    """File failed to parse or validate; message names the offending file."""


def _q(value):
    """Quantize floats recursively (lists/ndarrays -> lists, dicts -> dicts)."""
    if isinstance(value, dict):
        return {k: _q(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_q(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return quantize(float(value))
    return value


def _dump(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":")) + "\n"


def _load_json(path, expected_format: str) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise FormatError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict) or data.get("format") != expected_format:
        raise FormatError(f"{path}: not a {expected_format} file")
    if data.get("v") != 1:
        raise FormatError(f"{path}: unsupported version {data.get('v')!r}")
    return data


# ---------------------------------------------------------------------------
# demos
# ---------------------------------------------------------------------------

def save_demo(demo: Demonstration, path) -> None:
    payload = {
        "format": "demo", "v": 1, "label": demo.label,
        "samples": [
            {"t": _q(float(t)), "p": _q(p), "q": _q(q)}
            for t, p, q in zip(demo.times, demo.positions, demo.orientations)
        ],
    }
    Path(path).write_text(_dump(payload))


def load_demo(path) -> Demonstration:
    data = _load_json(path, "demo")
    samples = data.get("samples")
    if not isinstance(samples, list) or len(samples) < 2:
        raise FormatError(f"{path}: demo needs at least 2 samples")
    try:
        times = np.array([s["t"] for s in samples], dtype=float)
        positions = np.array([s["p"] for s in samples], dtype=float)
        orientations = np.array([s["q"] for s in samples], dtype=float)
        if positions.shape[1] != 3 or orientations.shape[1] != 4:
            raise FormatError(f"{path}: samples must carry p[3] and q[4]")
        return Demonstration(times, positions, orientations,
                             label=data.get("label", ""))
    except FormatError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# canals
# ---------------------------------------------------------------------------

def canal_to_json(canal: Canal, cfg: Config) -> str:
    payload = {
        "format": "canal", "v": 1,
        "n_states": canal.n_states,
        "d": _q(canal.d),
        "e_t": _q(canal.e_t),
        "r": _q(canal.r),
        "x_axis": _q(canal.x_axis),
        "y_axis": _q(canal.y_axis),
        "q": _q(canal.q),
        "config": _q(config_to_dict(cfg)),
    }
    return _dump(payload)


def save_canal(canal: Canal, cfg: Config, path) -> None:
    Path(path).write_text(canal_to_json(canal, cfg))


def _canal_from_data(data: dict, origin: str) -> tuple[Canal, Config]:
    try:
        canal = Canal(
            d=np.array(data["d"], dtype=float),
            e_t=np.array(data["e_t"], dtype=float),
            r=np.array(data["r"], dtype=float),
            x_axis=np.array(data["x_axis"], dtype=float),
            y_axis=np.array(data["y_axis"], dtype=float),
            q=np.array(data["q"], dtype=float),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{origin}: bad canal arrays ({exc})") from exc
    lengths = {len(canal.d), len(canal.e_t), len(canal.r),
               len(canal.x_axis), len(canal.y_axis), len(canal.q)}
    if lengths != {data.get("n_states")}:
        raise FormatError(f"{origin}: array lengths disagree with n_states")
    cfg = config_from_dict(data.get("config", {}))
    return canal, cfg


def load_canal(path) -> tuple[Canal, Config]:
    data = _load_json(path, "canal")
    return _canal_from_data(data, str(path))


def canal_digest(canal: Canal, cfg: Config) -> str:
    """Stable 16-hex-digit content hash of the serialized canal."""
    return hashlib.sha256(canal_to_json(canal, cfg).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def load_scenario(path) -> Scenario:
    data = _load_json(path, "scenario")
    path = Path(path)
    try:
        user = UserFrame.from_facing(data["user"]["position"],
                                     data["user"]["facing"])
        objects = [
            WorldObject(
                object_id=o["id"],
                position=np.array(o["position"], dtype=float),
                grasp_radius=float(o.get("grasp_radius", 0.03)),
                target=(None if o.get("target") is None
                        else np.array(o["target"], dtype=float)),
            )
            for o in data.get("objects", [])
        ]
        script = [
            ScriptEvent(
                t=float(e["t"]),
                stick=None if e.get("stick") is None else tuple(e["stick"]),
                buttons=frozenset(e.get("buttons", [])),
            )
            for e in data.get("script", [])
        ]
        wall = None
        if data.get("wall") is not None:
            w = data["wall"]
            wall = WallPlane(np.array(w["point"], dtype=float),
                             np.array(w["normal"], dtype=float),
                             float(w.get("tolerance", 0.01)))
        scenario = Scenario(
            canal_ref=data["canal"],
            user=user,
            objects=objects,
            script=script,
            timeout_s=float(data.get("timeout_s", 120.0)),
            wall=wall,
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return scenario


def resolve_canal_ref(scenario_path, canal_ref: str) -> Path:
    ref = Path(canal_ref)
    return ref if ref.is_absolute() else Path(scenario_path).parent / ref


def save_scenario_dict(payload: dict, path) -> None:
    """Write a scenario built as a plain dict (used by the sample generator)."""
    payload = {"format": "scenario", "v": 1, **_q(payload)}
    Path(path).write_text(_dump(payload))


# ---------------------------------------------------------------------------
# metrics and traces
# ---------------------------------------------------------------------------

METRICS_FIELDS = ("completion_time_s", "correction_time_s",
                  "correction_ratio", "objects_placed", "score")


def save_metrics(metrics: RunMetrics, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_FIELDS)
        writer.writerow([
            quantize(metrics.completion_time_s),
            quantize(metrics.correction_time_s),
            quantize(metrics.correction_ratio),
            metrics.objects_placed,
            metrics.score,
        ])


def save_trace(snapshots, path) -> None:
    with open(path, "w") as fh:
        for snap in snapshots:
            fh.write(encode_snapshot(snap) + "\n")


def save_pen_trace(pen, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "x", "y", "z"))
        for t, x, y, z in pen:
            writer.writerow((quantize(t), quantize(x), quantize(y), quantize(z)))
