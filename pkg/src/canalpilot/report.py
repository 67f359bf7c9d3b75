"""Figure rendering for built canals and recorded runs.

Everything draws to files (Agg backend); the CLI report command writes the
figures next to a delimited summary so a run can be inspected without any
interactive tooling.
"""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .canal import Canal
from .protocol import StateSnapshot, quantize

MAX_DISKS_DRAWN = 60


def _disk_circle(canal: Canal, s: int, segments: int = 40) -> np.ndarray:
    angles = np.linspace(0.0, 2 * np.pi, segments)
    return (canal.d[s]
            + canal.r[s] * np.outer(np.cos(angles), canal.x_axis[s])
            + canal.r[s] * np.outer(np.sin(angles), canal.y_axis[s]))


def render_canal_3d(canal: Canal, path, trace=None, title="canal"):
    """Directrix, sampled translucent disks, and optionally the flown path."""
    fig = plt.figure(figsize=(8, 6))
    ax = fig.add_subplot(projection="3d")
    ax.plot(canal.d[:, 0], canal.d[:, 1], canal.d[:, 2],
            color="crimson", lw=1.5, label="directrix")

    stride = max(1, int(np.ceil(canal.n_states / MAX_DISKS_DRAWN)))
    for s in range(0, canal.n_states, stride):
        ring = _disk_circle(canal, s)
        ax.plot(ring[:, 0], ring[:, 1], ring[:, 2],
                color="steelblue", alpha=0.3, lw=0.8)

    if trace is not None and len(trace):
        poses = np.array([snap.pose for snap in trace])
        ax.plot(poses[:, 0], poses[:, 1], poses[:, 2],
                color="seagreen", lw=1.2, label="flown path")
        objects = trace[-1].objects
        if objects:
            pts = np.array([o.position for o in objects])
            ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2],
                       color="darkorange", s=30, label="objects")

    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("z [m]")
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_radius_profile(canal: Canal, path):
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(np.arange(canal.n_states), canal.r, color="steelblue")
    ax.set_xlabel("state s")
    ax.set_ylabel("r(s) [m]")
    ax.set_title("disk radius along the canal")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_mode_timeline(trace, path):
    """Strip chart of controller mode per tick."""
    order = ["idle", "advancing", "correcting", "finished", "stopped", "fault"]
    colors = {"idle": "lightgray", "advancing": "steelblue",
              "correcting": "darkorange", "finished": "seagreen",
              "stopped": "dimgray", "fault": "crimson"}
    fig, ax = plt.subplots(figsize=(8, 2.2))
    times = [snap.t for snap in trace]
    values = [order.index(snap.mode) for snap in trace]
    ax.scatter(times, values, c=[colors[snap.mode] for snap in trace], s=4)
    ax.set_yticks(range(len(order)), order)
    ax.set_xlabel("t [s]")
    ax.set_title("controller mode")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_pen_trace(pen, path):
    """Pen marks on the wall plane, projected to their two largest axes."""
    fig, ax = plt.subplots(figsize=(5, 5))
    if pen:
        pts = np.array([[x, y, z] for _, x, y, z in pen])
        spans = pts.max(axis=0) - pts.min(axis=0)
        keep = np.argsort(spans)[-2:]
        keep.sort()
        ax.plot(pts[:, keep[0]], pts[:, keep[1]], ".-", ms=2, lw=0.5,
                color="purple")
        ax.set_xlabel("xyz"[keep[0]] + " [m]")
        ax.set_ylabel("xyz"[keep[1]] + " [m]")
    ax.set_title("pen trace on wall")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(canal: Canal, out_dir, trace=None, pen=None) -> list[str]:
    """Render all applicable figures plus a delimited summary.

    Returns the list of files written (relative names).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    render_canal_3d(canal, out_dir / "canal_3d.png", trace=trace)
    written.append("canal_3d.png")
    render_radius_profile(canal, out_dir / "radius_profile.png")
    written.append("radius_profile.png")
    if trace:
        render_mode_timeline(trace, out_dir / "mode_timeline.png")
        written.append("mode_timeline.png")
    if pen:
        render_pen_trace(pen, out_dir / "pen_trace.png")
        written.append("pen_trace.png")

    arc = float(np.linalg.norm(np.diff(canal.d, axis=0), axis=1).sum())
    rows = [
        ("n_states", canal.n_states),
        ("arc_length_m", quantize(arc)),
        ("r_min_m", quantize(float(canal.r.min()))),
        ("r_max_m", quantize(float(canal.r.max()))),
        ("r_mean_m", quantize(float(canal.r.mean()))),
    ]
    if trace:
        correcting = sum(1 for snap in trace if snap.mode == "correcting")
        rows += [
            ("ticks", len(trace)),
            ("final_mode", trace[-1].mode),
            ("correcting_ticks", correcting),
            ("pen_marks", 0 if pen is None else len(pen)),
        ]
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("field", "value"))
        writer.writerows(rows)
    written.append("report.csv")
    return written
