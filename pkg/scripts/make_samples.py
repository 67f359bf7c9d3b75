#!/usr/bin/env python3
"""Regenerate the committed sample files under samples/.

Everything here is deterministic: straight-line demos, the canal built
from them, two scripted scenarios (pick-and-place, laundry-style), and
format samples for metrics/trace.  The laundry script is produced by
running the simulation once with an observing planner that fires gripper
and direction buttons from the live pose, then replaying the recorded
script to confirm the run scores 10/10.
"""

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from canalpilot import controller as ctl
from canalpilot.cli import build_pipeline
from canalpilot.config import Config, save_config
from canalpilot.demo_pipeline import Demonstration
from canalpilot.io_formats import (
    canal_digest,
    load_canal,
    load_scenario,
    save_canal,
    save_demo,
    save_metrics,
    save_scenario_dict,
    save_trace,
)
from canalpilot.simulation import SIM_DT, World, run_scenario, replace_object

SAMPLES = ROOT / "samples"
FIXTURES = ROOT / "frontend" / "test" / "fixtures"

DOWN_QUAT = [0.0, 1.0, 0.0, 0.0]  # gripper pointing straight down


def make_demos():
    t_a = np.linspace(0.0, 6.0, 120)
    a = Demonstration(
        times=t_a,
        positions=np.column_stack([
            np.linspace(0.0, 1.0, 120), np.full(120, 0.05), np.full(120, 0.2)]),
        orientations=np.tile(DOWN_QUAT, (120, 1)),
        label="table-slide-left",
    )
    t_b = np.linspace(0.0, 5.4, 90)
    b = Demonstration(
        times=t_b,
        positions=np.column_stack([
            np.linspace(0.0, 1.0, 90), np.full(90, -0.05), np.full(90, 0.2)]),
        orientations=np.tile(DOWN_QUAT, (90, 1)),
        label="table-slide-right",
    )
    save_demo(a, SAMPLES / "demo_a.json")
    save_demo(b, SAMPLES / "demo_b.json")
    return a, b


def make_canal(demo_a, demo_b, cfg):
    canal, summary, warnings = build_pipeline(demo_a, demo_b, cfg)
    assert not warnings, f"sample canal has intersection warnings: {warnings}"
    save_canal(canal, cfg, SAMPLES / "canal_line.json")
    print("\n".join(summary))
    return canal


def make_pick_place():
    payload = {
        "canal": "canal_line.json",
        "user": {"position": [-1.0, 0.0, 0.2], "facing": [1.0, 0.0, 0.0]},
        "objects": [{
            "id": "can", "position": [0.2, 0.0, 0.2],
            "grasp_radius": 0.03, "target": [0.8, 0.0, 0.2],
        }],
        "script": [
            {"t": 0.1, "buttons": ["start"]},
            {"t": 2.0, "buttons": ["toggle_gripper"]},
            {"t": 8.0, "buttons": ["toggle_gripper"]},
        ],
        "timeout_s": 30.0,
    }
    save_scenario_dict(payload, SAMPLES / "scenario_pick_place.json")


def plan_laundry_script(canal, cfg, user, objects, basket_x=0.1, drum_x=0.9,
                        tol=0.012):
    """Run the controller live, firing buttons from the observed pose, and
    record the timed script that reproduces the run.

    Recorded times sit half a tick before the tick they fired on, so the
    scenario runner (which delivers events with t_event <= t_tick) replays
    them on exactly the same ticks.
    """
    start_t = 0.1
    state = ctl.initial_state()
    world = World([replace_object(o) for o in objects])
    events = [{"t": start_t, "buttons": ["start"]}]
    phase = "fetch"
    remaining = len(objects)
    pose = None
    for tick in range(int(200.0 / SIM_DT)):
        t = tick * SIM_DT
        buttons = set()
        # same delivery predicate as the scenario runner
        if state.mode is ctl.Mode.IDLE and start_t <= t + 1e-12:
            buttons.add("start")
        if pose is not None and state.mode is ctl.Mode.ADVANCING:
            pose_x = float(pose[0])
            act = set()
            if phase == "fetch" and abs(pose_x - basket_x) <= tol:
                act.add("toggle_gripper")
                if state.direction < 0:
                    act.add("toggle_direction")
                phase = "deliver"
            elif phase == "deliver" and abs(pose_x - drum_x) <= tol:
                act.add("toggle_gripper")
                remaining -= 1
                if remaining > 0:
                    act.add("toggle_direction")
                    phase = "fetch"
                else:
                    phase = "finish"
            if act:
                events.append({"t": t - SIM_DT / 2, "buttons": sorted(act)})
                buttons |= act
        prev_gripper = state.gripper
        state, pose, _ = ctl.step(state, canal, user,
                                  ctl.InputFrameEvent(buttons=frozenset(buttons)),
                                  SIM_DT, cfg)
        world.update(pose, state.gripper, prev_gripper)
        if state.mode is ctl.Mode.FINISHED:
            break
    placed = sum(1 for o in world.objects if o.state == "placed")
    assert placed == len(objects), f"planner only placed {placed}"
    assert state.mode is ctl.Mode.FINISHED, "planner run did not finish"
    return events


def make_laundry(canal, cfg):
    from canalpilot.input_mapping import UserFrame
    from canalpilot.simulation import WorldObject

    user = UserFrame.from_facing([-1.0, 0.0, 0.2], [1.0, 0.0, 0.0])
    objects = [
        WorldObject(f"cloth{i}", [0.1, 0.0, 0.2], grasp_radius=0.03,
                    target=[0.9, 0.0, 0.2])
        for i in range(1, 6)
    ]
    script = plan_laundry_script(canal, cfg, user, objects)
    payload = {
        "canal": "canal_line.json",
        "user": {"position": [-1.0, 0.0, 0.2], "facing": [1.0, 0.0, 0.0]},
        "objects": [{
            "id": o.object_id, "position": list(o.position),
            "grasp_radius": o.grasp_radius, "target": list(o.target),
        } for o in objects],
        "script": script,
        "timeout_s": 120.0,
    }
    save_scenario_dict(payload, SAMPLES / "scenario_laundry.json")


def make_paint():
    """Pen drawing on the table plane: the stroke breaks where the pilot
    lifts the end-effector with a correction."""
    payload = {
        "canal": "canal_line.json",
        "user": {"position": [-1.0, 0.0, 0.2], "facing": [1.0, 0.0, 0.0]},
        "objects": [],
        "script": [
            {"t": 0.1, "buttons": ["start"]},
            {"t": 3.0, "stick": [0.0, 0.9]},   # lift: pen leaves the plane
            {"t": 4.5, "stick": [0.0, 0.0]},
            {"t": 6.0, "stick": [0.0, -0.9]},  # press back down
            {"t": 7.0, "stick": [0.0, 0.0]},
        ],
        "timeout_s": 30.0,
        "wall": {"point": [0.0, 0.0, 0.2], "normal": [0.0, 0.0, 1.0],
                 "tolerance": 0.005},
    }
    save_scenario_dict(payload, SAMPLES / "scenario_paint.json")


def verify_and_export(cfg):
    canal, canal_cfg = load_canal(SAMPLES / "canal_line.json")
    digest = canal_digest(canal, canal_cfg)

    pick = load_scenario(SAMPLES / "scenario_pick_place.json")
    result = run_scenario(pick, canal, cfg, canal_digest=digest)
    assert result.metrics.objects_placed == 1, result.metrics
    assert result.metrics.completion_time_s < 30.0, result.metrics
    save_metrics(result.metrics, SAMPLES / "metrics_pick_place.csv")
    save_trace(result.trace[:120], SAMPLES / "trace_sample.jsonl")
    print(f"pick-and-place: {result.metrics}")

    laundry = load_scenario(SAMPLES / "scenario_laundry.json")
    result = run_scenario(laundry, canal, cfg, canal_digest=digest)
    assert result.metrics.score == 10, result.metrics
    print(f"laundry: {result.metrics}")

    paint = load_scenario(SAMPLES / "scenario_paint.json")
    paint_result = run_scenario(paint, canal, cfg, canal_digest=digest)
    assert paint_result.pen_trace, "paint run left no pen marks"
    assert len(paint_result.pen_trace) < len(paint_result.trace), \
        "pen never lifted"
    print(f"paint: {len(paint_result.pen_trace)} pen marks over "
          f"{len(paint_result.trace)} ticks")

    FIXTURES.mkdir(parents=True, exist_ok=True)
    snippets = result.trace[:40]
    save_trace(snippets, FIXTURES / "snapshots.jsonl")
    (FIXTURES / "messages.jsonl").write_text("\n".join([
        '{"v":1,"kind":"welcome","role":"pilot","pilot":true,'
        f'"canal":"{digest}","hz":30}}',
        '{"v":1,"kind":"ack","ok":true,"warnings":[]}',
        '{"v":1,"kind":"ack","ok":true,"warnings":["u clamped"]}',
        '{"v":1,"kind":"error","ok":false,"error":"not the pilot"}',
    ]) + "\n")


def main():
    SAMPLES.mkdir(exist_ok=True)
    cfg = Config()
    save_config(cfg, SAMPLES / "config.cfg")
    demo_a, demo_b = make_demos()
    canal = make_canal(demo_a, demo_b, cfg)
    make_pick_place()
    make_laundry(canal, cfg)
    make_paint()
    verify_and_export(cfg)
    print("samples written to", SAMPLES)


if __name__ == "__main__":
    main()
