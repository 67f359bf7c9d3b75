"""Kinematic tabletop world and scripted scenario runner.

The world is deliberately simple: point objects that can be grasped when
the gripper closes nearby, carried rigidly, and count as placed once they
come to rest within tolerance of their target.  A scenario couples a
canal, a user viewpoint, a set of objects and a timed input script; runs
are fixed-step and bit-reproducible.
"""

from dataclasses import dataclass, field

import numpy as np

from . import controller as ctl
from .canal import Canal
from .config import Config
from .input_mapping import ClassificationError, UserFrame, map_input
from .protocol import ObjectSummary, StateSnapshot

SIM_DT = 1.0 / 60.0
PLACE_TOLERANCE = 0.02
RIM_RADIUS = 0.06
GRASP_RADIUS_DEFAULT = 0.03


@dataclass
class WorldObject:
    object_id: str
    position: np.ndarray
    grasp_radius: float = GRASP_RADIUS_DEFAULT
    target: np.ndarray | None = None
    state: str = "free"    # free | grasped | placed

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=float)


@dataclass(frozen=True)
class ScriptEvent:
    t: float
    stick: tuple | None = None          # persistent stick update
    buttons: frozenset = frozenset()    # edge-triggered


@dataclass
class WallPlane:
    """Painting surface: contacts within tolerance leave pen marks."""

    point: np.ndarray
    normal: np.ndarray
    tolerance: float = 0.01

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float)
        self.normal = np.asarray(self.normal, dtype=float)
        self.normal = self.normal / np.linalg.norm(self.normal)


@dataclass
class Scenario:
    canal_ref: str
    user: UserFrame
    objects: list = field(default_factory=list)
    script: list = field(default_factory=list)
    timeout_s: float = 120.0
    wall: WallPlane | None = None

    def __post_init__(self):
        times = [e.t for e in self.script]
        if any(b > a + 1e-12 for a, b in zip(times[1:], times)):
            raise ValueError("script times must be non-decreasing")


@dataclass(frozen=True)
class RunMetrics:
    completion_time_s: float
    correction_time_s: float
    correction_ratio: float
    objects_placed: int
    score: int


@dataclass
class RunResult:
    trace: list            # StateSnapshot per tick
    metrics: RunMetrics
    pen_trace: list        # (t, x, y, z) wall contacts
    objects: list          # final object states


def score_laundry(zones) -> int:
    """Two points inside, one on the rim, zero outside."""
    points = {"inside": 2, "rim": 1, "outside": 0}
    return sum(points[z] for z in zones)


def object_zone(obj: WorldObject) -> str:
    if obj.target is None:
        return "outside"
    if obj.state == "placed":
        return "inside"
    if float(np.linalg.norm(obj.position - obj.target)) <= RIM_RADIUS:
        return "rim"
    return "outside"


def _snapshot(seq, t, state, pose, orient, canal, user, cfg, objects, digest):
    try:
        mapped = map_input(canal, state.s, user, cfg.classification)
        disk_class = mapped.disk_class.value
        a_x, a_y = tuple(mapped.a_x), tuple(mapped.a_y)
        d_x, d_y = mapped.d_x, mapped.d_y
    except ClassificationError:
        disk_class, a_x, a_y, d_x, d_y = None, None, None, None, None
    return StateSnapshot(
        seq=seq, t=t, pose=tuple(pose), orient=tuple(orient),
        s=state.s, rho=state.rho, phi=state.phi,
        mode=state.mode.value, direction=state.direction,
        gripper=state.gripper,
        disk_class=disk_class, a_x=a_x, a_y=a_y, d_x=d_x, d_y=d_y,
        objects=tuple(ObjectSummary(o.object_id, tuple(o.position), o.state)
                      for o in objects),
        canal_digest=digest,
    )


class World:
    """Object/gripper bookkeeping shared by batch and live runs."""

    def __init__(self, objects):
        self.objects = objects
        self.grasped: WorldObject | None = None

    def update(self, pose: np.ndarray, gripper: str, prev_gripper: str) -> None:
        if gripper == "closed" and prev_gripper == "open":
            free = [o for o in self.objects if o.state == "free"
                    and float(np.linalg.norm(o.position - pose)) <= o.grasp_radius]
            if free:
                free.sort(key=lambda o: (float(np.linalg.norm(o.position - pose)),
                                         o.object_id))
                self.grasped = free[0]
                self.grasped.state = "grasped"
        elif gripper == "open" and prev_gripper == "closed" and self.grasped:
            self.grasped.state = "free"
            self.grasped = None

        if self.grasped is not None:
            self.grasped.position = pose.copy()

        for obj in self.objects:
            if (obj.state == "free" and obj.target is not None
                    and float(np.linalg.norm(obj.position - obj.target))
                    <= PLACE_TOLERANCE):
                obj.state = "placed"


def run_scenario(scenario: Scenario, canal: Canal, cfg: Config,
                 dt: float = SIM_DT, canal_digest: str = "") -> RunResult:
    """Run a scripted scenario to Finished/Stopped/timeout.

    Fixed-step deterministic loop: identical inputs give bit-identical
    traces and metrics.
    """
    state = ctl.initial_state()
    world = World([replace_object(o) for o in scenario.objects])
    pending = sorted(scenario.script, key=lambda e: e.t)
    held_stick = (0.0, 0.0)
    next_event = 0

    trace = []
    pen = []
    correcting_ticks = 0
    tick = 0
    t = 0.0

    while True:
        t = tick * dt
        if t >= scenario.timeout_s:
            break

        buttons = set()
        while next_event < len(pending) and pending[next_event].t <= t + 1e-12:
            ev = pending[next_event]
            if ev.stick is not None:
                held_stick = tuple(ev.stick)
            buttons |= set(ev.buttons)
            next_event += 1

        prev_gripper = state.gripper
        event = ctl.InputFrameEvent(stick=held_stick, buttons=frozenset(buttons))
        state, pose, orient = ctl.step(state, canal, scenario.user, event, dt, cfg)
        world.update(pose, state.gripper, prev_gripper)

        if state.mode is ctl.Mode.CORRECTING:
            correcting_ticks += 1
        if scenario.wall is not None:
            gap = abs(float(np.dot(pose - scenario.wall.point, scenario.wall.normal)))
            if gap <= scenario.wall.tolerance:
                pen.append((t, float(pose[0]), float(pose[1]), float(pose[2])))

        tick += 1
        trace.append(_snapshot(tick, tick * dt, state, pose, orient, canal,
                               scenario.user, cfg, world.objects, canal_digest))

        if state.mode in (ctl.Mode.FINISHED, ctl.Mode.STOPPED, ctl.Mode.FAULT):
            break

    completion = tick * dt
    correction = correcting_ticks * dt
    placed = sum(1 for o in world.objects if o.state == "placed")
    zones = [object_zone(o) for o in world.objects]
    metrics = RunMetrics(
        completion_time_s=completion,
        correction_time_s=correction,
        correction_ratio=0.0 if completion == 0 else correction / completion,
        objects_placed=placed,
        score=score_laundry(zones),
    )
    return RunResult(trace=trace, metrics=metrics, pen_trace=pen,
                     objects=world.objects)


def replace_object(obj: WorldObject) -> WorldObject:
    """Fresh copy so scenario definitions stay reusable."""
    return WorldObject(obj.object_id, obj.position.copy(), obj.grasp_radius,
                       None if obj.target is None else obj.target.copy(),
                       obj.state)
