"""Shared-autonomy controller: autonomous canal playback plus stick corrections.

The robot rides the canal holding its normalized in-disk coordinates
(rho, phi) fixed, so the path scales with the tube.  Any stick input
outside the deadzone pauses progression and moves the point inside the
current disk (optionally a bounded step beyond its rim); releasing the
stick resumes playback from the corrected point.  Sanctioned excess beyond
the rim retires linearly over the next `shrink_window` disks.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .canal import Canal
from .config import Config
from .input_mapping import (
    ClassificationError,
    UserFrame,
    correction_velocity,
    map_input,
    stick_active,
)

FAULT_THRESHOLD = 5  # consecutive classification failures before Fault


class Mode(Enum):
    IDLE = "idle"
    ADVANCING = "advancing"
    CORRECTING = "correcting"
    FINISHED = "finished"
    STOPPED = "stopped"
    FAULT = "fault"


@dataclass(frozen=True)
class InputFrameEvent:
    stick: tuple = (0.0, 0.0)
    buttons: frozenset = frozenset()

    def __post_init__(self):
        u, v = self.stick
        if not (-1.0 <= u <= 1.0 and -1.0 <= v <= 1.0):
            raise ValueError("stick components must be within [-1, 1]")
        unknown = self.buttons - {"start", "stop", "toggle_direction", "toggle_gripper"}
        if unknown:
            raise ValueError(f"unknown buttons: {sorted(unknown)}")


@dataclass(frozen=True)
class ControllerState:
    s: int = 0
    rho: float = 0.0
    phi: float = 0.0
    mode: Mode = Mode.IDLE
    direction: int = 1
    gripper: str = "open"
    overshoot: float = 0.0          # current sanctioned excess beyond r(s), m
    shrink_left: int = 0            # disks remaining in the shrink window
    overshoot_base: float = 0.0     # excess at the end of the last correction
    frac: float = 0.0               # fractional state accumulator
    fault_streak: int = 0


def initial_state() -> ControllerState:
    return ControllerState()


def permitted_overshoot(state: ControllerState, cfg: Config) -> float:
    """Excess beyond r(s) the controller currently sanctions."""
    if state.mode is Mode.CORRECTING:
        return state.overshoot
    if state.shrink_left <= 0:
        return 0.0
    return state.overshoot_base * state.shrink_left / cfg.shrink_window


def next_nominal_point(canal: Canal, s: int, rho: float, phi: float,
                       overshoot: float = 0.0) -> np.ndarray:
    """Point at in-disk coordinates (rho, phi) on disk s.

    rho is capped at 1 + overshoot/r(s), so without sanctioned excess the
    point can never leave the disk.
    """
    r = canal.r[s]
    rho_eff = min(rho, 1.0 + overshoot / r)
    offset = r * rho_eff * (math.cos(phi) * canal.x_axis[s]
                            + math.sin(phi) * canal.y_axis[s])
    return canal.d[s] + offset


def _clamp_to_disk(state: ControllerState, canal: Canal, cfg: Config) -> ControllerState:
    """Clamp rho so the point respects the currently permitted excess."""
    r = canal.r[state.s]
    limit = (r + permitted_overshoot(state, cfg)) / r
    if state.rho > limit:
        state = replace(state, rho=limit)
    return replace(state, overshoot=max(0.0, (state.rho - 1.0) * r))


def apply_correction(state: ControllerState, canal: Canal, user: UserFrame,
                     stick, dt: float, cfg: Config) -> ControllerState:
    """One correction tick: move the point inside the current disk plane.

    The state index is frozen; the offset is clamped to the extension
    envelope r(s) * beta_max, additionally capped at r(s) + overshoot_cap_m.
    """
    s = state.s
    try:
        mapped = map_input(canal, s, user, cfg.classification)
    except ClassificationError:
        streak = state.fault_streak + 1
        mode = Mode.FAULT if streak >= FAULT_THRESHOLD else state.mode
        return replace(state, fault_streak=streak, mode=mode)

    velocity = correction_velocity(mapped, stick, cfg.gain, cfg.deadzone)
    point = next_nominal_point(canal, s, state.rho, state.phi,
                               permitted_overshoot(state, cfg))
    point = point + velocity * dt

    # Project into the disk plane and clamp the radial excursion.
    offset = point - canal.d[s]
    offset = offset - np.dot(offset, canal.e_t[s]) * canal.e_t[s]
    r = canal.r[s]
    max_norm = min(r * cfg.beta_max, r + cfg.overshoot_cap_m)
    norm = float(np.linalg.norm(offset))
    if norm > max_norm:
        offset = offset * (max_norm / norm)
        norm = max_norm

    rho = norm / r
    phi = state.phi if norm < 1e-12 else math.atan2(
        float(np.dot(offset, canal.y_axis[s])),
        float(np.dot(offset, canal.x_axis[s])))
    return replace(state, rho=rho, phi=phi,
                   overshoot=max(0.0, norm - r),
                   mode=Mode.CORRECTING, fault_streak=0)


def _advance(state: ControllerState, canal: Canal, dt: float, cfg: Config) -> ControllerState:
    """Autonomous progression along the canal by direction * advance_rate."""
    s_count = canal.n_states
    frac = state.frac + cfg.advance_rate * dt
    steps = int(frac)
    frac -= steps

    s = state.s
    shrink_left = state.shrink_left
    terminal = s_count - 1 if state.direction > 0 else 0
    finished = s == terminal
    for _ in range(steps):
        if s == terminal:
            finished = True
            break
        s += state.direction
        if shrink_left > 0:
            shrink_left -= 1
        if s == terminal:
            finished = True
            break
    state = replace(state, s=s, frac=0.0 if finished else frac,
                    shrink_left=shrink_left,
                    mode=Mode.FINISHED if finished else Mode.ADVANCING)
    return _clamp_to_disk(state, canal, cfg)


def step(state: ControllerState, canal: Canal, user: UserFrame,
         event: InputFrameEvent, dt: float, cfg: Config):
    """Advance the controller one tick.

    Returns (state, pose, orientation).  Button edges are applied first;
    stick input outside the deadzone freezes s and corrects in-disk;
    otherwise the controller advances autonomously.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")

    if "stop" in event.buttons:
        state = replace(state, mode=Mode.STOPPED)
    elif "start" in event.buttons and state.mode in (Mode.IDLE, Mode.STOPPED,
                                                     Mode.FINISHED, Mode.FAULT):
        state = replace(state, mode=Mode.ADVANCING, frac=0.0, fault_streak=0)
    if "toggle_direction" in event.buttons:
        state = replace(state, direction=-state.direction)
    if "toggle_gripper" in event.buttons:
        state = replace(state, gripper="closed" if state.gripper == "open" else "open")

    if state.mode in (Mode.ADVANCING, Mode.CORRECTING):
        if stick_active(event.stick, cfg.deadzone):
            was_correcting = state.mode is Mode.CORRECTING
            state = apply_correction(state, canal, user, event.stick, dt, cfg)
            if state.mode is Mode.CORRECTING and not was_correcting:
                # Entering a correction restarts the extension budget.
                state = replace(state, shrink_left=0, overshoot_base=0.0)
        else:
            if state.mode is Mode.CORRECTING and state.overshoot > 0.0:
                # Correction ended outside the rim: open a fresh window.
                state = replace(state, overshoot_base=state.overshoot,
                                shrink_left=cfg.shrink_window)
            state = _advance(state, canal, dt, cfg)

    pose = next_nominal_point(canal, state.s, state.rho, state.phi,
                              permitted_overshoot(state, cfg))
    return state, pose, canal.q[state.s]
