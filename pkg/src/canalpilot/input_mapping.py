"""Dynamic mapping of 2D stick input onto the current disk's correction axes.

Every disk is classified from the camera-free facts the system has: the
tangent's inclination and where the disk sits relative to the user.  The
stick axes are then assigned to the in-disk correction axes with signs so
that "right" and "forward" on the stick do what the user expects:

* near-horizontal disks: right/forward follow the ground projections of
  the disk axes;
* near-vertical disks facing the user: forward maps to up, right follows
  the horizontal axis;
* near-vertical disks seen sideways: forward maps to up, right maps along
  the canal, with the sign flipping between the user's left and right.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .canal import Canal
from .geometry import Z_UP, angle_between, normalize, project_ground

DEADZONE_DEFAULT = 0.15

CLASSIFICATION_PROSE = "prose"
CLASSIFICATION_LITERAL = "literal"


class ClassificationError(ValueError):
    """The disk geometry does not admit a stick mapping this tick."""


class DiskClass(Enum):
    NEAR_HORIZONTAL = "horizontal"
    FACING_USER = "facing"
    SIDEWAYS_LEFT = "sideways-left"
    SIDEWAYS_RIGHT = "sideways-right"


@dataclass(frozen=True)
class UserFrame:
    """The viewer's ground-plane frame: j_x points to their right, j_y the
    way they face, origin at their viewpoint."""

    j_x: np.ndarray
    j_y: np.ndarray
    origin: np.ndarray

    @staticmethod
    def from_facing(origin, facing) -> "UserFrame":
        """Frame for a viewer at `origin` looking along `facing` (projected
        onto the ground plane)."""
        j_y = normalize(project_ground(np.asarray(facing, dtype=float)))
        j_x = np.cross(j_y, Z_UP)
        return UserFrame(j_x=j_x, j_y=j_y, origin=np.asarray(origin, dtype=float))


@dataclass(frozen=True)
class MappedCorrection:
    a_x: np.ndarray      # in-disk axis the stick's x controls
    a_y: np.ndarray      # in-disk axis the stick's y controls
    d_x: int             # +1 | -1
    d_y: int
    disk_class: DiskClass


def _sign(value: float) -> int:
    # Exact zero resolves to +1.
    return -1 if value < 0.0 else 1


def classify_disk(e_t_s: np.ndarray, x_s: np.ndarray, y_s: np.ndarray,
                  user: UserFrame, d_s: np.ndarray,
                  mode: str = CLASSIFICATION_PROSE) -> DiskClass:
    """Assign the disk at state s to one of the three interaction classes.

    In the default "prose" mode a near-vertical tangent means the disk lies
    near the ground plane.  The "literal" mode keeps the printed branch
    condition of the mapping algorithm, which labels that same band the
    other way around; both are exposed because the two readings disagree.
    """
    theta = angle_between(e_t_s, Z_UP)
    in_band = math.pi / 3.0 < theta < 2.0 * math.pi / 3.0
    horizontal = (not in_band) if mode == CLASSIFICATION_PROSE else in_band

    if horizontal:
        return DiskClass.NEAR_HORIZONTAL

    # Near-vertical disk: the candidate stick-x axis is the more
    # horizontal of the two, judged by |axis . z|.
    a_x_cand = x_s if abs(np.dot(y_s, Z_UP)) > abs(np.dot(x_s, Z_UP)) else y_s
    p_x = project_ground(a_x_cand)
    if np.linalg.norm(p_x) < 1e-9:
        raise ClassificationError("candidate x axis is vertical; no ground direction")

    theta_ax = angle_between(p_x, user.j_y)
    if math.pi / 6.0 < theta_ax < 5.0 * math.pi / 6.0:
        return DiskClass.FACING_USER

    rel = d_s - user.origin
    # First coordinate of R^T (d_s - o_U) with R = [j_x j_y j_x x j_y].
    p_rel_x = float(np.dot(user.j_x, rel))
    return DiskClass.SIDEWAYS_LEFT if p_rel_x < 0.0 else DiskClass.SIDEWAYS_RIGHT


def map_disk(e_t_s, x_s, y_s, d_s, user: UserFrame,
             mode: str = CLASSIFICATION_PROSE) -> MappedCorrection:
    """Aligned axes and signs for a single disk (the core of the mapper)."""
    disk_class = classify_disk(e_t_s, x_s, y_s, user, d_s, mode)

    if disk_class is DiskClass.NEAR_HORIZONTAL:
        p_x = project_ground(x_s)
        p_y = project_ground(y_s)
        # ">=" resolves an exact tie to x_s.
        if abs(np.dot(user.j_x, p_x)) >= abs(np.dot(user.j_x, p_y)):
            a_x, d_x = x_s, _sign(float(np.dot(user.j_x, p_x)))
        else:
            a_x, d_x = y_s, _sign(float(np.dot(user.j_x, p_y)))
        if abs(np.dot(user.j_y, p_x)) >= abs(np.dot(user.j_y, p_y)):
            a_y, d_y = x_s, _sign(float(np.dot(user.j_y, p_x)))
        else:
            a_y, d_y = y_s, _sign(float(np.dot(user.j_y, p_y)))
        return MappedCorrection(a_x, a_y, d_x, d_y, disk_class)

    # Near-vertical: stick forward drives the more vertical axis upward.
    if abs(np.dot(y_s, Z_UP)) > abs(np.dot(x_s, Z_UP)):
        a_y, a_x = y_s, x_s
        d_y = _sign(float(np.dot(y_s, Z_UP)))
    else:
        a_y, a_x = x_s, y_s
        d_y = _sign(float(np.dot(x_s, Z_UP)))

    p_x = project_ground(a_x)
    if disk_class is DiskClass.FACING_USER:
        d_x = _sign(float(np.dot(user.j_x, p_x)))
    elif disk_class is DiskClass.SIDEWAYS_LEFT:
        d_x = _sign(float(np.dot(user.j_y, p_x)))
    else:
        d_x = -_sign(float(np.dot(user.j_y, p_x)))
    return MappedCorrection(a_x, a_y, d_x, d_y, disk_class)


def map_input(canal: Canal, s: int, user: UserFrame,
              mode: str = CLASSIFICATION_PROSE) -> MappedCorrection:
    """Mapping for the canal's disk at state s."""
    if not 0 <= s < canal.n_states:
        raise IndexError(f"state {s} out of range")
    return map_disk(canal.e_t[s], canal.x_axis[s], canal.y_axis[s],
                    canal.d[s], user, mode)


def stick_active(stick, deadzone: float = DEADZONE_DEFAULT) -> bool:
    """True when the stick deflection magnitude exceeds the deadzone."""
    u, v = stick
    return math.hypot(u, v) > deadzone


def correction_velocity(m: MappedCorrection, stick, gain: float,
                        deadzone: float = DEADZONE_DEFAULT) -> np.ndarray:
    """World-space correction velocity for a stick deflection.

    Zero inside the deadzone; otherwise gain * (u Dx Ax + v Dy Ay).
    """
    u, v = stick
    if not -1.0 <= u <= 1.0 or not -1.0 <= v <= 1.0:
        raise ValueError("stick components must be within [-1, 1]")
    if not stick_active(stick, deadzone):
        return np.zeros(3)
    return gain * (u * m.d_x * m.a_x + v * m.d_y * m.a_y)
