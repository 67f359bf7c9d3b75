"""Canal construction: directrix, radii, correction axes, end alignment.

A canal is a discrete tube: at each state s it has a center d_s, a unit
tangent e_T(s), a disk radius r(s), an in-disk orthonormal axis pair
(x_s, y_s) and a nominal end-effector orientation q_s.  Corrections happen
inside the disks; autonomous playback rides the tube.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .demo_pipeline import AlignedPair
from .geometry import (
    Z_UP,
    angle_between,
    normalize,
    project_ground,
    project_to_plane,
    quat_from_matrix,
    quat_to_matrix,
    rotate_toward,
    slerp_unit,
)

R_MIN_DEFAULT = 0.01
AXIS_WINDOW_DEFAULT = 5


class CanalConstructionError(ValueError):
    pass


class AxisConstructionError(CanalConstructionError):
    pass


class EndClassificationError(ValueError):
    pass


@dataclass
class Canal:
    d: np.ndarray        # (S, 3) directrix points
    e_t: np.ndarray      # (S, 3) unit tangents
    r: np.ndarray        # (S,)   disk radii
    x_axis: np.ndarray   # (S, 3) in-disk x correction axes
    y_axis: np.ndarray   # (S, 3) in-disk y correction axes
    q: np.ndarray        # (S, 4) nominal orientations (w, x, y, z)

    @property
    def n_states(self) -> int:
        return len(self.d)

    def copy(self) -> "Canal":
        return Canal(self.d.copy(), self.e_t.copy(), self.r.copy(),
                     self.x_axis.copy(), self.y_axis.copy(), self.q.copy())


@dataclass
class EndAlignment:
    """Classification of one canal extremity.

    `forced` is the tangent the terminal disks get pushed onto: +/-z for a
    vertical end, the ground projection of the mean tangent for a
    horizontal one.
    """

    which_end: str               # "head" | "tail"
    target: str                  # "vertical" | "horizontal" | "none"
    theta: float                 # inclination of the mean end tangent
    forced: np.ndarray = field(default=None)


def build_canal(pair: AlignedPair, r_min: float = R_MIN_DEFAULT,
                axis_window: int = AXIS_WINDOW_DEFAULT) -> Canal:
    """Canal from an aligned demo pair.

    Directrix = pointwise midpoint, radius = half the inter-demo distance
    floored at r_min, orientation = halfway slerp.  Correction axes are
    filled in by compute_axes.
    """
    s_count = len(pair)
    if s_count < 2:
        raise CanalConstructionError("need at least 2 states")

    d = 0.5 * (pair.pos_a + pair.pos_b)
    step = np.linalg.norm(np.diff(d, axis=0), axis=1)
    if np.any(step < 1e-12):
        bad = int(np.argmax(step < 1e-12))
        raise CanalConstructionError(
            f"coincident adjacent directrix points at state {bad}")

    r = np.maximum(0.5 * np.linalg.norm(pair.pos_a - pair.pos_b, axis=1), r_min)

    e_t = np.empty_like(d)
    e_t[0] = normalize(d[1] - d[0])
    e_t[-1] = normalize(d[-1] - d[-2])
    for s in range(1, s_count - 1):
        try:
            e_t[s] = normalize(d[s + 1] - d[s - 1])
        except ValueError as exc:
            raise CanalConstructionError(
                f"directrix folds back onto itself at state {s}") from exc

    q = np.array([slerp_unit(pair.quat_a[s], pair.quat_b[s], 0.5)
                  for s in range(s_count)])

    canal = Canal(d=d, e_t=e_t, r=r,
                  x_axis=np.zeros_like(d), y_axis=np.zeros_like(d), q=q)
    return compute_axes(canal, axis_window)


def _boundary_frame_x(tangent: np.ndarray) -> np.ndarray:
    """In-disk x axis for a boundary disk: a fixed global reference
    projected onto the disk plane, falling back to global y when the
    reference is parallel to the tangent."""
    for ref in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        in_plane = project_to_plane(ref, tangent)
        if np.linalg.norm(in_plane) > 1e-6:
            return normalize(in_plane)
    raise AxisConstructionError("no usable boundary reference direction")


def compute_axes(canal: Canal, window: int = AXIS_WINDOW_DEFAULT) -> Canal:
    """Fill x/y correction axes.

    Globally: build frames at both boundary disks, slerp between them, and
    project the interpolated x axis into each disk plane.  Locally: average
    the resulting y axes over a centered window to iron out jitter, then
    re-orthonormalize against the tangents.
    """
    s_count = canal.n_states
    e_t = canal.e_t

    frames = []
    for idx in (0, s_count - 1):
        x = _boundary_frame_x(e_t[idx])
        y = np.cross(e_t[idx], x)
        frames.append(quat_from_matrix(np.column_stack([x, y, e_t[idx]])))
    q0, q1 = frames

    x_axis = np.empty_like(canal.d)
    degenerate = 0
    prev_x = None
    for s in range(s_count):
        t = s / (s_count - 1)
        frame_x = quat_to_matrix(slerp_unit(q0, q1, t))[:, 0]
        in_plane = project_to_plane(frame_x, e_t[s])
        n = float(np.linalg.norm(in_plane))
        if n < 1e-6:
            degenerate += 1
            in_plane = (prev_x if prev_x is not None
                        else _boundary_frame_x(e_t[s]))
            in_plane = project_to_plane(in_plane, e_t[s])
            n = float(np.linalg.norm(in_plane))
            if n < 1e-6:
                raise AxisConstructionError(f"axis projection degenerate at state {s}")
        x_axis[s] = in_plane / n
        prev_x = x_axis[s]

    if degenerate > 0.01 * s_count:
        raise AxisConstructionError(
            f"axis projection degenerate at {degenerate}/{s_count} states")

    y_axis = np.cross(e_t, x_axis)

    # Windowed moving average of the y axes, re-orthonormalized.
    half = max(0, window // 2)
    y_sm = np.empty_like(y_axis)
    for s in range(s_count):
        lo, hi = max(0, s - half), min(s_count, s + half + 1)
        avg = y_axis[lo:hi].mean(axis=0)
        in_plane = project_to_plane(avg, e_t[s])
        n = float(np.linalg.norm(in_plane))
        y_sm[s] = in_plane / n if n > 1e-6 else y_axis[s]
    canal.y_axis = y_sm
    canal.x_axis = np.cross(y_sm, e_t)
    return canal


def classify_end(canal: Canal, which: str, span: int = 10) -> EndAlignment:
    """Vertical/horizontal label for one extremity, from the mean of the
    outermost `span` tangents."""
    if canal.n_states < span:
        raise EndClassificationError(f"canal too short to classify (< {span} states)")
    if which == "head":
        tangents = canal.e_t[:span]
    elif which == "tail":
        tangents = canal.e_t[-span:]
    else:
        raise ValueError(f"unknown end {which!r}")

    mean = tangents.mean(axis=0)
    if np.linalg.norm(mean) < 1e-9:
        raise EndClassificationError(f"mean tangent at {which} end is degenerate")
    mean = normalize(mean)
    theta = angle_between(mean, Z_UP)

    if theta < math.pi / 4.0:
        return EndAlignment(which, "vertical", theta, forced=Z_UP.copy())
    if theta > 3.0 * math.pi / 4.0:
        return EndAlignment(which, "vertical", theta, forced=-Z_UP)
    ground = project_ground(mean)
    return EndAlignment(which, "horizontal", theta, forced=normalize(ground))


def adjacent_intersects(canal: Canal, s: int) -> bool:
    """Conservative adjacent-disk intersection test.

    True iff sin(tilt) * max(r_s, r_{s+1}) >= center spacing.  Never misses
    an intersection when the centers lie in the plane of the two tangents.
    """
    if not 0 <= s < canal.n_states - 1:
        raise IndexError(f"state {s} out of range")
    tilt = angle_between(canal.e_t[s], canal.e_t[s + 1])
    spacing = float(np.linalg.norm(canal.d[s + 1] - canal.d[s]))
    return math.sin(tilt) * max(canal.r[s], canal.r[s + 1]) >= spacing


def _smoothstep(t: float) -> float:
    return t * t * (3.0 - 2.0 * t)


def align_end(canal: Canal, alignment: EndAlignment, fraction: float = 0.2,
              max_iterations: int = 200) -> tuple[Canal, list[int]]:
    """Force the terminal part of the canal onto the classified plane.

    The last ceil(fraction*S) states get tangents rotated from the zone's
    boundary tangent toward the forced tangent on a smoothstep schedule,
    with the final ceil(fraction*S/2) states exactly aligned; the directrix
    is re-integrated from the new tangents preserving per-step arc length.
    An endpoint-constrained Laplacian relaxation of the rotation angles
    runs until no adjacent disks intersect or iterations are exhausted.

    Returns the new canal and the (possibly empty) list of state indices
    where adjacent-disk intersections remain.
    """
    if not 0.0 < fraction <= 0.5:
        raise ValueError("fraction must be in (0, 0.5]")
    if alignment.target == "none":
        return canal.copy(), []

    s_count = canal.n_states
    zone = math.ceil(fraction * s_count)
    plateau = math.ceil(fraction * s_count / 2.0)
    zone = min(zone, s_count - 2)  # keep at least two untouched states
    plateau = min(plateau, zone)
    ramp = zone - plateau

    tail = alignment.which_end == "tail"
    anchor = s_count - zone - 1 if tail else zone
    t_b = canal.e_t[anchor]
    t_f = normalize(alignment.forced)
    delta = angle_between(t_b, t_f)

    # Rotation angle per zone state, k = 0 nearest the anchor.
    angles = np.empty(zone)
    for k in range(zone):
        u = 1.0 if k >= ramp else _smoothstep((k + 1) / (ramp + 1))
        angles[k] = u * delta

    out = canal.copy()

    def zone_index(k: int) -> int:
        return (s_count - zone + k) if tail else (zone - 1 - k)

    # Original per-step arc lengths between consecutive zone states,
    # walking outward from the anchor.
    steps = np.empty(zone)
    for k in range(zone):
        idx = zone_index(k)
        prev = idx - 1 if tail else idx + 1
        steps[k] = float(np.linalg.norm(canal.d[idx] - canal.d[prev]))

    def rebuild(angles_now: np.ndarray) -> None:
        prev_point = canal.d[anchor]
        for k in range(zone):
            idx = zone_index(k)
            if angles_now[k] >= delta - 1e-15:
                tangent = t_f.copy()
            else:
                tangent = rotate_toward(t_b, t_f, angles_now[k])
            out.e_t[idx] = tangent
            direction = tangent if tail else -tangent
            prev_point = prev_point + steps[k] * direction
            out.d[idx] = prev_point

    def offending() -> list[int]:
        lo = anchor if tail else 0
        hi = s_count - 1 if tail else anchor + 1
        return [s for s in range(lo, hi) if adjacent_intersects(out, s)]

    rebuild(angles)
    bad = offending()
    iterations = 0
    while bad and iterations < max_iterations and ramp > 0:
        relaxed = angles.copy()
        for k in range(ramp):
            left = angles[k - 1] if k > 0 else 0.0
            right = angles[k + 1] if k + 1 < zone else delta
            relaxed[k] = 0.5 * angles[k] + 0.25 * (left + right)
        angles = relaxed
        rebuild(angles)
        bad = offending()
        iterations += 1

    # Re-derive in-zone axes against the new tangents, keeping continuity
    # with the neighbouring untouched disk.
    prev_x = out.x_axis[anchor]
    for k in range(zone):
        idx = zone_index(k)
        in_plane = project_to_plane(prev_x, out.e_t[idx])
        n = float(np.linalg.norm(in_plane))
        if n < 1e-6:
            in_plane = project_to_plane(out.y_axis[idx], out.e_t[idx])
            n = float(np.linalg.norm(in_plane))
        out.x_axis[idx] = in_plane / n
        out.y_axis[idx] = np.cross(out.e_t[idx], out.x_axis[idx])
        prev_x = out.x_axis[idx]

    return out, bad
