"""Demonstration preprocessing: DTW alignment, smoothing, uniform resampling.

Two raw kinesthetic demonstrations go in; two temporally aligned, smoothed
trajectories with the same number of equally spaced states come out.  That
pair is what the canal builder consumes.
"""

from dataclasses import dataclass

import numpy as np
from scipy import interpolate

from .geometry import quat_normalize, slerp_unit


@dataclass
class Demonstration:
    """One recorded demo: timestamps, positions (Nx3) and orientations (Nx4)."""

    times: np.ndarray
    positions: np.ndarray
    orientations: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        self.orientations = np.asarray(self.orientations, dtype=float)
        if len(self.times) < 2:
            raise ValueError(f"demonstration '{self.label}' needs at least 2 samples")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError(f"demonstration '{self.label}' timestamps must strictly increase")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError(f"demonstration '{self.label}' has non-finite positions")
        self.orientations = np.array([quat_normalize(q) for q in self.orientations])

    def __len__(self):
        return len(self.times)


@dataclass
class AlignedPair:
    """Two trajectories materialized to a common length.

    `cost` and `path` are filled in by dtw_align and carried for
    diagnostics; resampling drops them.
    """

    pos_a: np.ndarray
    pos_b: np.ndarray
    quat_a: np.ndarray
    quat_b: np.ndarray
    cost: float | None = None
    path: list | None = None

    def __post_init__(self):
        n = len(self.pos_a)
        if n < 2 or len(self.pos_b) != n or len(self.quat_a) != n or len(self.quat_b) != n:
            raise ValueError("aligned pair must hold two equal-length trajectories (N >= 2)")

    def __len__(self):
        return len(self.pos_a)


def dtw_align(a: Demonstration, b: Demonstration) -> AlignedPair:
    """Classic DTW over Euclidean position distance.

    Steps {(1,0), (0,1), (1,1)}, boundary to boundary.  The optimal warping
    path materializes both sequences to the common path length, repeating
    samples where one demo dwells.
    """
    n, m = len(a), len(b)
    dist = np.linalg.norm(a.positions[:, None, :] - b.positions[None, :, :], axis=2)

    acc = np.full((n, m), np.inf)
    acc[0, 0] = dist[0, 0]
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                continue
            best = np.inf
            if i > 0:
                best = acc[i - 1, j]
            if j > 0:
                best = min(best, acc[i, j - 1])
            if i > 0 and j > 0:
                best = min(best, acc[i - 1, j - 1])
            acc[i, j] = dist[i, j] + best

    # Backtrack; prefer the diagonal on ties so identical demos align 1:1.
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        candidates = []
        if i > 0 and j > 0:
            candidates.append((acc[i - 1, j - 1], (i - 1, j - 1)))
        if i > 0:
            candidates.append((acc[i - 1, j], (i - 1, j)))
        if j > 0:
            candidates.append((acc[i, j - 1], (i, j - 1)))
        _, (i, j) = min(candidates, key=lambda c: c[0])
        path.append((i, j))
    path.reverse()

    ia = np.array([p[0] for p in path])
    ib = np.array([p[1] for p in path])
    return AlignedPair(
        pos_a=a.positions[ia].copy(),
        pos_b=b.positions[ib].copy(),
        quat_a=a.orientations[ia].copy(),
        quat_b=b.orientations[ib].copy(),
        cost=float(acc[n - 1, m - 1]),
        path=path,
    )


def dtw_cost(a: Demonstration, b: Demonstration) -> float:
    return dtw_align(a, b).cost


def spline_smooth(points: np.ndarray, smoothing: float) -> np.ndarray:
    """Penalized cubic smoothing spline per coordinate over cumulative arc
    length.

    `smoothing` is the curvature penalty weight lambda, shared by all three
    coordinates; 0 reproduces the input exactly.  Sharing one lambda keeps
    the smoother linear in the data, which makes it exactly equivariant
    under rigid transforms.  Consecutive duplicate points are collapsed for
    the fit; the output keeps the input length.
    """
    points = np.asarray(points, dtype=float)
    if len(points) < 4:
        raise ValueError("spline smoothing needs at least 4 points")
    if smoothing < 0.0:
        raise ValueError("smoothing must be >= 0")

    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    u = np.concatenate([[0.0], np.cumsum(seg)])

    keep = np.concatenate([[True], seg > 1e-12])  # dedup coincident samples
    u_fit = u[keep]
    p_fit = points[keep]
    if len(p_fit) < 4:
        raise ValueError("fewer than 4 distinct points after deduplication")

    out = np.empty_like(points)
    for c in range(3):
        if smoothing == 0.0 or len(p_fit) < 5:
            # Interpolation mode; with only 4 knots a cubic has no
            # curvature freedom left to trade away anyway.
            spl = interpolate.CubicSpline(u_fit, p_fit[:, c])
        else:
            spl = interpolate.make_smoothing_spline(u_fit, p_fit[:, c], lam=smoothing)
        out[:, c] = spl(u)
    return out


def arc_lengths(points: np.ndarray) -> np.ndarray:
    """Cumulative arc length along a polyline, starting at 0."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _resample_one(positions, quats, n_states):
    u = arc_lengths(positions)
    total = u[-1]
    if total < 1e-12:
        raise ValueError("cannot resample a zero-length trajectory")
    targets = np.linspace(0.0, total, n_states)

    pos_out = np.empty((n_states, 3))
    quat_out = np.empty((n_states, 4))
    j = 0
    for k, target in enumerate(targets):
        while j + 1 < len(u) - 1 and u[j + 1] < target:
            j += 1
        seg = u[j + 1] - u[j]
        t = 0.0 if seg < 1e-15 else (target - u[j]) / seg
        t = min(max(t, 0.0), 1.0)
        pos_out[k] = positions[j] + t * (positions[j + 1] - positions[j])
        quat_out[k] = slerp_unit(quats[j], quats[j + 1], t)
    return pos_out, quat_out


def resample_uniform(pair: AlignedPair, n_states: int) -> AlignedPair:
    """Resample both trajectories to n_states points, equally spaced in each
    trajectory's own arc length; orientations are slerped between the
    bracketing samples."""
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    pos_a, quat_a = _resample_one(pair.pos_a, pair.quat_a, n_states)
    pos_b, quat_b = _resample_one(pair.pos_b, pair.quat_b, n_states)
    return AlignedPair(pos_a=pos_a, pos_b=pos_b, quat_a=quat_a, quat_b=quat_b)


def preprocess(a: Demonstration, b: Demonstration, n_states: int = 200,
               smoothing_scale: float = 1e-4) -> AlignedPair:
    """Full pipeline: DTW align, smooth each side, resample to n_states.

    The smoothing budget defaults to smoothing_scale * (arc length)^2 per
    trajectory.
    """
    pair = dtw_align(a, b)
    smoothed = []
    for pts in (pair.pos_a, pair.pos_b):
        budget = smoothing_scale * arc_lengths(pts)[-1] ** 2
        smoothed.append(spline_smooth(pts, budget))
    pair = AlignedPair(pos_a=smoothed[0], pos_b=smoothed[1],
                       quat_a=pair.quat_a, quat_b=pair.quat_b)
    return resample_uniform(pair, n_states)
