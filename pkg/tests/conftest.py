import numpy as np
import pytest

from canalpilot.canal import Canal, build_canal
from canalpilot.config import Config
from canalpilot.demo_pipeline import AlignedPair, Demonstration
from canalpilot.geometry import QUAT_IDENTITY, normalize
from canalpilot.input_mapping import UserFrame


def make_demo(points, label="demo", quats=None):
    points = np.asarray(points, dtype=float)
    times = np.arange(len(points), dtype=float)
    if quats is None:
        quats = np.tile(QUAT_IDENTITY, (len(points), 1))
    return Demonstration(times, points, np.asarray(quats, dtype=float), label=label)


def pair_from_curves(pos_a, pos_b):
    pos_a = np.asarray(pos_a, dtype=float)
    pos_b = np.asarray(pos_b, dtype=float)
    n = len(pos_a)
    quats = np.tile(QUAT_IDENTITY, (n, 1))
    return AlignedPair(pos_a=pos_a, pos_b=pos_b, quat_a=quats.copy(), quat_b=quats.copy())


def straight_canal(length=1.0, radius=0.05, n=200, z=0.2) -> Canal:
    """Horizontal canal along +x with constant radius."""
    xs = np.linspace(0.0, length, n)
    a = np.column_stack([xs, np.full(n, radius), np.full(n, z)])
    b = np.column_stack([xs, np.full(n, -radius), np.full(n, z)])
    return build_canal(pair_from_curves(a, b))


def bent_canal(n=200, radius=0.04, bend=np.pi / 2):
    """Quarter-bend canal turning from +x toward +z on a unit arc."""
    angles = np.linspace(0.0, bend, n)
    center = np.column_stack([np.sin(angles), np.zeros(n), 1.0 - np.cos(angles)])
    a = center + np.array([0.0, radius, 0.0])
    b = center - np.array([0.0, radius, 0.0])
    return build_canal(pair_from_curves(a, b))


def random_canal(rng, n=200, end_vertical_within=None):
    """Smooth random canal built through the real constructor.

    end_vertical_within: if set, bend the tail so its tangents end within
    that many radians of straight down.
    """
    n_ctrl = 6
    ctrl = np.cumsum(rng.uniform(-0.25, 0.25, size=(n_ctrl, 3)), axis=0)
    ctrl[:, 0] += np.linspace(0.0, 1.0, n_ctrl)  # keep it marching forward
    # Catmull-Rom-ish dense curve through control points via polyline refine
    t_dense = np.linspace(0.0, 1.0, n)
    t_ctrl = np.linspace(0.0, 1.0, n_ctrl)
    center = np.column_stack([
        np.interp(t_dense, t_ctrl, ctrl[:, c]) for c in range(3)
    ])
    if end_vertical_within is not None:
        # Graft a descending tail whose direction is a random tilt off -z.
        tilt = rng.uniform(0.0, end_vertical_within)
        yaw = rng.uniform(0.0, 2 * np.pi)
        down = normalize(np.array([
            np.sin(tilt) * np.cos(yaw), np.sin(tilt) * np.sin(yaw), -np.cos(tilt),
        ]))
        k = n // 4
        step = np.linalg.norm(np.diff(center, axis=0), axis=1).mean()
        for i in range(n - k, n):
            center[i] = center[i - 1] + step * down
    spread = rng.uniform(0.01, 0.06)
    offset = np.array([0.0, spread, 0.0])
    return build_canal(pair_from_curves(center + offset, center - offset))


def default_user() -> UserFrame:
    """Viewer one meter behind the origin looking along +x."""
    return UserFrame.from_facing(origin=[-1.0, 0.0, 0.0], facing=[1.0, 0.0, 0.0])


@pytest.fixture
def cfg() -> Config:
    return Config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
