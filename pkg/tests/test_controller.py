import math

import numpy as np
import pytest

from canalpilot.canal import Canal
from canalpilot.config import Config
from canalpilot.controller import (
    FAULT_THRESHOLD,
    InputFrameEvent,
    Mode,
    initial_state,
    next_nominal_point,
    permitted_overshoot,
    step,
)
from dataclasses import replace

from conftest import bent_canal, default_user, pair_from_curves, straight_canal

DT = 1.0 / 60.0


def run_ticks(state, canal, user, cfg, ticks, stick=(0.0, 0.0), buttons=()):
    event = InputFrameEvent(stick=stick, buttons=frozenset(buttons))
    poses = []
    for _ in range(ticks):
        state, pose, orient = step(state, canal, user, event, DT, cfg)
        poses.append(pose)
        event = InputFrameEvent(stick=stick)
    return state, poses


class TestNextNominalPoint:
    def test_rho_zero_rides_directrix(self):
        canal = straight_canal(n=30)
        for phi in (0.0, 1.0, -2.5):
            p = next_nominal_point(canal, 7, 0.0, phi)
            assert np.allclose(p, canal.d[7])

    def test_boundary_ride(self):
        canal = straight_canal(n=30, radius=0.08)
        p = next_nominal_point(canal, 4, 1.0, 0.0)
        assert np.allclose(p, canal.d[4] + canal.r[4] * canal.x_axis[4])

    def test_cone_offsets_scale_with_radius(self):
        t = np.linspace(0.0, 1.0, 100)
        a = np.column_stack([t, 0.1 * (1 - t) + 1e-6, np.zeros(100)])
        b = np.column_stack([t, -0.1 * (1 - t) - 1e-6, np.zeros(100)])
        from canalpilot.canal import build_canal
        canal = build_canal(pair_from_curves(a, b), r_min=0.01)
        for s in (0, 25, 50, 99):
            p = next_nominal_point(canal, s, 0.5, math.pi / 2)
            offset = p - canal.d[s]
            assert np.linalg.norm(offset) == pytest.approx(0.5 * canal.r[s], abs=1e-12)
            assert np.dot(offset, canal.y_axis[s]) > 0

    def test_rho_capped_at_rim_without_overshoot(self):
        canal = straight_canal(n=30, radius=0.05)
        p = next_nominal_point(canal, 3, 2.0, 0.0)
        assert np.linalg.norm(p - canal.d[3]) == pytest.approx(0.05)


class TestButtons:
    def test_start_advances_and_finishes(self, cfg):
        canal = straight_canal(n=100)
        user = default_user()
        nominal_ticks = math.ceil((canal.n_states - 1) / cfg.advance_rate / DT)
        state, _ = run_ticks(initial_state(), canal, user, cfg,
                             nominal_ticks + 1, buttons={"start"})
        assert state.mode is Mode.FINISHED
        assert state.s == canal.n_states - 1

    def test_stop_is_terminal_until_start(self, cfg):
        canal = straight_canal(n=50)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 10, buttons={"start"})
        state, _ = run_ticks(state, canal, user, cfg, 1, buttons={"stop"})
        assert state.mode is Mode.STOPPED
        frozen = state.s
        state, _ = run_ticks(state, canal, user, cfg, 30)
        assert state.mode is Mode.STOPPED and state.s == frozen
        state, _ = run_ticks(state, canal, user, cfg, 1, buttons={"start"})
        assert state.mode is Mode.ADVANCING

    def test_toggles_are_involutions(self, cfg):
        canal = straight_canal(n=50)
        user = default_user()
        state = initial_state()
        once, _ = run_ticks(state, canal, user, cfg, 1,
                            buttons={"toggle_direction", "toggle_gripper"})
        assert once.direction == -1 and once.gripper == "closed"
        twice, _ = run_ticks(once, canal, user, cfg, 1,
                             buttons={"toggle_direction", "toggle_gripper"})
        assert twice.direction == 1 and twice.gripper == "open"

    def test_direction_toggle_retraces_with_same_disk_coords(self, cfg):
        canal = bent_canal(n=120)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 60,
                             buttons={"start"})
        k = state.s
        assert state.mode is Mode.ADVANCING and k > 0
        state = replace(state, rho=0.5, phi=1.2)
        state, _ = run_ticks(state, canal, user, cfg, 1,
                             buttons={"toggle_direction"})
        state, poses = run_ticks(state, canal, user, cfg, 2000)
        assert state.mode is Mode.FINISHED
        assert state.s == 0
        assert state.rho == pytest.approx(0.5) and state.phi == pytest.approx(1.2)
        expected = next_nominal_point(canal, 0, 0.5, 1.2)
        assert np.allclose(poses[-1], expected)


class TestCorrections:
    def test_forward_stick_raises_z_on_facing_disk(self, cfg):
        # straight canal along +x gives facing-user vertical disks; stick
        # forward must push the pose up until the rim clamp.
        canal = straight_canal(n=60, radius=0.05)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        zs = []
        for _ in range(10):
            state, pose, _ = step(state, canal, user,
                                  InputFrameEvent(stick=(0.0, 1.0)), DT, cfg)
            zs.append(pose[2])
        assert state.mode is Mode.CORRECTING
        assert all(b > a - 1e-12 for a, b in zip(zs, zs[1:]))
        assert zs[-1] > zs[0]

    def test_clamp_saturates_at_beta_max(self, cfg):
        canal = straight_canal(n=60, radius=0.05)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        for _ in range(600):  # push way beyond the envelope
            state, pose, _ = step(state, canal, user,
                                  InputFrameEvent(stick=(0.0, 1.0)), DT, cfg)
        r = canal.r[state.s]
        assert np.linalg.norm(pose - canal.d[state.s]) == pytest.approx(
            cfg.beta_max * r, abs=1e-9)
        assert state.overshoot == pytest.approx(0.25 * r, abs=1e-9)

    def test_absolute_cap_wins_for_fat_canals(self, cfg):
        canal = straight_canal(n=60, radius=0.4)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        for _ in range(2000):
            state, pose, _ = step(state, canal, user,
                                  InputFrameEvent(stick=(0.0, 1.0)), DT, cfg)
        # 0.25 * 0.4 = 0.10 would exceed the 5 cm absolute cap
        assert np.linalg.norm(pose - canal.d[state.s]) == pytest.approx(
            0.4 + cfg.overshoot_cap_m, abs=1e-9)

    def test_stick_never_advances_state(self, cfg):
        canal = straight_canal(n=60)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        s0 = state.s
        for _ in range(50):
            state, _, _ = step(state, canal, user,
                               InputFrameEvent(stick=(0.7, 0.2)), DT, cfg)
            assert state.s == s0

    def test_deadzone_stick_keeps_advancing(self, cfg):
        canal = straight_canal(n=60)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 3, buttons={"start"})
        s0 = state.s
        state, _ = run_ticks(state, canal, user, cfg, 30, stick=(0.1, 0.05))
        assert state.mode is Mode.ADVANCING
        assert state.s > s0

    def test_correction_resumes_from_new_point(self, cfg):
        canal = straight_canal(n=100, radius=0.05)
        user = default_user()
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        for _ in range(20):
            state, _, _ = step(state, canal, user,
                               InputFrameEvent(stick=(0.0, 1.0)), DT, cfg)
        rho, phi = state.rho, state.phi
        assert rho > 0
        state, _, _ = step(state, canal, user, InputFrameEvent(), DT, cfg)
        assert state.mode is Mode.ADVANCING
        assert state.rho == pytest.approx(rho, abs=1e-9)
        assert state.phi == pytest.approx(phi, abs=1e-9)


class TestOvershootShrink:
    def _corrected_state(self, canal, user, cfg):
        state, _ = run_ticks(initial_state(), canal, user, cfg, 5, buttons={"start"})
        for _ in range(600):
            state, _, _ = step(state, canal, user,
                               InputFrameEvent(stick=(0.0, 1.0)), DT, cfg)
        assert state.overshoot > 0
        return state

    def test_linear_schedule(self, cfg):
        canal = straight_canal(n=200, radius=0.16)
        user = default_user()
        state = self._corrected_state(canal, user, cfg)
        base = state.overshoot
        assert base == pytest.approx(0.04, abs=1e-9)  # 0.25 * 0.16

        # release the stick; window opens at 10
        state, _, _ = step(state, canal, user, InputFrameEvent(), DT, cfg)
        crossed0 = cfg.shrink_window - state.shrink_left  # crossings on the release tick
        s_release = state.s

        seen = {}
        for _ in range(200):
            state, pose, _ = step(state, canal, user, InputFrameEvent(), DT, cfg)
            crossed = (state.s - s_release) + crossed0
            seen[crossed] = permitted_overshoot(state, cfg)
            if crossed >= 12:
                break
        assert seen[5] == pytest.approx(base * 0.5, abs=1e-9)
        assert seen[10] == 0.0
        assert seen[12] == 0.0

    def test_pose_respects_shrinking_envelope(self, cfg):
        canal = straight_canal(n=200, radius=0.1)
        user = default_user()
        state = self._corrected_state(canal, user, cfg)
        state, _, _ = step(state, canal, user, InputFrameEvent(), DT, cfg)
        for _ in range(400):
            state, pose, _ = step(state, canal, user, InputFrameEvent(), DT, cfg)
            excess = np.linalg.norm(pose - canal.d[state.s]) - canal.r[state.s]
            assert excess <= permitted_overshoot(state, cfg) + 1e-9
            if state.mode is Mode.FINISHED:
                break
        assert state.shrink_left == 0


class TestDeterminismAndFaults:
    def test_bit_identical_replay(self, cfg):
        canal = bent_canal(n=100)
        user = default_user()
        script = [InputFrameEvent(buttons=frozenset({"start"}))]
        script += [InputFrameEvent(stick=(0.4, -0.3))] * 17
        script += [InputFrameEvent()] * 40
        script += [InputFrameEvent(stick=(0.0, 0.9))] * 9
        script += [InputFrameEvent()] * 60

        def run():
            state = initial_state()
            out = []
            for ev in script:
                state, pose, orient = step(state, canal, user, ev, DT, cfg)
                out.append((state, pose.tobytes(), orient.tobytes()))
            return out

        first, second = run(), run()
        for (s1, p1, o1), (s2, p2, o2) in zip(first, second):
            assert s1 == s2 and p1 == p2 and o1 == o2

    def test_classification_errors_freeze_then_fault(self, cfg):
        canal = straight_canal(n=40)
        # corrupt the canal so the mapper's candidate x axis is vertical
        bad = Canal(canal.d.copy(), canal.e_t.copy(), canal.r.copy(),
                    np.tile([0.0, 0.0, 1.0], (40, 1)),
                    np.tile([0.0, 0.0, 2.0], (40, 1)), canal.q.copy())
        user = default_user()
        state, _ = run_ticks(initial_state(), bad, user, cfg, 3, buttons={"start"})
        s0 = state.s
        for k in range(FAULT_THRESHOLD):
            state, _, _ = step(state, bad, user,
                               InputFrameEvent(stick=(0.9, 0.0)), DT, cfg)
            assert state.s == s0  # frozen while erroring
        assert state.fault_streak >= FAULT_THRESHOLD
        assert state.mode is Mode.FAULT

    def test_dt_must_be_positive(self, cfg):
        canal = straight_canal(n=20)
        with pytest.raises(ValueError):
            step(initial_state(), canal, default_user(), InputFrameEvent(), 0.0, cfg)

    def test_invalid_stick_rejected(self):
        with pytest.raises(ValueError):
            InputFrameEvent(stick=(2.0, 0.0))

    def test_unknown_button_rejected(self):
        with pytest.raises(ValueError):
            InputFrameEvent(buttons=frozenset({"warp"}))
