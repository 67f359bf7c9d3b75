// Input polling: standard gamepad first, keyboard arrows as the fallback.
// The poller is pure given an injected gamepad source and a key-state
// object, so the mapping is unit-testable without a browser.

import type { ButtonName, WireInput } from "./protocol.js";

export const DEADZONE = 0.15;
export const KEYBOARD_DEFLECTION = 0.7;

// standard mapping: A B X Y
const BUTTON_MAP: ButtonName[] = ["start", "stop", "toggle_direction", "toggle_gripper"];

export interface GamepadLike {
  axes: ReadonlyArray<number>;
  buttons: ReadonlyArray<{ pressed: boolean }>;
  connected: boolean;
}

export interface KeyState {
  left: boolean;
  right: boolean;
  up: boolean;
  down: boolean;
  buttons: Partial<Record<ButtonName, boolean>>;
}

export function emptyKeyState(): KeyState {
  return { left: false, right: false, up: false, down: false, buttons: {} };
}

function applyDeadzone(u: number, v: number): [number, number] {
  return Math.hypot(u, v) > DEADZONE ? [u, v] : [0, 0];
}

export class InputPoller {
  private prevButtons: boolean[] = [false, false, false, false];
  private prevKeyButtons: Partial<Record<ButtonName, boolean>> = {};
  private lastStick: [number, number] = [0, 0];
  private hadGamepad = false;
  readonly getGamepads: () => (GamepadLike | null)[];
  source: "gamepad" | "keyboard" = "keyboard";

  constructor(getGamepads: () => (GamepadLike | null)[]) {
    this.getGamepads = getGamepads;
  }

  /** One animation frame worth of events: at most one stick event plus
   *  button press edges. */
  poll(keys: KeyState): WireInput[] {
    const events: WireInput[] = [];
    const pad = this.getGamepads().find((p) => p && p.connected) ?? null;

    let stick: [number, number];
    if (pad) {
      this.source = "gamepad";
      this.hadGamepad = true;
      // axes[1] is negative when pushed forward on standard pads
      stick = applyDeadzone(pad.axes[0] ?? 0, -(pad.axes[1] ?? 0));
      pad.buttons.slice(0, 4).forEach((button, i) => {
        if (button.pressed && !this.prevButtons[i]) {
          events.push({ kind: "button", button: BUTTON_MAP[i] });
        }
        this.prevButtons[i] = button.pressed;
      });
    } else {
      // silently fall back; an unplug mid-motion must zero the stick at once
      this.source = "keyboard";
      if (this.hadGamepad) {
        this.hadGamepad = false;
        this.prevButtons = [false, false, false, false];
        this.lastStick = [0, 0];
        events.push({ kind: "stick", u: 0, v: 0 });
        return events;
      }
      const u = (keys.right ? KEYBOARD_DEFLECTION : 0) - (keys.left ? KEYBOARD_DEFLECTION : 0);
      const v = (keys.up ? KEYBOARD_DEFLECTION : 0) - (keys.down ? KEYBOARD_DEFLECTION : 0);
      stick = applyDeadzone(u, v);
      for (const name of BUTTON_MAP) {
        const pressed = keys.buttons[name] ?? false;
        if (pressed && !this.prevKeyButtons[name]) {
          events.push({ kind: "button", button: name });
        }
        this.prevKeyButtons[name] = pressed;
      }
    }

    const [u, v] = stick;
    const [pu, pv] = this.lastStick;
    const active = u !== 0 || v !== 0;
    const released = !active && (pu !== 0 || pv !== 0);
    if (active || released) {
      events.push({ kind: "stick", u, v });
    }
    this.lastStick = stick;
    return events;
  }
}
