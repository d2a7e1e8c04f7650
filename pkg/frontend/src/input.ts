// Keyboard/gamepad capture mapped to (v, omega) opponent commands.
//
// Keyboard: up/down ramp the speed target at RAMP_RATE while held; left/right
// command full turn rate. A connected gamepad with any active axis wins over
// the keyboard.

import { OMEGA_MAX, V_MAX } from "./protocol.js";

export const RAMP_RATE = 0.3; // m/s per second held
export const GAMEPAD_DEADZONE = 0.1;

export interface GamepadSample {
  axes: number[]; // [steer (-1 left .. +1 right), throttle (-1 up .. +1 down)]
}

export interface Command {
  v: number;
  omega: number;
}

const UP = new Set(["ArrowUp", "KeyW"]);
const DOWN = new Set(["ArrowDown", "KeyS"]);
const LEFT = new Set(["ArrowLeft", "KeyA"]);
const RIGHT = new Set(["ArrowRight", "KeyD"]);

const clamp = (value: number, lo: number, hi: number) =>
  Math.min(Math.max(value, lo), hi);

export class InputController {
  private pressed = new Set<string>();
  private v = 0;

  keyDown(code: string): void {
    this.pressed.add(code);
  }

  keyUp(code: string): void {
    this.pressed.delete(code);
  }

  blur(): void {
    this.pressed.clear();
  }

  private anyOf(codes: Set<string>): boolean {
    for (const code of codes) if (this.pressed.has(code)) return true;
    return false;
  }

  tick(dtSeconds: number, gamepad: GamepadSample | null = null): Command {
    if (gamepad && gamepad.axes.some((a) => Math.abs(a) > GAMEPAD_DEADZONE)) {
      const steer = clamp(gamepad.axes[0] ?? 0, -1, 1);
      const throttle = clamp(-(gamepad.axes[1] ?? 0), 0, 1);
      this.v = throttle * V_MAX;
      return { v: this.v, omega: -steer * OMEGA_MAX };
    }
    if (this.anyOf(UP)) this.v += RAMP_RATE * dtSeconds;
    if (this.anyOf(DOWN)) this.v -= RAMP_RATE * dtSeconds;
    this.v = clamp(this.v, 0, V_MAX);
    let omega = 0;
    if (this.anyOf(LEFT)) omega += OMEGA_MAX;
    if (this.anyOf(RIGHT)) omega -= OMEGA_MAX;
    return { v: this.v, omega };
  }
}
