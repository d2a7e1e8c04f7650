// Connection-facing view state: the last few server states plus smooth poses
// for rendering. Rendered positions interpolate between received states and
// never run ahead of the newest one.

import { Phase, Pose, StateMessage } from "./protocol.js";

export const SAMPLE_INTERVAL_MS = 200;

export interface SmoothPoses {
  ego: Pose;
  opp: Pose;
}

function lerpAngle(a: number, b: number, alpha: number): number {
  let diff = b - a;
  while (diff > Math.PI) diff -= 2 * Math.PI;
  while (diff <= -Math.PI) diff += 2 * Math.PI;
  return a + diff * alpha;
}

function lerpPose(a: Pose, b: Pose, alpha: number): Pose {
  return [
    a[0] + (b[0] - a[0]) * alpha,
    a[1] + (b[1] - a[1]) * alpha,
    lerpAngle(a[2], b[2], alpha),
  ];
}

export class ViewModel {
  latest: StateMessage | null = null;
  connection: "connecting" | "open" | "closed" = "connecting";
  role: string | null = null;
  session: string | null = null;
  private buffer: Array<{ state: StateMessage; at: number }> = [];

  get phase(): Phase | null {
    return this.latest ? this.latest.phase : null;
  }

  push(state: StateMessage, receivedAtMs: number): void {
    this.latest = state;
    if (state.role) this.role = state.role;
    this.session = state.session;
    this.buffer.push({ state, at: receivedAtMs });
    if (this.buffer.length > 3) this.buffer.shift();
  }

  poses(nowMs: number): SmoothPoses | null {
    if (this.buffer.length === 0) return null;
    if (this.buffer.length === 1) {
      const only = this.buffer[0].state;
      return { ego: only.ego, opp: only.opp };
    }
    const prev = this.buffer[this.buffer.length - 2];
    const next = this.buffer[this.buffer.length - 1];
    // alpha in [0, 1]: at 1 we sit exactly on the newest state, never past it
    const alpha = Math.min(Math.max((nowMs - next.at) / SAMPLE_INTERVAL_MS, 0), 1);
    return {
      ego: lerpPose(prev.state.ego, next.state.ego, alpha),
      opp: lerpPose(prev.state.opp, next.state.opp, alpha),
    };
  }
}
