// Wire schema spoken by the session server. Units: m, m/s, rad/s, s.

export const V_MAX = 0.61;
export const OMEGA_MAX = 2.0;

export type Triple = [number, number, number]; // [t, x, y]
export type Pose = [number, number, number]; // [x, y, theta]
export type Phase = "lobby" | "countdown" | "running" | "finished";

export interface StateMessage {
  type: "state";
  version: number;
  session: string;
  phase: Phase;
  t: number;
  ego: Pose;
  opp: Pose;
  beliefs: number[];
  potential: number;
  trajectories: { best: Triple[]; failsafe: Triple[]; mixed: Triple[] };
  track: [number, number];
  footprint: number;
  bounds: { v_max: number; omega_max: number };
  countdown?: number;
  outcome?: string;
  collision?: boolean;
  role?: string;
}

export interface ResultMessage {
  type: "result";
  outcome: string;
  collision: boolean;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = StateMessage | ResultMessage | ErrorMessage;

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as { type?: unknown };
  if (msg.type === "state" || msg.type === "result" || msg.type === "error") {
    return data as ServerMessage;
  }
  return null;
}

const clamp = (value: number, lo: number, hi: number) =>
  Math.min(Math.max(value, lo), hi);

export function joinMessage(role: "driver" | "spectator", session?: string): string {
  return JSON.stringify(session ? { type: "join", role, session } : { type: "join", role });
}

export function readyMessage(): string {
  return JSON.stringify({ type: "ready" });
}

// Client-side clamp mirrors the server bounds (the server stays authoritative).
export function inputMessage(v: number, omega: number, clientTime: number): string {
  return JSON.stringify({
    type: "input",
    v: clamp(v, 0, V_MAX),
    omega: clamp(omega, -OMEGA_MAX, OMEGA_MAX),
    client_time: clientTime,
  });
}
