// Pure world-to-canvas geometry: camera placement, polyline projection,
// robot footprint corners, and HUD fractions. All drawing lives in render.ts.

import { Pose, Triple } from "./protocol.js";

export interface Camera {
  scale: number; // px per metre (fixed)
  originX: number; // world x at the left canvas edge
  originY: number; // world y at the bottom canvas edge
  width: number;
  height: number;
}

export const PX_PER_M = 160;

// Fixed scale; scroll longitudinally so both robots stay in frame.
export function cameraFor(
  width: number,
  height: number,
  egoX: number,
  oppX: number,
  track: [number, number],
): Camera {
  const scale = PX_PER_M;
  const mid = (egoX + oppX) / 2;
  const trackMid = (track[0] + track[1]) / 2;
  return {
    scale,
    originX: mid - width / (2 * scale),
    originY: trackMid - height / (2 * scale),
    width,
    height,
  };
}

export function worldToPx(cam: Camera, x: number, y: number): [number, number] {
  return [(x - cam.originX) * cam.scale, cam.height - (y - cam.originY) * cam.scale];
}

export function polylinePx(cam: Camera, triples: Triple[]): Array<[number, number]> {
  return triples.map(([, x, y]) => worldToPx(cam, x, y));
}

export function robotCornersPx(
  cam: Camera,
  pose: Pose,
  footprint: number,
): Array<[number, number]> {
  const [x, y, theta] = pose;
  const half = footprint / 2;
  const cos = Math.cos(theta);
  const sin = Math.sin(theta);
  const local: Array<[number, number]> = [
    [half, half],
    [half, -half],
    [-half, -half],
    [-half, half],
  ];
  return local.map(([lx, ly]) =>
    worldToPx(cam, x + lx * cos - ly * sin, y + lx * sin + ly * cos),
  );
}

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number;
}

// Three belief bars inside a HUD rectangle, heights proportional to belief.
export function beliefBars(beliefs: number[], rect: Bar): Bar[] {
  const n = beliefs.length;
  const gap = rect.width * 0.08;
  const barWidth = (rect.width - gap * (n - 1)) / n;
  return beliefs.map((b, i) => {
    const h = Math.min(Math.max(b, 0), 1) * rect.height;
    return {
      x: rect.x + i * (barWidth + gap),
      y: rect.y + rect.height - h,
      width: barWidth,
      height: h,
    };
  });
}

export function gaugeFraction(potential: number, limit: number): number {
  if (limit <= 0) return 0;
  return Math.min(Math.max(potential / limit, 0), 1);
}

export function formatClock(t: number): string {
  const totalSeconds = Math.floor(t);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  const tenths = Math.floor((t - totalSeconds) * 10);
  return `${minutes}:${String(seconds).padStart(2, "0")}.${tenths}`;
}
