// Canvas drawing. Geometry comes from scene.ts; this file only paints.

import { StateMessage, Triple } from "./protocol.js";
import {
  Bar,
  Camera,
  beliefBars,
  cameraFor,
  formatClock,
  gaugeFraction,
  polylinePx,
  robotCornersPx,
  worldToPx,
} from "./scene.js";
import { SmoothPoses } from "./viewmodel.js";

export const COLOR_BEST = "#e03131"; // red: best response
export const COLOR_FAILSAFE = "#212529"; // black: fail-safe
export const COLOR_MIXED = "#1971c2"; // blue: tracked mix
export const COLOR_EGO = "#1971c2";
export const COLOR_OPP = "#e03131";

const POTENTIAL_LIMIT = 0.2;

function strokePolyline(
  ctx: CanvasRenderingContext2D,
  points: Array<[number, number]>,
  color: string,
  width: number,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.stroke();
}

function fillPolygon(
  ctx: CanvasRenderingContext2D,
  points: Array<[number, number]>,
  color: string,
): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
  ctx.fill();
}

function drawTrack(ctx: CanvasRenderingContext2D, cam: Camera, track: [number, number]): void {
  ctx.fillStyle = "#f1f3f5";
  const [, topPx] = worldToPx(cam, 0, track[1]);
  const [, botPx] = worldToPx(cam, 0, track[0]);
  ctx.fillRect(0, topPx, cam.width, botPx - topPx);
  ctx.strokeStyle = "#868e96";
  ctx.lineWidth = 2;
  for (const bound of track) {
    const [, y] = worldToPx(cam, 0, bound);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(cam.width, y);
    ctx.stroke();
  }
  // distance ticks every metre
  ctx.strokeStyle = "#dee2e6";
  ctx.lineWidth = 1;
  const first = Math.ceil(cam.originX);
  for (let x = first; x < cam.originX + cam.width / cam.scale; x += 1) {
    const [px] = worldToPx(cam, x, 0);
    ctx.beginPath();
    ctx.moveTo(px, topPx);
    ctx.lineTo(px, botPx);
    ctx.stroke();
  }
}

function drawHud(ctx: CanvasRenderingContext2D, state: StateMessage, width: number): void {
  const rect: Bar = { x: width - 150, y: 14, width: 90, height: 52 };
  ctx.fillStyle = "#495057";
  ctx.font = "11px sans-serif";
  ctx.fillText("level belief", rect.x, rect.y - 3);
  for (const [i, bar] of beliefBars(state.beliefs, rect).entries()) {
    ctx.fillStyle = "#74c0fc";
    ctx.fillRect(bar.x, bar.y, bar.width, bar.height);
    ctx.fillStyle = "#495057";
    ctx.fillText(String(i), bar.x + bar.width / 2 - 3, rect.y + rect.height + 12);
  }
  const gaugeY = rect.y + rect.height + 24;
  ctx.fillText("switch wariness", rect.x, gaugeY - 3);
  ctx.strokeStyle = "#868e96";
  ctx.strokeRect(rect.x, gaugeY, rect.width, 10);
  ctx.fillStyle = "#e8590c";
  ctx.fillRect(rect.x, gaugeY, rect.width * gaugeFraction(state.potential, POTENTIAL_LIMIT), 10);
  ctx.fillStyle = "#212529";
  ctx.font = "16px monospace";
  ctx.fillText(formatClock(state.t), 16, 26);
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: StateMessage | null,
  poses: SmoothPoses | null,
): void {
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, width, height);
  if (!state || !poses) {
    ctx.fillStyle = "#495057";
    ctx.font = "18px sans-serif";
    ctx.fillText("waiting for session state…", width / 2 - 110, height / 2);
    return;
  }
  const cam = cameraFor(width, height, poses.ego[0], poses.opp[0], state.track);
  drawTrack(ctx, cam, state.track);

  const lines: Array<[Triple[], string]> = [
    [state.trajectories.best, COLOR_BEST],
    [state.trajectories.failsafe, COLOR_FAILSAFE],
    [state.trajectories.mixed, COLOR_MIXED],
  ];
  for (const [triples, color] of lines) {
    strokePolyline(ctx, polylinePx(cam, triples), color, 1.5);
  }
  fillPolygon(ctx, robotCornersPx(cam, poses.opp, state.footprint), COLOR_OPP);
  fillPolygon(ctx, robotCornersPx(cam, poses.ego, state.footprint), COLOR_EGO);
  drawHud(ctx, state, width);

  if (state.phase === "countdown" && state.countdown !== undefined) {
    ctx.fillStyle = "#212529";
    ctx.font = "64px sans-serif";
    ctx.fillText(String(Math.ceil(state.countdown)), width / 2 - 16, height / 2);
  }
}
