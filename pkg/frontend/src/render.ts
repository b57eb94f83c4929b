/**
 * Canvas drawing. The field is 100x100 units; everything scales to the
 * canvas so clicks can be mapped back with the same transform.
 */

import { MetricsDoc } from "./api.js";
import { ClientSessionView } from "./session.js";

export const FIELD_UNITS = 100;

export interface FieldTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fieldTransform(width: number, height: number): FieldTransform {
  const scale = Math.min(width, height) / FIELD_UNITS;
  return {
    scale,
    offsetX: (width - FIELD_UNITS * scale) / 2,
    offsetY: (height - FIELD_UNITS * scale) / 2,
  };
}

export function toCanvas(t: FieldTransform, x: number, y: number): [number, number] {
  return [t.offsetX + x * t.scale, t.offsetY + y * t.scale];
}

export function toField(t: FieldTransform, px: number, py: number): [number, number] {
  return [(px - t.offsetX) / t.scale, (py - t.offsetY) / t.scale];
}

export function drawBriefing(ctx: CanvasRenderingContext2D, effects: string | null): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1d2733";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "#f5f7fa";
  ctx.font = "20px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("Drop the ball", width / 2, height / 2 - 40);
  ctx.font = "14px sans-serif";
  ctx.fillText("Tap the glowing ball as fast as you can.", width / 2, height / 2 - 10);
  ctx.fillText("Ignore the other one. Ready?", width / 2, height / 2 + 12);
  if (effects) {
    ctx.fillStyle = "#9fb3c8";
    ctx.fillText(effects, width / 2, height / 2 + 44);
  }
}

export function drawTrial(
  ctx: CanvasRenderingContext2D,
  view: ClientSessionView,
  effects: string | null = null,
): void {
  const { width, height } = ctx.canvas;
  const t = fieldTransform(width, height);
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10161d";
  ctx.fillRect(0, 0, width, height);

  for (const ball of view.layout) {
    const [cx, cy] = toCanvas(t, ball.x, ball.y);
    ctx.beginPath();
    ctx.arc(cx, cy, ball.radius * t.scale, 0, Math.PI * 2);
    ctx.fillStyle = ball.is_target ? "#ffd166" : "#4f6272";
    ctx.fill();
  }

  const theta = view.ticket.theta_s;
  const frac = theta > 0 ? view.remainingS / theta : 0;
  ctx.fillStyle = "#2c3a4c";
  ctx.fillRect(0, height - 8, width, 8);
  ctx.fillStyle = frac > 0.25 ? "#7bd389" : "#e4572e";
  ctx.fillRect(0, height - 8, width * frac, 8);

  ctx.fillStyle = "#9fb3c8";
  ctx.font = "13px sans-serif";
  ctx.textAlign = "left";
  const { c, oe, ce, k } = view.tally;
  ctx.fillText(
    `trial ${view.trialIndex ?? "-"}/${view.ticket.trials_per_session}` +
      `   correct ${c}  missed ${oe}  wrong ${ce}  skipped ${k}`,
    10,
    20,
  );
  if (effects) {
    // effect lines are described in text, never acted out
    ctx.fillText(effects, 10, height - 18);
  }
}

function pct(x: number): string {
  return `${Math.round(x * 100)}%`;
}

export function drawSummary(ctx: CanvasRenderingContext2D, metrics: MetricsDoc): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1d2733";
  ctx.fillRect(0, 0, width, height);

  ctx.textAlign = "center";
  ctx.fillStyle = "#ffd166";
  ctx.font = "bold 42px sans-serif";
  ctx.fillText(`PI ${pct(metrics.pi)}`, width / 2, height / 2 - 50);

  ctx.fillStyle = "#f5f7fa";
  ctx.font = "18px sans-serif";
  ctx.fillText(
    `engagement ${pct(metrics.gf)}   inattention ${pct(metrics.iaf)}   impulsivity ${pct(metrics.imf)}`,
    width / 2,
    height / 2,
  );

  ctx.fillStyle = "#9fb3c8";
  ctx.font = "14px sans-serif";
  const mean = metrics.m_s === null ? "-" : `${metrics.m_s.toFixed(1)}s`;
  ctx.fillText(
    `${metrics.c} correct, ${metrics.oe} missed, ${metrics.ce} wrong, ${metrics.k} skipped` +
      `   mean response ${mean}`,
    width / 2,
    height / 2 + 32,
  );
}
