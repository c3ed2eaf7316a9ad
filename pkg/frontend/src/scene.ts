/**
 * Device-independent figure model.
 *
 * Figure kinds build a Scene (scales, series, annotations); the PNG and
 * PDF backends draw the same Scene, which keeps the two outputs in sync
 * and makes layout decisions testable without touching pixels.
 */

export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  min: number;
  max: number;
}

export type SeriesStyle = "line" | "bars" | "hline" | "points";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  style: SeriesStyle;
  color: [number, number, number];
}

export interface Annotation {
  text: string;
  /** position as fractions of the plot area, origin bottom-left */
  fx: number;
  fy: number;
}

export interface Scene {
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  series: Series[];
  annotations: Annotation[];
}

export const PALETTE: [number, number, number][] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [148, 103, 189],
  [255, 127, 14],
  [23, 190, 207],
];

const LOG_SPAN_DECADES = 3; // beyond this span the y-axis switches to log

export function finite(values: number[]): number[] {
  return values.filter((v) => Number.isFinite(v));
}

/** Pick a scale; kind "auto" selects log for positive data spanning more
 * than three decades. */
export function makeScale(values: number[], kind: ScaleKind | "auto"): Scale {
  const vals = finite(values);
  if (vals.length === 0) return { kind: "linear", min: 0, max: 1 };
  let min = Math.min(...vals);
  let max = Math.max(...vals);
  let resolved: ScaleKind;
  if (kind === "auto") {
    const positive = vals.filter((v) => v > 0);
    const logSpan =
      positive.length > 1
        ? Math.log10(Math.max(...positive) / Math.min(...positive))
        : 0;
    resolved = positive.length === vals.length && logSpan > LOG_SPAN_DECADES ? "log" : "linear";
  } else {
    resolved = kind;
  }
  if (resolved === "log") {
    const positive = vals.filter((v) => v > 0);
    min = Math.min(...positive);
    max = Math.max(...positive);
    if (min === max) {
      min /= 10;
      max *= 10;
    }
  } else {
    if (min === max) {
      min -= 0.5;
      max += 0.5;
    } else {
      const pad = 0.05 * (max - min);
      min -= pad;
      max += pad;
    }
  }
  return { kind: resolved, min, max };
}

export function scalePos(scale: Scale, v: number): number {
  if (scale.kind === "log") {
    return (
      (Math.log10(v) - Math.log10(scale.min)) /
      (Math.log10(scale.max) - Math.log10(scale.min))
    );
  }
  return (v - scale.min) / (scale.max - scale.min);
}

/** Data point to pixel coordinates (y grows downward). */
export function project(scene: Scene, x: number, y: number): [number, number] {
  const { margin, width, height } = scene;
  const pw = width - margin.left - margin.right;
  const ph = height - margin.top - margin.bottom;
  const px = margin.left + scalePos(scene.xScale, x) * pw;
  const py = height - margin.bottom - scalePos(scene.yScale, y) * ph;
  return [px, py];
}

export function ticks(scale: Scale, target = 6): number[] {
  if (scale.kind === "log") {
    const lo = Math.ceil(Math.log10(scale.min) - 1e-9);
    const hi = Math.floor(Math.log10(scale.max) + 1e-9);
    const out: number[] = [];
    const stride = Math.max(1, Math.ceil((hi - lo + 1) / target));
    for (let e = lo; e <= hi; e += stride) out.push(10 ** e);
    if (out.length === 0) out.push(scale.min, scale.max);
    return out;
  }
  const span = scale.max - scale.min;
  const raw = span / target;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= target) ?? 10 * mag;
  const start = Math.ceil(scale.min / step) * step;
  const out: number[] = [];
  for (let v = start; v <= scale.max + 1e-12 * span; v += step) out.push(v);
  return out;
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const m = v / 10 ** e;
    const ms = Math.abs(m - 1) < 1e-9 ? "" : `${trim(m)}x`;
    return `${ms}1e${e}`;
  }
  return trim(v);
}

function trim(v: number): string {
  return parseFloat(v.toPrecision(4)).toString();
}

export function baseScene(title: string, xLabel: string, yLabel: string): Scene {
  return {
    width: 800,
    height: 600,
    margin: { left: 90, right: 30, top: 50, bottom: 70 },
    title,
    xLabel,
    yLabel,
    xScale: { kind: "linear", min: 0, max: 1 },
    yScale: { kind: "linear", min: 0, max: 1 },
    series: [],
    annotations: [],
  };
}

/** Least-squares slope of log(y) against log(x); the EOC annotation. */
export function loglogSlope(x: number[], y: number[]): number {
  const pts = x
    .map((xi, i) => [xi, y[i]] as [number, number])
    .filter(([a, b]) => a > 0 && b > 0 && Number.isFinite(a) && Number.isFinite(b));
  const n = pts.length;
  if (n < 2) return NaN;
  const lx = pts.map(([a]) => Math.log(a));
  const ly = pts.map(([, b]) => Math.log(b));
  const mx = lx.reduce((s, v) => s + v, 0) / n;
  const my = ly.reduce((s, v) => s + v, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) ** 2;
  }
  return num / den;
}
