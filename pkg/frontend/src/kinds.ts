/**
 * The four figure kinds over the solver's CSV schemas:
 *
 *   eoc        - log-log end-time error vs timestep (eoc.csv), least-squares
 *                slope annotated per input file;
 *   history    - convergence history du_rate/dv_rate vs t (trace.csv), the
 *                y-axis switches to log automatically for wide-range data;
 *   growth     - increment ratios vs t with the theoretical horizontal line
 *                (growth.csv);
 *   iterations - nonlinear iterations per step (trace.csv).
 */

import * as path from "node:path";

import { SchemaError, Table, column } from "./csv";
import {
  PALETTE,
  Scene,
  baseScene,
  finite,
  loglogSlope,
  makeScale,
} from "./scene";

export type FigureKind = "eoc" | "history" | "growth" | "iterations";

export interface BuildResult {
  scene: Scene;
  /** per-input least-squares slopes (eoc only) */
  slopes?: number[];
}

function tag(table: Table): string {
  const label = table.meta["label"] ?? table.meta["scheme"];
  return label ?? path.basename(table.path).replace(/\.csv$/, "");
}

export function buildEoc(tables: Table[]): BuildResult {
  const scene = baseScene("order of convergence", "tau", "E_u");
  const slopes: number[] = [];
  const xs: number[] = [];
  const ys: number[] = [];
  tables.forEach((t, i) => {
    const tau = column(t, "tau");
    const err = column(t, "E_u");
    slopes.push(loglogSlope(tau, err));
    xs.push(...finite(tau));
    ys.push(...finite(err));
    scene.series.push({
      label: tag(t),
      x: tau,
      y: err,
      style: "line",
      color: PALETTE[i % PALETTE.length],
    });
    scene.series.push({
      label: "",
      x: tau,
      y: err,
      style: "points",
      color: PALETTE[i % PALETTE.length],
    });
  });
  scene.xScale = makeScale(xs, "log");
  scene.yScale = makeScale(ys, "log");
  tables.forEach((t, i) => {
    scene.annotations.push({
      text: `${tag(t)} slope = ${slopes[i].toFixed(3)}`,
      fx: 0.05,
      fy: 0.92 - 0.06 * i,
    });
  });
  return { scene, slopes };
}

export function buildHistory(tables: Table[]): BuildResult {
  const scene = baseScene("convergence history", "t", "increment rate");
  const ys: number[] = [];
  tables.forEach((t, i) => {
    const time = column(t, "t");
    const du = column(t, "du_rate");
    const dv = column(t, "dv_rate");
    ys.push(...finite(du), ...finite(dv));
    scene.series.push({
      label: `${tag(t)} u`,
      x: time,
      y: du,
      style: "line",
      color: PALETTE[(2 * i) % PALETTE.length],
    });
    scene.series.push({
      label: `${tag(t)} v`,
      x: time,
      y: dv,
      style: "line",
      color: PALETTE[(2 * i + 1) % PALETTE.length],
    });
  });
  scene.xScale = makeScale(
    tables.flatMap((t) => finite(column(t, "t"))),
    "linear",
  );
  scene.yScale = makeScale(ys, "auto");
  return { scene };
}

export function buildGrowth(tables: Table[]): BuildResult {
  const scene = baseScene("growth-rate check", "t", "increment ratio");
  const ys: number[] = [];
  tables.forEach((t, i) => {
    const time = column(t, "t");
    const ratio = column(t, "ratio");
    const theory = column(t, "theory");
    ys.push(...finite(ratio), ...finite(theory));
    scene.series.push({
      label: tag(t),
      x: time,
      y: ratio,
      style: "line",
      color: PALETTE[i % PALETTE.length],
    });
    scene.series.push({
      label: i === 0 ? "theory" : "",
      x: [time[0], time[time.length - 1]],
      y: [theory[0], theory[0]],
      style: "hline",
      color: [90, 90, 90],
    });
  });
  scene.xScale = makeScale(
    tables.flatMap((t) => finite(column(t, "t"))),
    "linear",
  );
  scene.yScale = makeScale(ys, "linear");
  return { scene };
}

export function buildIterations(tables: Table[]): BuildResult {
  const scene = baseScene("nonlinear iterations per step", "step", "iterations");
  const ys: number[] = [];
  tables.forEach((t, i) => {
    const step = column(t, "step");
    const iters = column(t, "nonlin_iters");
    ys.push(...finite(iters), 0);
    scene.series.push({
      label: tag(t),
      x: step,
      y: iters,
      style: "bars",
      color: PALETTE[i % PALETTE.length],
    });
  });
  scene.xScale = makeScale(
    tables.flatMap((t) => finite(column(t, "step"))),
    "linear",
  );
  scene.yScale = makeScale(ys, "linear");
  return { scene };
}

export function buildFigure(kind: FigureKind, tables: Table[]): BuildResult {
  switch (kind) {
    case "eoc":
      return buildEoc(tables);
    case "history":
      return buildHistory(tables);
    case "growth":
      return buildGrowth(tables);
    case "iterations":
      return buildIterations(tables);
    default:
      throw new SchemaError(`unknown figure kind '${kind}'`);
  }
}
