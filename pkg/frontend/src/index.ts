/** rdplot: renders the solver's CSV outputs into PNG or PDF figures. */

import * as fs from "node:fs";

import { Table, readCsv } from "./csv";
import { BuildResult, FigureKind, buildFigure } from "./kinds";
import { encodePdf } from "./pdf";
import { drawScene, encodePng } from "./raster";

export { EmptyInputError, SchemaError, parseCsv, readCsv, column } from "./csv";
export * from "./scene";
export { buildEoc, buildFigure, buildGrowth, buildHistory, buildIterations } from "./kinds";
export type { BuildResult, FigureKind } from "./kinds";
export { Raster, drawScene, encodePng } from "./raster";
export { encodePdf } from "./pdf";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  pdf?: boolean;
}

export interface RenderResult extends BuildResult {
  output: string;
  bytes: number;
}

/** Build the figure for a spec and write the image; returns the scene and
 * any computed metadata (e.g. EOC slopes) for inspection. */
export function render(spec: FigureSpec): RenderResult {
  const tables: Table[] = spec.inputs.map(readCsv);
  const built = buildFigure(spec.kind, tables);
  const payload = spec.pdf
    ? encodePdf(built.scene)
    : encodePng(drawScene(built.scene));
  fs.writeFileSync(spec.output, payload);
  return { ...built, output: spec.output, bytes: payload.length };
}
