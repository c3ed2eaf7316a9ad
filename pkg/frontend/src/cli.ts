#!/usr/bin/env node
/**
 * rdplot <kind> <csv...> -o <image> [--pdf]
 *
 * kind: eoc | history | growth | iterations.  Emits PNG by default, PDF
 * with --pdf.  Exit codes: 0 ok, 1 usage/schema error.
 */

import { EmptyInputError, SchemaError } from "./csv";
import { FigureKind, FigureSpec, render } from "./index";

const KINDS: FigureKind[] = ["eoc", "history", "growth", "iterations"];

export function parseArgs(argv: string[]): FigureSpec {
  const args = [...argv];
  const kind = args.shift();
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new Error(`usage: rdplot <${KINDS.join("|")}> <csv...> -o <image> [--pdf]`);
  }
  const inputs: string[] = [];
  let output = "";
  let pdf = false;
  while (args.length) {
    const a = args.shift()!;
    if (a === "-o" || a === "--out") {
      output = args.shift() ?? "";
    } else if (a === "--pdf") {
      pdf = true;
    } else if (a.startsWith("-")) {
      throw new Error(`unknown option '${a}'`);
    } else {
      inputs.push(a);
    }
  }
  if (inputs.length === 0) throw new Error("no input CSV files given");
  if (!output) throw new Error("missing -o <image>");
  return { kind: kind as FigureKind, inputs, output, pdf };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  try {
    const result = render(spec);
    const slopes = result.slopes
      ? ` (slopes: ${result.slopes.map((s) => s.toFixed(3)).join(", ")})`
      : "";
    console.log(`wrote ${result.output} [${result.bytes} bytes]${slopes}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyInputError) {
      console.error(`input error: ${(err as Error).message}`);
      return 1;
    }
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
