/**
 * Figure rendering command. Each invocation renders one figure kind from an
 * experiment output directory into an SVG/PNG pair.
 *
 *   node dist/cli.js bound_demo --input OUT_DIR --out fig.svg
 *   node dist/cli.js error_curves --input OUT_DIR --out fig.svg
 *   node dist/cli.js field_panels --input OUT_DIR --horizon 10 --trial 0 --out fig.svg
 *   node dist/cli.js comparison_overlay --input MIN_DIR --baseline MAX_DIR --out fig.svg
 *   node dist/cli.js --job job.json
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { sceneToSvg } from "./draw.js";
import {
  renderBoundDemo,
  renderComparisonOverlay,
  renderErrorCurves,
  renderFieldPanels,
  RenderResult,
} from "./figures.js";
import { renderSceneToPng } from "./raster.js";
import { SchemaError } from "./tables.js";

export interface PlotJob {
  kind: "bound_demo" | "error_curves" | "field_panels" | "comparison_overlay";
  input: string;
  out: string;
  baseline?: string;
  horizon?: number;
  trial?: number;
}

export function render(job: PlotJob): RenderResult {
  switch (job.kind) {
    case "bound_demo":
      return renderBoundDemo(job.input);
    case "error_curves":
      return renderErrorCurves(job.input);
    case "field_panels":
      if (job.horizon === undefined || job.trial === undefined) {
        throw new SchemaError("field_panels needs --horizon and --trial");
      }
      return renderFieldPanels(job.input, job.horizon, job.trial);
    case "comparison_overlay":
      if (!job.baseline) {
        throw new SchemaError("comparison_overlay needs --baseline");
      }
      return renderComparisonOverlay(job.input, job.baseline);
    default:
      throw new SchemaError(`unknown figure kind '${(job as PlotJob).kind}'`);
  }
}

export function writeFigure(result: RenderResult, outPath: string): { svg: string; png: string } {
  const svgPath = outPath.endsWith(".svg") ? outPath : `${outPath}.svg`;
  const pngPath = svgPath.replace(/\.svg$/, ".png");
  mkdirSync(dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, sceneToSvg(result.scene));
  writeFileSync(pngPath, renderSceneToPng(result.scene));
  return { svg: svgPath, png: pngPath };
}

function parseArgs(argv: string[]): PlotJob {
  if (argv[0] === "--job") {
    const doc = JSON.parse(readFileSync(argv[1], "utf8"));
    return doc as PlotJob;
  }
  const job: Partial<PlotJob> = { kind: argv[0] as PlotJob["kind"] };
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new SchemaError(`missing value for ${key}`);
    switch (key) {
      case "--input":
        job.input = value;
        break;
      case "--out":
        job.out = value;
        break;
      case "--baseline":
        job.baseline = value;
        break;
      case "--horizon":
        job.horizon = Number(value);
        break;
      case "--trial":
        job.trial = Number(value);
        break;
      default:
        throw new SchemaError(`unknown flag ${key}`);
    }
  }
  if (!job.kind || !job.input || !job.out) {
    throw new SchemaError("usage: <kind> --input DIR --out FILE [--baseline DIR] [--horizon N --trial K]");
  }
  return job as PlotJob;
}

export function main(argv: string[]): number {
  let job: PlotJob;
  try {
    job = parseArgs(argv);
    const result = render(job);
    const paths = writeFigure(result, job.out);
    console.log(`wrote ${paths.svg} and ${paths.png} (config ${result.configHash})`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] && process.argv[1].endsWith("cli.js");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
