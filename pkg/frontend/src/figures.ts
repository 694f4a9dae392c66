/**
 * Figure builders. Every plotted number comes straight out of the input
 * tables; rendering never recomputes any science. Each builder returns the
 * pixel-space scene plus the data-space marks it plotted, so tests can
 * check the drawn endpoints against the tables.
 */

import { join } from "node:path";

import { rgbCss, viridis } from "./color.js";
import { DrawOp, Point, Scene } from "./draw.js";
import { formatTick, linearScale, padDomain, Scale, ticks } from "./scale.js";
import { assertSameHash, numberColumn, readTable, SchemaError, Table } from "./tables.js";

export interface Mark {
  kind: "line" | "band" | "points" | "heatmap" | "trajectory";
  label: string;
  x: number[];
  y: number[];
  low?: number[];
  high?: number[];
}

export interface RenderResult {
  scene: Scene;
  marks: Mark[];
  configHash: string;
  xScale: Scale;
  yScale: Scale;
}

const WIDTH = 680;
const HEIGHT = 440;
const MARGIN = { left: 64, right: 16, top: 28, bottom: 48 };

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

function frame(
  ops: DrawOp[],
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  title: string,
): void {
  const [x0, x1] = xScale.range;
  const [y0, y1] = yScale.range; // y0 is the bottom pixel (greater value)
  ops.push({ op: "line", x1: x0, y1: y0, x2: x1, y2: y0, stroke: "black", width: 1 });
  ops.push({ op: "line", x1: x0, y1: y0, x2: x0, y2: y1, stroke: "black", width: 1 });
  for (const t of ticks(xScale.domain)) {
    const px = xScale.map(t);
    ops.push({ op: "line", x1: px, y1: y0, x2: px, y2: y0 + 4, stroke: "black", width: 1 });
    ops.push({ op: "text", x: px, y: y0 + 16, text: formatTick(t), size: 10, fill: "black", anchor: "middle" });
  }
  for (const t of ticks(yScale.domain)) {
    const py = yScale.map(t);
    ops.push({ op: "line", x1: x0 - 4, y1: py, x2: x0, y2: py, stroke: "black", width: 1 });
    ops.push({ op: "text", x: x0 - 6, y: py + 3, text: formatTick(t), size: 10, fill: "black", anchor: "end" });
  }
  ops.push({
    op: "text", x: (x0 + x1) / 2, y: y0 + 34, text: xLabel, size: 11, fill: "black", anchor: "middle",
  });
  ops.push({
    op: "text", x: x0 - 48, y: (y0 + y1) / 2, text: yLabel, size: 11, fill: "black",
    anchor: "middle", rotate: true,
  });
  ops.push({
    op: "text", x: (x0 + x1) / 2, y: y1 - 10, text: title, size: 12, fill: "black", anchor: "middle",
  });
}

function legend(
  ops: DrawOp[],
  entries: { label: string; color: string; dash?: number[] }[],
  xScale: Scale,
  yScale: Scale,
): void {
  const x = xScale.range[1] - 130;
  let y = yScale.range[1] + 12;
  for (const entry of entries) {
    ops.push({
      op: "polyline",
      points: [
        [x, y],
        [x + 26, y],
      ],
      stroke: entry.color,
      width: 2,
      dash: entry.dash,
    });
    ops.push({ op: "text", x: x + 32, y: y + 3, text: entry.label, size: 10, fill: "black", anchor: "start" });
    y += 14;
  }
}

function bandPolygon(xs: number[], low: number[], high: number[], xScale: Scale, yScale: Scale): Point[] {
  const upper = xs.map((x, i): Point => [xScale.map(x), yScale.map(high[i])]);
  const lower = xs.map((x, i): Point => [xScale.map(x), yScale.map(low[i])]).reverse();
  return upper.concat(lower);
}

// ---------------------------------------------------------------------------
// bound_demo: truth, mean, 1-sigma band, bound band, measurement markers
// ---------------------------------------------------------------------------

export function renderBoundDemo(inputDir: string): RenderResult {
  const grid = readTable(join(inputDir, "grid.csv"), ["x", "truth", "mean", "sd", "bound", "abs_error"]);
  const meas = readTable(join(inputDir, "measurements.csv"), ["x", "y"]);
  const configHash = assertSameHash([grid, meas], "bound_demo");

  const xs = numberColumn(grid, "x", "grid.csv");
  const truth = numberColumn(grid, "truth", "grid.csv");
  const mean = numberColumn(grid, "mean", "grid.csv");
  const sd = numberColumn(grid, "sd", "grid.csv");
  const bound = numberColumn(grid, "bound", "grid.csv");
  const mx = numberColumn(meas, "x", "measurements.csv");
  const my = numberColumn(meas, "y", "measurements.csv");

  const boundLow = mean.map((m, i) => m - bound[i]);
  const boundHigh = mean.map((m, i) => m + bound[i]);
  const sdLow = mean.map((m, i) => m - sd[i]);
  const sdHigh = mean.map((m, i) => m + sd[i]);

  const xScale = linearScale(padDomain(Math.min(...xs), Math.max(...xs), 0.02), [
    MARGIN.left,
    WIDTH - MARGIN.right,
  ]);
  const yScale = linearScale(
    padDomain(Math.min(...boundLow, ...truth, ...my), Math.max(...boundHigh, ...truth, ...my)),
    [HEIGHT - MARGIN.bottom, MARGIN.top],
  );

  const ops: DrawOp[] = [];
  ops.push({ op: "polygon", points: bandPolygon(xs, boundLow, boundHigh, xScale, yScale), fill: "#2ca02c", opacity: 0.18 });
  ops.push({ op: "polygon", points: bandPolygon(xs, sdLow, sdHigh, xScale, yScale), fill: "#7f7f7f", opacity: 0.35 });
  ops.push({ op: "polyline", points: xs.map((x, i): Point => [xScale.map(x), yScale.map(truth[i])]), stroke: "#1f77b4", width: 2 });
  ops.push({ op: "polyline", points: xs.map((x, i): Point => [xScale.map(x), yScale.map(mean[i])]), stroke: "#d62728", width: 2, dash: [5, 3] });
  for (let i = 0; i < mx.length; i++) {
    ops.push({ op: "cross", cx: xScale.map(mx[i]), cy: yScale.map(my[i]), size: 4, stroke: "black", width: 1.5 });
  }
  frame(ops, xScale, yScale, "x", "field value", "worst-case bound vs 1-sigma interval");
  legend(
    ops,
    [
      { label: "truth", color: "#1f77b4" },
      { label: "posterior mean", color: "#d62728", dash: [5, 3] },
      { label: "bound band", color: "#2ca02c" },
      { label: "1-sigma band", color: "#7f7f7f" },
    ],
    xScale,
    yScale,
  );

  return {
    scene: { width: WIDTH, height: HEIGHT, ops },
    marks: [
      { kind: "line", label: "truth", x: xs, y: truth },
      { kind: "line", label: "mean", x: xs, y: mean },
      { kind: "band", label: "bound", x: xs, y: mean, low: boundLow, high: boundHigh },
      { kind: "band", label: "sd", x: xs, y: mean, low: sdLow, high: sdHigh },
      { kind: "points", label: "measurements", x: mx, y: my },
    ],
    configHash,
    xScale,
    yScale,
  };
}

// ---------------------------------------------------------------------------
// error_curves: per-horizon trial-mean error over time with CI bands
// ---------------------------------------------------------------------------

interface CurveFamily {
  horizon: number;
  steps: number[];
  mean: number[];
  ci: number[];
}

function curveFamilies(table: Table, path: string): CurveFamily[] {
  const horizons = numberColumn(table, "horizon", path);
  const steps = numberColumn(table, "step", path);
  const mean = numberColumn(table, "mae_mean", path);
  const ci = numberColumn(table, "mae_ci95", path);
  const byHorizon = new Map<number, CurveFamily>();
  for (let i = 0; i < horizons.length; i++) {
    let fam = byHorizon.get(horizons[i]);
    if (!fam) {
      fam = { horizon: horizons[i], steps: [], mean: [], ci: [] };
      byHorizon.set(horizons[i], fam);
    }
    fam.steps.push(steps[i]);
    fam.mean.push(mean[i]);
    fam.ci.push(ci[i]);
  }
  return [...byHorizon.values()].sort((a, b) => a.horizon - b.horizon);
}

export function renderErrorCurves(inputDir: string): RenderResult {
  const table = readTable(join(inputDir, "aggregate.csv"), ["horizon", "step", "mae_mean", "mae_ci95"]);
  const families = curveFamilies(table, "aggregate.csv");
  const allSteps = families.flatMap((f) => f.steps);
  const allLow = families.flatMap((f) => f.mean.map((m, i) => m - f.ci[i]));
  const allHigh = families.flatMap((f) => f.mean.map((m, i) => m + f.ci[i]));

  const xScale = linearScale([Math.min(...allSteps), Math.max(...allSteps)], [MARGIN.left, WIDTH - MARGIN.right]);
  const yScale = linearScale(padDomain(Math.min(...allLow, 0), Math.max(...allHigh)), [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const ops: DrawOp[] = [];
  const marks: Mark[] = [];
  families.forEach((fam, idx) => {
    const color = SERIES_COLORS[idx % SERIES_COLORS.length];
    const low = fam.mean.map((m, i) => m - fam.ci[i]);
    const high = fam.mean.map((m, i) => m + fam.ci[i]);
    ops.push({ op: "polygon", points: bandPolygon(fam.steps, low, high, xScale, yScale), fill: color, opacity: 0.15 });
    ops.push({
      op: "polyline",
      points: fam.steps.map((s, i): Point => [xScale.map(s), yScale.map(fam.mean[i])]),
      stroke: color,
      width: 2,
    });
    marks.push({ kind: "line", label: `N=${fam.horizon}`, x: fam.steps, y: fam.mean, low, high });
  });
  frame(ops, xScale, yScale, "time step", "mean abs error", "reconstruction error over time");
  legend(
    ops,
    families.map((f, i) => ({ label: `N=${f.horizon}`, color: SERIES_COLORS[i % SERIES_COLORS.length] })),
    xScale,
    yScale,
  );
  return { scene: { width: WIDTH, height: HEIGHT, ops }, marks, configHash: table.configHash, xScale, yScale };
}

// ---------------------------------------------------------------------------
// comparison_overlay: entropy-min vs measurement-entropy-max aggregates
// ---------------------------------------------------------------------------

export function renderComparisonOverlay(inputDir: string, baselineDir: string): RenderResult {
  const minTable = readTable(join(inputDir, "aggregate.csv"), ["horizon", "step", "mae_mean", "mae_ci95"]);
  const maxTable = readTable(join(baselineDir, "aggregate.csv"), ["horizon", "step", "mae_mean", "mae_ci95"]);
  const minFams = curveFamilies(minTable, "aggregate.csv");
  const maxFams = curveFamilies(maxTable, "baseline aggregate.csv");

  const allSteps = [...minFams, ...maxFams].flatMap((f) => f.steps);
  const allMean = [...minFams, ...maxFams].flatMap((f) => f.mean);
  const xScale = linearScale([Math.min(...allSteps), Math.max(...allSteps)], [MARGIN.left, WIDTH - MARGIN.right]);
  const yScale = linearScale(padDomain(0, Math.max(...allMean)), [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const ops: DrawOp[] = [];
  const marks: Mark[] = [];
  const entries: { label: string; color: string; dash?: number[] }[] = [];
  const draw = (fams: CurveFamily[], dash: number[] | undefined, tag: string) => {
    fams.forEach((fam, idx) => {
      const color = SERIES_COLORS[idx % SERIES_COLORS.length];
      ops.push({
        op: "polyline",
        points: fam.steps.map((s, i): Point => [xScale.map(s), yScale.map(fam.mean[i])]),
        stroke: color,
        width: 2,
        dash,
      });
      marks.push({ kind: "line", label: `${tag} N=${fam.horizon}`, x: fam.steps, y: fam.mean });
      entries.push({ label: `${tag} N=${fam.horizon}`, color, dash });
    });
  };
  draw(minFams, undefined, "entropy-min");
  draw(maxFams, [6, 4], "entropy-max");
  frame(ops, xScale, yScale, "time step", "mean abs error", "entropy minimisation vs measurement entropy maximisation");
  legend(ops, entries, xScale, yScale);
  // the two directories legitimately carry different hashes; report the primary's
  return { scene: { width: WIDTH, height: HEIGHT, ops }, marks, configHash: minTable.configHash, xScale, yScale };
}

// ---------------------------------------------------------------------------
// field_panels: posterior mean and variance heatmaps with the trajectory
// ---------------------------------------------------------------------------

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderFieldPanels(inputDir: string, horizon: number, trial: number): RenderResult {
  const pad = (n: number) => String(n).padStart(2, "0");
  const trialDir = join(inputDir, `horizon_${pad(horizon)}`, `trial_${pad(trial)}`);
  const field = readTable(join(trialDir, "final_field.csv"), ["x", "y", "mean", "variance"]);
  const steps = readTable(join(trialDir, "steps.csv"), ["step", "x", "y"]);
  const inducing = readTable(join(inputDir, "inducing.csv"), ["x", "y"]);
  const configHash = assertSameHash([field, steps, inducing], "field_panels");

  const fx = numberColumn(field, "x", "final_field.csv");
  const fy = numberColumn(field, "y", "final_field.csv");
  const mean = numberColumn(field, "mean", "final_field.csv");
  const variance = numberColumn(field, "variance", "final_field.csv");
  const tx = numberColumn(steps, "x", "steps.csv");
  const ty = numberColumn(steps, "y", "steps.csv");
  const ix = numberColumn(inducing, "x", "inducing.csv");
  const iy = numberColumn(inducing, "y", "inducing.csv");

  const xsGrid = uniqueSorted(fx);
  const ysGrid = uniqueSorted(fy);
  if (xsGrid.length * ysGrid.length !== fx.length) {
    throw new SchemaError("final_field.csv is not a full rectangular grid");
  }
  const cellW = xsGrid.length > 1 ? xsGrid[1] - xsGrid[0] : 1;
  const cellH = ysGrid.length > 1 ? ysGrid[1] - ysGrid[0] : 1;
  const xDomain: [number, number] = [xsGrid[0] - cellW / 2, xsGrid[xsGrid.length - 1] + cellW / 2];
  const yDomain: [number, number] = [ysGrid[0] - cellH / 2, ysGrid[ysGrid.length - 1] + cellH / 2];

  const panelWidth = (WIDTH - MARGIN.left - MARGIN.right - 24) / 2;
  const panelHeight = HEIGHT - MARGIN.top - MARGIN.bottom;
  const aspect = (yDomain[1] - yDomain[0]) / (xDomain[1] - xDomain[0]);
  const usedHeight = Math.min(panelHeight, panelWidth * aspect);
  const yTop = MARGIN.top + (panelHeight - usedHeight) / 2;

  const ops: DrawOp[] = [];
  const panels: { label: string; values: number[]; xScale: Scale; yScale: Scale }[] = [];
  (["mean", "variance"] as const).forEach((which, p) => {
    const values = which === "mean" ? mean : variance;
    const left = MARGIN.left + p * (panelWidth + 24);
    const xScale = linearScale(xDomain, [left, left + panelWidth]);
    const yScale = linearScale(yDomain, [yTop + usedHeight, yTop]);
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    for (let i = 0; i < values.length; i++) {
      const px = xScale.map(fx[i] - cellW / 2);
      const py = yScale.map(fy[i] + cellH / 2);
      ops.push({
        op: "rect",
        x: px,
        y: py,
        w: Math.abs(xScale.map(fx[i] + cellW / 2) - px) + 0.5,
        h: Math.abs(yScale.map(fy[i] - cellH / 2) - py) + 0.5,
        fill: rgbCss(viridis((values[i] - lo) / span)),
      });
    }
    for (let i = 0; i < ix.length; i++) {
      ops.push({ op: "circle", cx: xScale.map(ix[i]), cy: yScale.map(iy[i]), r: 3.5, fill: "#d62728" });
    }
    ops.push({
      op: "polyline",
      points: tx.map((x, i): Point => [xScale.map(x), yScale.map(ty[i])]),
      stroke: "#00e020",
      width: 2,
    });
    ops.push({ op: "circle", cx: xScale.map(tx[0]), cy: yScale.map(ty[0]), r: 3, fill: "white" });
    ops.push({
      op: "text",
      x: left + panelWidth / 2,
      y: yTop - 8,
      text: which === "mean" ? "posterior mean" : "posterior variance",
      size: 11,
      fill: "black",
      anchor: "middle",
    });
    ops.push({
      op: "text", x: left + panelWidth / 2, y: yTop + usedHeight + 14,
      text: `N=${horizon} trial ${trial}`, size: 10, fill: "black", anchor: "middle",
    });
    panels.push({ label: which, values, xScale, yScale });
  });

  return {
    scene: { width: WIDTH, height: HEIGHT, ops },
    marks: [
      { kind: "trajectory", label: "trajectory", x: tx, y: ty },
      { kind: "heatmap", label: "mean", x: fx, y: fy, low: mean },
      { kind: "heatmap", label: "variance", x: fx, y: fy, low: variance },
      { kind: "points", label: "inducing", x: ix, y: iy },
    ],
    configHash,
    xScale: panels[0].xScale,
    yScale: panels[0].yScale,
  };
}
