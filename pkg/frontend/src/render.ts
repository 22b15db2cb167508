/**
 * Figure builders over the solver CLI's CSV outputs.
 *
 * Four kinds: `tradeoff` (sum rate vs probing floor), `runtime` (wall-time
 * bars per method), `vs_m` (sum rate vs antenna count), `beampattern`
 * (radiated power vs angle). Rendering is read-only and deterministic:
 * identical input and spec produce byte-identical SVG.
 */

import { readFileSync, writeFileSync } from "fs";

import { CsvTable, CsvValue, parseCsv, requireColumns, requireSchema } from "./csv";
import {
  Frame,
  HEIGHT,
  LinearScale,
  LogScale,
  MARGIN,
  PALETTE,
  Series,
  WIDTH,
  axes,
  document,
  el,
  escapeText,
  fmt,
  legend,
  logTicks,
  niceTicks,
  polyline,
  tickLabel,
} from "./figure";

export type FigureKind = "tradeoff" | "runtime" | "vs_m" | "beampattern";

export interface PlotSpec {
  kind: FigureKind;
  input: string;
  output: string;
  /** column that splits rows into series; default "method" */
  seriesColumn?: string;
  /** log-scale value axis for runtime bars */
  logScale?: boolean;
}

const SWEEP_SCHEMA = "faisac-sweep-v1";
const BEAMPATTERN_SCHEMA = "faisac-beampattern-v1";

const METHOD_LABELS: Record<string, string> = {
  bsum: "flexible array",
  fpa: "fixed array",
  pso: "swarm search",
};

function label(method: string): string {
  return METHOD_LABELS[method] ?? method;
}

function asNumber(v: CsvValue): number {
  return typeof v === "number" ? v : NaN;
}

function groupSeries(
  table: CsvTable,
  seriesColumn: string,
  yColumn: string,
): Series[] {
  const byName = new Map<string, Map<number, number[]>>();
  for (const row of table.rows) {
    if (row.feasible !== true) continue;
    const name = String(row[seriesColumn]);
    const x = asNumber(row.value);
    const y = asNumber(row[yColumn]);
    if (!isFinite(x) || !isFinite(y)) continue;
    if (!byName.has(name)) byName.set(name, new Map());
    const byX = byName.get(name)!;
    if (!byX.has(x)) byX.set(x, []);
    byX.get(x)!.push(y);
  }
  const names = [...byName.keys()].sort();
  return names.map((name) => {
    const byX = byName.get(name)!;
    const xs = [...byX.keys()].sort((a, b) => a - b);
    return {
      name,
      // mean over repetitions with the min..max range
      points: xs.map((x) => {
        const ys = byX.get(x)!;
        const mean = ys.reduce((s, v) => s + v, 0) / ys.length;
        return { x, y: mean, lo: Math.min(...ys), hi: Math.max(...ys) };
      }),
    };
  });
}

function lineFigure(
  series: Series[],
  title: string,
  xLabel: string,
  yLabel: string,
): string {
  if (series.length === 0 || series.every((s) => s.points.length === 0)) {
    throw new Error("no plottable rows in the input");
  }
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) =>
    s.points.flatMap((p) => [p.lo ?? p.y, p.hi ?? p.y]),
  );
  const x = new LinearScale(
    Math.min(...xs), Math.max(...xs), MARGIN.left, WIDTH - MARGIN.right,
  );
  const yMin = Math.min(0, ...ys);
  const yMax = Math.max(...ys);
  const pad = 0.05 * (yMax - yMin || 1);
  const y = new LinearScale(yMin, yMax + pad, HEIGHT - MARGIN.bottom, MARGIN.top);
  const frame: Frame = {
    title,
    xLabel,
    yLabel,
    x,
    y,
    xTicks: niceTicks(x.d0, x.d1, 8),
    yTicks: niceTicks(y.d0, y.d1, 6),
  };
  const body = [
    axes(frame),
    ...series.map((s, i) => polyline(s, PALETTE[i % PALETTE.length], x, y)),
    legend(series.map((s) => label(s.name))),
  ].join("\n");
  return document(body);
}

export function renderTradeoff(table: CsvTable, spec: PlotSpec): string {
  requireSchema(table, SWEEP_SCHEMA);
  requireColumns(table, ["method", "value", "sum_rate", "feasible"]);
  const series = groupSeries(table, spec.seriesColumn ?? "method", "sum_rate");
  return lineFigure(
    series,
    "Sum rate vs probing power floor",
    "probing power floor (W)",
    "sum rate (bits/s/Hz)",
  );
}

export function renderVsM(table: CsvTable, spec: PlotSpec): string {
  requireSchema(table, SWEEP_SCHEMA);
  requireColumns(table, ["method", "value", "sum_rate", "feasible"]);
  const series = groupSeries(table, spec.seriesColumn ?? "method", "sum_rate");
  return lineFigure(
    series,
    "Sum rate vs transmit antenna count",
    "transmit antennas",
    "sum rate (bits/s/Hz)",
  );
}

export function renderRuntime(table: CsvTable, spec: PlotSpec): string {
  requireSchema(table, SWEEP_SCHEMA);
  requireColumns(table, ["method", "wall_ms"]);
  const seriesColumn = spec.seriesColumn ?? "method";
  const byName = new Map<string, number[]>();
  for (const row of table.rows) {
    const w = asNumber(row.wall_ms);
    if (!isFinite(w)) continue;
    const name = String(row[seriesColumn]);
    if (!byName.has(name)) byName.set(name, []);
    byName.get(name)!.push(w);
  }
  const names = [...byName.keys()].sort();
  if (names.length === 0) {
    throw new Error("no plottable rows in the input");
  }
  const means = names.map((n) => {
    const ws = byName.get(n)!;
    return ws.reduce((s, v) => s + v, 0) / ws.length;
  });
  const maxW = Math.max(...means);
  const minW = Math.min(...means);
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const log = spec.logScale === true;
  const y = log
    ? new LogScale(Math.min(minW, maxW) / 2, maxW * 1.2, bottom, top)
    : new LinearScale(0, maxW * 1.1, bottom, top);
  const yTicks = log
    ? logTicks(y.d0, y.d1)
    : niceTicks(0, maxW * 1.1, 6);
  const frame: Frame = {
    title: "Average runtime per method",
    xLabel: "method",
    yLabel: log ? "wall time (ms, log scale)" : "wall time (ms)",
    x: new LinearScale(0, 1, left, right),
    y,
    xTicks: [],
    yTicks,
  };
  const slot = (right - left) / names.length;
  const bars = names
    .map((name, i) => {
      const cx = left + slot * (i + 0.5);
      const w = slot * 0.5;
      const base = log ? y.at(y.d0) : y.at(0);
      const topY = y.at(means[i]);
      const bar = el("rect", {
        x: fmt(cx - w / 2),
        y: fmt(topY),
        width: fmt(w),
        height: fmt(base - topY),
        fill: PALETTE[i % PALETTE.length],
        stroke: "#333333",
        "stroke-width": 0.5,
      });
      const name_el = el(
        "text",
        {
          x: fmt(cx), y: fmt(bottom + 18), "text-anchor": "middle",
          "font-family": "sans-serif", "font-size": 11, fill: "#333333",
        },
        escapeText(label(name)),
      );
      const value_el = el(
        "text",
        {
          x: fmt(cx), y: fmt(topY - 6), "text-anchor": "middle",
          "font-family": "sans-serif", "font-size": 11, fill: "#111111",
        },
        escapeText(tickLabel(means[i])),
      );
      return [bar, name_el, value_el].join("\n");
    })
    .join("\n");
  return document([axes(frame), bars].join("\n"));
}

export function renderBeampattern(table: CsvTable, spec: PlotSpec): string {
  requireSchema(table, BEAMPATTERN_SCHEMA);
  requireColumns(table, ["angle_deg", "probing_w"]);
  const points = table.rows
    .map((r) => ({ x: asNumber(r.angle_deg), y: asNumber(r.probing_w) }))
    .filter((p) => isFinite(p.x) && isFinite(p.y));
  if (points.length === 0) {
    throw new Error("no plottable rows in the input");
  }
  const series: Series[] = [{ name: "pattern", points }];
  const x = new LinearScale(
    Math.min(...points.map((p) => p.x)),
    Math.max(...points.map((p) => p.x)),
    MARGIN.left,
    WIDTH - MARGIN.right,
  );
  const yMax = Math.max(...points.map((p) => p.y));
  const y = new LinearScale(0, yMax * 1.05 || 1, HEIGHT - MARGIN.bottom, MARGIN.top);
  const frame: Frame = {
    title: "Radiated power vs angle",
    xLabel: "angle (deg)",
    yLabel: "radiated power (W)",
    x,
    y,
    xTicks: niceTicks(x.d0, x.d1, 8),
    yTicks: niceTicks(0, y.d1, 6),
  };
  // dense pattern: draw the line without per-point markers
  const pts = points
    .map((p) => `${fmt(x.at(p.x))},${fmt(y.at(p.y))}`)
    .join(" ");
  const line = el("polyline", {
    points: pts,
    fill: "none",
    stroke: PALETTE[0],
    "stroke-width": 1.5,
  });
  return document([axes(frame), line].join("\n"));
}

const RENDERERS: Record<FigureKind, (t: CsvTable, s: PlotSpec) => string> = {
  tradeoff: renderTradeoff,
  runtime: renderRuntime,
  vs_m: renderVsM,
  beampattern: renderBeampattern,
};

export function renderToString(spec: PlotSpec): string {
  if (!(spec.kind in RENDERERS)) {
    throw new Error(`unknown figure kind '${spec.kind}'`);
  }
  const table = parseCsv(readFileSync(spec.input, "utf-8"));
  return RENDERERS[spec.kind](table, spec);
}

/** Render and write the SVG; nothing is written when rendering fails. */
export function render(spec: PlotSpec): void {
  const svg = renderToString(spec);
  writeFileSync(spec.output, svg, "utf-8");
}
