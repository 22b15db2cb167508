/**
 * Minimal deterministic SVG figure toolkit: linear scales, nice ticks, and
 * string-built elements. No timestamps, no randomness, fixed numeric
 * formatting, so identical inputs yield byte-identical output.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN: Margin = { top: 24, right: 150, bottom: 52, left: 68 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export function fmt(x: number): string {
  if (!isFinite(x)) return "0";
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Tick label: up to 6 significant digits, no trailing zeros. */
export function tickLabel(x: number): string {
  if (x === 0) return "0";
  const abs = Math.abs(x);
  if (abs >= 1e5 || abs < 1e-3) return x.toExponential(1);
  return String(parseFloat(x.toPrecision(6)));
}

export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(x: number): number {
    if (this.d1 === this.d0) return (this.r0 + this.r1) / 2;
    return this.r0 + ((x - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }
}

export class LogScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {
    if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive domain");
  }

  at(x: number): number {
    const a = Math.log10(this.d0);
    const b = Math.log10(this.d1);
    if (a === b) return (this.r0 + this.r1) / 2;
    return this.r0 + ((Math.log10(x) - a) / (b - a)) * (this.r1 - this.r0);
  }
}

export function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) {
    return [min];
  }
  const span = max - min;
  const rawStep = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function logTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) {
    const v = Math.pow(10, e);
    if (v >= min / 1.0001 && v <= max * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [min, max];
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  return body === ""
    ? `<${tag} ${parts}/>`
    : `<${tag} ${parts}>${body}</${tag}>`;
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Series {
  name: string;
  points: { x: number; y: number; lo?: number; hi?: number }[];
}

export interface Frame {
  title: string;
  xLabel: string;
  yLabel: string;
  x: LinearScale | LogScale;
  y: LinearScale | LogScale;
  xTicks: number[];
  yTicks: number[];
}

export function axes(frame: Frame): string {
  const { x, y } = frame;
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const out: string[] = [];
  out.push(
    el("rect", {
      x: left,
      y: top,
      width: right - left,
      height: bottom - top,
      fill: "none",
      stroke: "#333333",
      "stroke-width": 1,
    }),
  );
  for (const t of frame.xTicks) {
    const px = x.at(t);
    out.push(
      el("line", {
        x1: fmt(px), y1: fmt(bottom), x2: fmt(px), y2: fmt(bottom + 5),
        stroke: "#333333", "stroke-width": 1,
      }),
    );
    out.push(
      el("line", {
        x1: fmt(px), y1: fmt(top), x2: fmt(px), y2: fmt(bottom),
        stroke: "#dddddd", "stroke-width": 0.5,
      }),
    );
    out.push(
      el(
        "text",
        {
          x: fmt(px), y: fmt(bottom + 18), "text-anchor": "middle",
          "font-family": "sans-serif", "font-size": 11, fill: "#333333",
        },
        escapeText(tickLabel(t)),
      ),
    );
  }
  for (const t of frame.yTicks) {
    const py = y.at(t);
    out.push(
      el("line", {
        x1: fmt(left - 5), y1: fmt(py), x2: fmt(left), y2: fmt(py),
        stroke: "#333333", "stroke-width": 1,
      }),
    );
    out.push(
      el("line", {
        x1: fmt(left), y1: fmt(py), x2: fmt(right), y2: fmt(py),
        stroke: "#dddddd", "stroke-width": 0.5,
      }),
    );
    out.push(
      el(
        "text",
        {
          x: fmt(left - 8), y: fmt(py + 4), "text-anchor": "end",
          "font-family": "sans-serif", "font-size": 11, fill: "#333333",
        },
        escapeText(tickLabel(t)),
      ),
    );
  }
  out.push(
    el(
      "text",
      {
        x: fmt((left + right) / 2), y: fmt(HEIGHT - 12), "text-anchor": "middle",
        "font-family": "sans-serif", "font-size": 13, fill: "#111111",
      },
      escapeText(frame.xLabel),
    ),
  );
  out.push(
    el(
      "text",
      {
        x: 16, y: fmt((top + bottom) / 2), "text-anchor": "middle",
        "font-family": "sans-serif", "font-size": 13, fill: "#111111",
        transform: `rotate(-90 16 ${fmt((top + bottom) / 2)})`,
      },
      escapeText(frame.yLabel),
    ),
  );
  out.push(
    el(
      "text",
      {
        x: fmt((left + right) / 2), y: 16, "text-anchor": "middle",
        "font-family": "sans-serif", "font-size": 14, "font-weight": "bold",
        fill: "#111111",
      },
      escapeText(frame.title),
    ),
  );
  return out.join("\n");
}

export function legend(names: string[]): string {
  const x0 = WIDTH - MARGIN.right + 14;
  const out: string[] = [];
  names.forEach((name, i) => {
    const y0 = MARGIN.top + 14 + i * 20;
    out.push(
      el("line", {
        x1: x0, y1: y0, x2: x0 + 22, y2: y0,
        stroke: PALETTE[i % PALETTE.length], "stroke-width": 2,
      }),
    );
    out.push(
      el(
        "text",
        {
          x: x0 + 28, y: y0 + 4, "font-family": "sans-serif",
          "font-size": 12, fill: "#111111",
        },
        escapeText(name),
      ),
    );
  });
  return out.join("\n");
}

export function polyline(
  series: Series,
  color: string,
  x: LinearScale | LogScale,
  y: LinearScale | LogScale,
): string {
  const pts = series.points
    .map((p) => `${fmt(x.at(p.x))},${fmt(y.at(p.y))}`)
    .join(" ");
  const out: string[] = [
    el("polyline", {
      points: pts,
      fill: "none",
      stroke: color,
      "stroke-width": 2,
    }),
  ];
  for (const p of series.points) {
    if (p.lo !== undefined && p.hi !== undefined && p.hi > p.lo) {
      out.push(
        el("line", {
          x1: fmt(x.at(p.x)), y1: fmt(y.at(p.lo)),
          x2: fmt(x.at(p.x)), y2: fmt(y.at(p.hi)),
          stroke: color, "stroke-width": 1,
        }),
      );
    }
    out.push(
      el("circle", {
        cx: fmt(x.at(p.x)), cy: fmt(y.at(p.y)), r: 3, fill: color,
      }),
    );
  }
  return out.join("\n");
}

export function document(body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}
