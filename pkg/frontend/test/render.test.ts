import { mkdtempSync, existsSync, readFileSync, rmSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { afterAll, describe, expect, it } from "vitest";

import { parseCsv, requireSchema } from "../src/csv";
import { niceTicks } from "../src/figure";
import { FigureKind, render, renderToString } from "../src/render";

const FIXTURES = join(__dirname, "fixtures");
const work = mkdtempSync(join(tmpdir(), "faisac-figures-"));

afterAll(() => {
  rmSync(work, { recursive: true, force: true });
});

function fixtureFor(kind: FigureKind): string {
  if (kind === "beampattern") return join(FIXTURES, "beampattern.csv");
  if (kind === "vs_m") return join(FIXTURES, "vs_m.csv");
  return join(FIXTURES, "tradeoff.csv");
}

describe("csv parser", () => {
  it("reads the sweep dialect", () => {
    const table = parseCsv(readFileSync(join(FIXTURES, "tradeoff.csv"), "utf-8"));
    expect(table.schema).toBe("faisac-sweep-v1");
    expect(table.columns).toContain("sum_rate");
    expect(table.rows.length).toBe(20);
    expect(typeof table.rows[0].sum_rate).toBe("number");
    expect(table.rows[0].feasible).toBe(true);
  });

  it("rejects files without a schema line", () => {
    expect(() => parseCsv("a,b\n1,2\n")).toThrow(/schema/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("# schema: x\na,b\n1\n")).toThrow(/expected 2/);
  });

  it("rejects a wrong schema", () => {
    const table = parseCsv("# schema: something-else\na,b\n1,2\n");
    expect(() => requireSchema(table, "faisac-sweep-v1")).toThrow(/mismatch/);
  });
});

describe("tick helper", () => {
  it("produces round steps covering the domain", () => {
    const ticks = niceTicks(0, 9, 8);
    expect(ticks[0]).toBe(0);
    expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(9);
    const steps = ticks.slice(1).map((t, i) => t - ticks[i]);
    for (const s of steps) expect(s).toBeCloseTo(steps[0], 9);
  });
});

describe("figure rendering", () => {
  const kinds: FigureKind[] = ["tradeoff", "runtime", "vs_m", "beampattern"];

  for (const kind of kinds) {
    it(`renders '${kind}' from the golden CSV and is byte-stable`, () => {
      const out1 = join(work, `${kind}-1.svg`);
      const out2 = join(work, `${kind}-2.svg`);
      render({ kind, input: fixtureFor(kind), output: out1 });
      render({ kind, input: fixtureFor(kind), output: out2 });
      const a = readFileSync(out1);
      const b = readFileSync(out2);
      expect(a.equals(b)).toBe(true);
      const svg = a.toString("utf-8");
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg).toContain("</svg>");
    });
  }

  it("labels the trade-off axes with units", () => {
    const svg = renderToString({
      kind: "tradeoff",
      input: fixtureFor("tradeoff"),
      output: "unused.svg",
    });
    expect(svg).toContain("probing power floor (W)");
    expect(svg).toContain("sum rate (bits/s/Hz)");
    expect(svg).toContain("flexible array");
    expect(svg).toContain("fixed array");
  });

  it("supports log-scale runtime bars", () => {
    const lin = renderToString({
      kind: "runtime",
      input: fixtureFor("runtime"),
      output: "unused.svg",
    });
    const log = renderToString({
      kind: "runtime",
      input: fixtureFor("runtime"),
      output: "unused.svg",
      logScale: true,
    });
    expect(log).toContain("log scale");
    expect(log).not.toBe(lin);
  });

  it("rejects a schema mismatch with a descriptive error", () => {
    expect(() =>
      renderToString({
        kind: "beampattern",
        input: fixtureFor("tradeoff"),
        output: "unused.svg",
      }),
    ).toThrow(/schema mismatch/);
  });

  it("errors on an empty table and writes no file", () => {
    const empty = join(work, "empty.csv");
    writeFileSync(
      empty,
      "# schema: faisac-sweep-v1\nmethod,parameter,value,repetition,seed,sum_rate,probing,power,wall_ms,iterations,feasible,solution_file\n",
    );
    const out = join(work, "empty.svg");
    expect(() =>
      render({ kind: "tradeoff", input: empty, output: out }),
    ).toThrow(/no plottable rows/);
    expect(existsSync(out)).toBe(false);
  });

  it("skips infeasible rows in rate figures", () => {
    const rows = [
      "# schema: faisac-sweep-v1",
      "method,parameter,value,repetition,seed,sum_rate,probing,power,wall_ms,iterations,feasible,solution_file",
      "bsum,Pt,0,0,0,10.5,1,1,12.0,5,true,",
      "bsum,Pt,1,0,0,nan,nan,nan,1.0,0,false,",
      "bsum,Pt,2,0,0,9.5,2,1,12.0,5,true,",
    ].join("\n");
    const path = join(work, "gap.csv");
    writeFileSync(path, rows);
    const svg = renderToString({ kind: "tradeoff", input: path, output: "u.svg" });
    // two markers only: the infeasible middle point is absent
    const circles = svg.match(/<circle /g) ?? [];
    expect(circles.length).toBe(2);
  });
});
