/** Command line: render --kind <k> --in <csv> --out <img> [--series col] [--log] */

import { parseArgs } from "node:util";

import { FigureKind, PlotSpec, render } from "./render";

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    process.stderr.write(
      "usage: render --kind tradeoff|runtime|vs_m|beampattern --in <csv> --out <img> [--series <column>] [--log]\n",
    );
    return 2;
  }
  let values;
  try {
    values = parseArgs({
      args: argv.slice(1),
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        series: { type: "string" },
        log: { type: "boolean", default: false },
      },
    }).values;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
  if (!values.kind || !values.in || !values.out) {
    process.stderr.write("error: --kind, --in, and --out are required\n");
    return 2;
  }
  const spec: PlotSpec = {
    kind: values.kind as FigureKind,
    input: values.in,
    output: values.out,
    seriesColumn: values.series,
    logScale: values.log,
  };
  try {
    render(spec);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
