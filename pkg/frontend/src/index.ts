export { parseCsv, requireColumns, requireSchema } from "./csv";
export type { CsvTable, CsvValue } from "./csv";
export {
  render,
  renderBeampattern,
  renderRuntime,
  renderToString,
  renderTradeoff,
  renderVsM,
} from "./render";
export type { FigureKind, PlotSpec } from "./render";
