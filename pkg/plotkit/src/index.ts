export { parseLongCsv, selectSeries, type LongRow } from "./csv.js";
export { boxStats, quantileSorted, type BoxStats } from "./stats.js";
export { renderBoxplots, type Series, type RenderOptions } from "./svg.js";
export { main, parseArgs, run, type PlotRequest } from "./cli.js";
