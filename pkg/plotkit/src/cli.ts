#!/usr/bin/env node
// plotkit: render per-task box plots from the long-form results CSV.
//
//   plotkit --csv out/long_results.csv --metric test_rmse --method MTO-CT --out boxes.svg

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseLongCsv, selectSeries } from "./csv.js";
import { renderBoxplots } from "./svg.js";

const METRICS = ["train_rmse", "test_rmse"];
const FLAGS = ["--csv", "--metric", "--method", "--out"];

export interface PlotRequest {
  csv: string;
  metric: string;
  method: string;
  out: string;
}

export function parseArgs(argv: string[]): PlotRequest {
  const seen = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]!;
    const value = argv[i + 1];
    if (!FLAGS.includes(flag)) {
      throw new Error(`unknown flag ${flag}; expected ${FLAGS.join(", ")}`);
    }
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    if (seen.has(flag)) {
      throw new Error(`duplicate flag ${flag}`);
    }
    seen.set(flag, value);
  }
  for (const flag of FLAGS) {
    if (!seen.has(flag)) {
      throw new Error(`missing required flag ${flag}`);
    }
  }
  const metric = seen.get("--metric")!;
  if (!METRICS.includes(metric)) {
    throw new Error(`--metric must be one of ${METRICS.join(", ")}, got ${metric}`);
  }
  return {
    csv: seen.get("--csv")!,
    metric,
    method: seen.get("--method")!,
    out: seen.get("--out")!,
  };
}

export function run(request: PlotRequest): void {
  const rows = parseLongCsv(readFileSync(request.csv, "utf8"));
  const series = selectSeries(rows, request.metric, request.method);
  if (series.length === 0) {
    const metrics = [...new Set(rows.map((r) => r.metric))].join(", ");
    const methods = [...new Set(rows.map((r) => r.method))].join(", ");
    throw new Error(
      `no rows for metric=${request.metric} method=${request.method} ` +
        `(CSV has metrics: ${metrics}; methods: ${methods})`
    );
  }
  const svg = renderBoxplots(series, { metric: request.metric, method: request.method });
  writeFileSync(request.out, svg);
  console.log(`wrote ${request.out}: ${series.length} boxes`);
}

export function main(argv: string[]): number {
  try {
    run(parseArgs(argv));
    return 0;
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
