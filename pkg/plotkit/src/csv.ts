// Reader for the long-form results CSV written by the experiment runner.
// Expected columns: method,task_id,state,horizon,run,metric,value

export interface LongRow {
  method: string;
  taskId: number;
  state: string;
  horizon: number;
  run: number;
  metric: string;
  value: number;
}

export const LONG_COLUMNS = [
  "method",
  "task_id",
  "state",
  "horizon",
  "run",
  "metric",
  "value",
] as const;

export function parseLongCsv(text: string): LongRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0]!.split(",");
  if (header.join(",") !== LONG_COLUMNS.join(",")) {
    throw new Error(
      `unexpected header: got "${lines[0]}", want "${LONG_COLUMNS.join(",")}"`
    );
  }
  const rows: LongRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i]!.split(",");
    if (cells.length !== LONG_COLUMNS.length) {
      throw new Error(`line ${i + 1}: expected ${LONG_COLUMNS.length} cells, got ${cells.length}`);
    }
    const taskId = Number(cells[1]);
    const horizon = Number(cells[3]);
    const run = Number(cells[4]);
    const value = Number(cells[6]);
    if (![taskId, horizon, run, value].every(Number.isFinite)) {
      throw new Error(`line ${i + 1}: non-numeric task_id/horizon/run/value`);
    }
    rows.push({
      method: cells[0]!,
      taskId,
      state: cells[2]!,
      horizon,
      run,
      metric: cells[5]!,
      value,
    });
  }
  return rows;
}

/** Per-task value vectors for one (metric, method) selection, ordered by task id. */
export function selectSeries(
  rows: LongRow[],
  metric: string,
  method: string
): { taskId: number; values: number[] }[] {
  const byTask = new Map<number, number[]>();
  for (const row of rows) {
    if (row.metric !== metric || row.method !== method) continue;
    const bucket = byTask.get(row.taskId);
    if (bucket) {
      bucket.push(row.value);
    } else {
      byTask.set(row.taskId, [row.value]);
    }
  }
  return [...byTask.keys()]
    .sort((a, b) => a - b)
    .map((taskId) => ({ taskId, values: byTask.get(taskId)! }));
}
