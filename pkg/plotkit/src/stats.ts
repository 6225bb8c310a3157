// Box-plot statistics: quartiles by linear interpolation, Tukey whiskers
// at 1.5 * IQR, everything beyond the whiskers reported as outliers.

export interface BoxStats {
  median: number;
  q1: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
  n: number;
}

/** Linear-interpolation quantile (the matplotlib/numpy default) on sorted data. */
export function quantileSorted(sorted: number[], p: number): number {
  if (sorted.length === 0) {
    throw new Error("cannot take a quantile of an empty sample");
  }
  if (p < 0 || p > 1) {
    throw new Error(`quantile fraction must lie in [0, 1], got ${p}`);
  }
  const pos = (sorted.length - 1) * p;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  const frac = pos - lo;
  return sorted[lo]! * (1 - frac) + sorted[hi]! * frac;
}

export function boxStats(values: number[]): BoxStats {
  if (values.length === 0) {
    throw new Error("cannot summarize an empty sample");
  }
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantileSorted(sorted, 0.25);
  const median = quantileSorted(sorted, 0.5);
  const q3 = quantileSorted(sorted, 0.75);
  const iqr = q3 - q1;
  const fenceLow = q1 - 1.5 * iqr;
  const fenceHigh = q3 + 1.5 * iqr;
  const inside = sorted.filter((v) => v >= fenceLow && v <= fenceHigh);
  // With a single value the fences collapse onto it, so `inside` is never empty.
  return {
    median,
    q1,
    q3,
    whiskerLow: inside[0]!,
    whiskerHigh: inside[inside.length - 1]!,
    outliers: sorted.filter((v) => v < fenceLow || v > fenceHigh),
    n: sorted.length,
  };
}
