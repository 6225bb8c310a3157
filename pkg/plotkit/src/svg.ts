// Static SVG rendering of per-task box plots. Output is deterministic:
// fixed layout, fixed rounding, no timestamps.

import { boxStats, type BoxStats } from "./stats.js";

export interface Series {
  taskId: number;
  values: number[];
}

export interface RenderOptions {
  metric: string;
  method: string;
  slotWidth?: number;
  plotHeight?: number;
}

const MARGIN = { top: 44, right: 16, bottom: 48, left: 68 };
const BOX_FRACTION = 0.52;

function fmt(x: number): string {
  return String(Math.round(x * 100) / 100);
}

function tickLabel(x: number): string {
  return Number(x.toPrecision(4)).toString();
}

interface Scale {
  (value: number): number;
}

function makeScale(lo: number, hi: number, pixLo: number, pixHi: number): Scale {
  const span = hi - lo;
  return (value) => pixLo + ((value - lo) / span) * (pixHi - pixLo);
}

export function renderBoxplots(series: Series[], options: RenderOptions): string {
  if (series.length === 0) {
    throw new Error("nothing to plot: empty selection");
  }
  const slotWidth = options.slotWidth ?? 52;
  const plotHeight = options.plotHeight ?? 320;
  const width = MARGIN.left + series.length * slotWidth + MARGIN.right;
  const height = MARGIN.top + plotHeight + MARGIN.bottom;

  const stats = series.map((s) => ({ taskId: s.taskId, box: boxStats(s.values) }));
  let lo = Infinity;
  let hi = -Infinity;
  for (const { box } of stats) {
    lo = Math.min(lo, box.whiskerLow, ...box.outliers);
    hi = Math.max(hi, box.whiskerHigh, ...box.outliers);
  }
  const pad = Math.max((hi - lo) * 0.06, Math.abs(hi) * 1e-3, 1e-9);
  const y = makeScale(lo - pad, hi + pad, MARGIN.top + plotHeight, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${fmt(width / 2)}" y="22" text-anchor="middle" font-size="15">` +
      `${options.method}: ${options.metric} per task</text>`
  );

  // y axis with five ticks
  const axisX = MARGIN.left;
  parts.push(
    `<line x1="${axisX}" y1="${MARGIN.top}" x2="${axisX}" ` +
      `y2="${MARGIN.top + plotHeight}" stroke="black"/>`
  );
  for (let i = 0; i <= 4; i++) {
    const value = lo - pad + ((hi + pad - (lo - pad)) * i) / 4;
    const py = y(value);
    parts.push(`<line x1="${axisX - 4}" y1="${fmt(py)}" x2="${axisX}" y2="${fmt(py)}" stroke="black"/>`);
    parts.push(
      `<text x="${axisX - 8}" y="${fmt(py + 4)}" text-anchor="end">${tickLabel(value)}</text>`
    );
  }
  parts.push(
    `<text x="16" y="${fmt(MARGIN.top + plotHeight / 2)}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${fmt(MARGIN.top + plotHeight / 2)})">${options.metric}</text>`
  );

  // x axis
  const baseY = MARGIN.top + plotHeight;
  parts.push(
    `<line x1="${axisX}" y1="${baseY}" x2="${width - MARGIN.right}" y2="${baseY}" stroke="black"/>`
  );
  parts.push(
    `<text x="${fmt(MARGIN.left + (series.length * slotWidth) / 2)}" y="${height - 10}" ` +
      `text-anchor="middle">task</text>`
  );

  stats.forEach(({ taskId, box }, index) => {
    const center = MARGIN.left + slotWidth * (index + 0.5);
    parts.push(renderBox(center, slotWidth * BOX_FRACTION, y, taskId, box));
    parts.push(
      `<text x="${fmt(center)}" y="${fmt(baseY + 18)}" text-anchor="middle">${taskId}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function renderBox(center: number, boxWidth: number, y: Scale, taskId: number, box: BoxStats): string {
  const half = boxWidth / 2;
  const capHalf = half * 0.6;
  const el: string[] = [];
  el.push(`<g class="box" data-task="${taskId}" stroke="black" fill="none">`);
  // whiskers with caps
  el.push(line(center, y(box.whiskerLow), center, y(box.q1), "4 3"));
  el.push(line(center, y(box.q3), center, y(box.whiskerHigh), "4 3"));
  el.push(line(center - capHalf, y(box.whiskerLow), center + capHalf, y(box.whiskerLow)));
  el.push(line(center - capHalf, y(box.whiskerHigh), center + capHalf, y(box.whiskerHigh)));
  // interquartile box and median
  el.push(
    `<rect x="${fmt(center - half)}" y="${fmt(y(box.q3))}" width="${fmt(boxWidth)}" ` +
      `height="${fmt(Math.max(y(box.q1) - y(box.q3), 0))}" fill="#9ecae9" stroke="black"/>`
  );
  el.push(line(center - half, y(box.median), center + half, y(box.median), undefined, 2));
  for (const outlier of box.outliers) {
    el.push(`<circle class="outlier" cx="${fmt(center)}" cy="${fmt(y(outlier))}" r="2.5"/>`);
  }
  el.push(`</g>`);
  return el.join("\n");
}

function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  dash?: string,
  strokeWidth?: number
): string {
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  const widthAttr = strokeWidth ? ` stroke-width="${strokeWidth}"` : "";
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}"${dashAttr}${widthAttr}/>`;
}
