// Dashboard charts as SVG strings: response time per question and triple
// growth, with markers at the configured growth checkpoints.

import { escapeXml } from './graphView.js';
import type { Metrics } from './types.js';

const W = 560;
const H = 220;
const PAD = 36;

function polyline(points: { x: number; y: number }[], cls: string): string {
  const attr = points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(' ');
  return `<polyline class="${cls}" fill="none" stroke="#4a6fa5" points="${attr}"/>`;
}

function scale(values: number[], size: number, pad: number): (v: number) => number {
  const max = Math.max(...values, 1e-9);
  return (v: number) => pad + ((size - 2 * pad) * v) / max;
}

export interface RenderedChart {
  svg: string;
  pointCount: number;
  markerCount: number;
}

export function renderTimingChart(metrics: Metrics): RenderedChart {
  const rows = metrics.timing_history;
  if (rows.length === 0) {
    return {
      svg: '<div class="chart-empty">no sessions yet</div>',
      pointCount: 0,
      markerCount: 0,
    };
  }
  const sx = (i: number) => PAD + ((W - 2 * PAD) * i) / Math.max(rows.length - 1, 1);
  const sy = scale(rows.map((r) => r.timing.t_total), H, PAD);
  const points = rows.map((r, i) => ({ x: sx(i), y: H - sy(r.timing.t_total) }));
  const dots = points
    .map(
      (p, i) =>
        `<circle class="timing-point" data-index="${rows[i].index}" ` +
        `cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="3"/>`,
    )
    .join('');
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" class="timing-chart">` +
    `<text x="${PAD}" y="16" class="chart-title">response time per question (s)</text>` +
    polyline(points, 'timing-line') +
    dots +
    `</svg>`;
  return { svg, pointCount: rows.length, markerCount: 0 };
}

export function renderGrowthChart(metrics: Metrics): RenderedChart {
  const rows = metrics.timing_history;
  const checkpoints = metrics.growth_checkpoints;
  if (rows.length === 0 && checkpoints.length === 0) {
    return {
      svg: '<div class="chart-empty">no sessions yet</div>',
      pointCount: 0,
      markerCount: 0,
    };
  }
  const byIndex = new Map(checkpoints.map((c) => [c.index, c]));
  const indices = rows.map((r) => r.index);
  const counts = checkpoints.map((c) => c.stats.triple_count);
  const sx = (i: number) =>
    PAD + ((W - 2 * PAD) * (i - 1)) / Math.max(Math.max(...indices, 1) - 1, 1);
  const sy = scale(counts.length ? counts : [1], H, PAD);
  const markers = checkpoints
    .map(
      (c) =>
        `<g class="checkpoint" data-index="${c.index}">` +
        `<line x1="${sx(c.index).toFixed(1)}" y1="${PAD}" x2="${sx(c.index).toFixed(1)}" ` +
        `y2="${H - PAD}" stroke="#c0762c" stroke-dasharray="4 3"/>` +
        `<circle cx="${sx(c.index).toFixed(1)}" cy="${(H - sy(c.stats.triple_count)).toFixed(1)}" r="4"/>` +
        `<text x="${sx(c.index).toFixed(1)}" y="${PAD - 6}" text-anchor="middle">` +
        `${escapeXml(String(c.stats.triple_count))} @ q${c.index}</text></g>`,
    )
    .join('');
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" class="growth-chart">` +
    `<text x="${PAD}" y="16" class="chart-title">knowledge triples over questions</text>` +
    markers +
    `</svg>`;
  return { svg, pointCount: rows.length, markerCount: byIndex.size };
}
