// Node/edge rendering as an SVG string. Pure: layout is deterministic
// (circular), every node and edge in the payload is rendered exactly once,
// and edge labels are always visible. Invalid payloads fall back to a raw
// verbatim view instead of a blank pane.

import type { Graph } from './types.js';

export interface RenderedGraph {
  svg: string;
  nodeCount: number;
  edgeCount: number;
  kind: 'graph' | 'empty' | 'fallback';
}

const WIDTH = 520;
const HEIGHT = 420;
const NODE_RADIUS = 26;

export function escapeXml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function isValidGraph(payload: unknown): payload is Graph {
  if (typeof payload !== 'object' || payload === null) return false;
  const doc = payload as Graph;
  if (!Array.isArray(doc.nodes) || !Array.isArray(doc.edges)) return false;
  const ids = new Set<string>();
  for (const node of doc.nodes) {
    if (typeof node?.id !== 'string' || ids.has(node.id)) return false;
    ids.add(node.id);
  }
  return doc.edges.every(
    (edge) =>
      typeof edge?.source === 'string' &&
      typeof edge?.label === 'string' &&
      typeof edge?.target === 'string' &&
      ids.has(edge.source) &&
      ids.has(edge.target),
  );
}

export function layoutPositions(count: number): { x: number; y: number }[] {
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  if (count === 1) return [{ x: cx, y: cy }];
  const radius = Math.min(WIDTH, HEIGHT) / 2 - NODE_RADIUS - 30;
  const positions = [];
  for (let i = 0; i < count; i += 1) {
    const angle = (2 * Math.PI * i) / count - Math.PI / 2;
    positions.push({
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  }
  return positions;
}

export function renderGraph(payload: unknown): RenderedGraph {
  if (!isValidGraph(payload)) {
    const raw = escapeXml(JSON.stringify(payload, null, 2) ?? 'null');
    return {
      svg: `<pre class="graph-fallback" data-kind="fallback">${raw}</pre>`,
      nodeCount: 0,
      edgeCount: 0,
      kind: 'fallback',
    };
  }
  const graph = payload;
  if (graph.nodes.length === 0) {
    return {
      svg: '<div class="graph-empty" data-kind="empty">no knowledge yet</div>',
      nodeCount: 0,
      edgeCount: 0,
      kind: 'empty',
    };
  }
  const positions = layoutPositions(graph.nodes.length);
  const index = new Map(graph.nodes.map((node, i) => [node.id, i]));
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `class="graph-view" data-kind="graph">`,
  );
  for (const edge of graph.edges) {
    const a = positions[index.get(edge.source)!];
    const b = positions[index.get(edge.target)!];
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    parts.push(
      `<g class="edge" data-source="${escapeXml(edge.source)}" ` +
        `data-target="${escapeXml(edge.target)}">` +
        `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" ` +
        `x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" stroke="#7a8ba6"/>` +
        `<text class="edge-label" x="${mx.toFixed(1)}" y="${(my - 4).toFixed(1)}" ` +
        `text-anchor="middle">${escapeXml(edge.label)}</text></g>`,
    );
  }
  graph.nodes.forEach((node, i) => {
    const p = positions[i];
    parts.push(
      `<g class="node" data-node-id="${escapeXml(node.id)}">` +
        `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${NODE_RADIUS}" ` +
        `fill="#eef4ff" stroke="#4a6fa5"/>` +
        `<text x="${p.x.toFixed(1)}" y="${(p.y + 4).toFixed(1)}" text-anchor="middle" ` +
        `class="node-label">${escapeXml(node.label)}</text></g>`,
    );
  });
  parts.push('</svg>');
  return {
    svg: parts.join(''),
    nodeCount: graph.nodes.length,
    edgeCount: graph.edges.length,
    kind: 'graph',
  };
}
