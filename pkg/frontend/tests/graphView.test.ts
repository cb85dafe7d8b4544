// Rendering parity: nothing in the payload is dropped, labels stay visible,
// and degenerate payloads have defined fallbacks.

import { describe, expect, it } from 'vitest';
import { isValidGraph, layoutPositions, renderGraph } from '../src/graphView.js';
import type { Graph } from '../src/types.js';

const sample: Graph = {
  nodes: [
    { id: 'pneumonia', label: 'Pneumonia' },
    { id: 'chest pain', label: 'Chest Pain' },
    { id: 'infection', label: 'Infection' },
  ],
  edges: [
    { source: 'pneumonia', label: 'causes', target: 'chest pain' },
    { source: 'pneumonia', label: 'caused by', target: 'infection' },
  ],
};

describe('renderGraph', () => {
  it('renders every node and edge exactly once (count parity)', () => {
    const rendered = renderGraph(sample);
    expect(rendered.kind).toBe('graph');
    expect(rendered.nodeCount).toBe(sample.nodes.length);
    expect(rendered.edgeCount).toBe(sample.edges.length);
    expect(rendered.svg.match(/class="node"/g)).toHaveLength(3);
    expect(rendered.svg.match(/class="edge"/g)).toHaveLength(2);
  });

  it('keeps edge labels visible', () => {
    const rendered = renderGraph(sample);
    expect(rendered.svg).toContain('>causes<');
    expect(rendered.svg).toContain('>caused by<');
  });

  it('parity holds for generated graphs', () => {
    for (let n = 1; n <= 40; n += 7) {
      const nodes = Array.from({ length: n }, (_, i) => ({ id: `n${i}`, label: `N${i}` }));
      const edges = Array.from({ length: Math.max(0, n - 1) }, (_, i) => ({
        source: `n${i}`,
        label: `r${i}`,
        target: `n${i + 1}`,
      }));
      const rendered = renderGraph({ nodes, edges });
      expect(rendered.nodeCount).toBe(n);
      expect(rendered.edgeCount).toBe(edges.length);
      expect(rendered.svg.match(/class="node"/g) ?? []).toHaveLength(n);
      expect(rendered.svg.match(/class="edge"/g) ?? []).toHaveLength(edges.length);
    }
  });

  it('shows a placeholder for an empty graph', () => {
    const rendered = renderGraph({ nodes: [], edges: [] });
    expect(rendered.kind).toBe('empty');
    expect(rendered.svg).toContain('no knowledge yet');
  });

  it('falls back to a raw view on invalid payloads', () => {
    const rendered = renderGraph({ nodes: 'nope' });
    expect(rendered.kind).toBe('fallback');
    expect(rendered.svg).toContain('graph-fallback');
  });

  it('escapes markup in labels', () => {
    const rendered = renderGraph({
      nodes: [{ id: 'x', label: '<script>alert(1)</script>' }],
      edges: [],
    });
    expect(rendered.svg).not.toContain('<script>');
    expect(rendered.svg).toContain('&lt;script&gt;');
  });
});

describe('isValidGraph', () => {
  it('rejects dangling edges and duplicate ids', () => {
    expect(
      isValidGraph({
        nodes: [{ id: 'a', label: 'a' }],
        edges: [{ source: 'a', label: 'r', target: 'ghost' }],
      }),
    ).toBe(false);
    expect(
      isValidGraph({
        nodes: [{ id: 'a', label: 'a' }, { id: 'a', label: 'dup' }],
        edges: [],
      }),
    ).toBe(false);
    expect(isValidGraph(sample)).toBe(true);
  });
});

describe('layoutPositions', () => {
  it('centers a single node and spreads many', () => {
    expect(layoutPositions(1)).toHaveLength(1);
    const many = layoutPositions(12);
    const unique = new Set(many.map((p) => `${p.x.toFixed(2)},${p.y.toFixed(2)}`));
    expect(unique.size).toBe(12);
  });
});
