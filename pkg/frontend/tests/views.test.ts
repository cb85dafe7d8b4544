// Session pane builders and the knowledge-form validation rules.

import { describe, expect, it } from 'vitest';
import { canSubmit, validateRows } from '../src/knowledgeForm.js';
import { renderGrowthChart, renderTimingChart } from '../src/metricsView.js';
import { growthBadge, renderAnswerPane, timingStrip } from '../src/views.js';
import type { Metrics, SessionResult } from '../src/types.js';

const session: SessionResult = {
  question_id: 'q01',
  question_text: 'What are the symptoms of Pneumonia and how can it be prevented?',
  answer: {
    text: 'Pneumonia commonly presents with Chesty Cough.\nSee your doctor.',
    sources: ['https://health.example/conditions/pneumonia/symptoms-prevention/'],
    removed_claims: ['Garlic cures pneumonia overnight.'],
    question_id: 'q01',
  },
  answer_reasoning: {
    nodes: [{ id: 'pneumonia', label: 'Pneumonia' }],
    edges: [],
  },
  repository_reasoning_delta: [],
  kg_stats_before: { term_count: 0, triple_count: 0, relation_type_count: 0 },
  kg_stats_after: { term_count: 29, triple_count: 57, relation_type_count: 10 },
  timing: { t_L: 0.1, t_R: 0.2, t_A: 0.3, t_total: 0.6 },
  wall_clock: 0.7,
  warnings: [],
};

describe('renderAnswerPane', () => {
  it('shows the answer, each source, and removed claims', () => {
    const html = renderAnswerPane(session);
    expect(html).toContain('Chesty Cough');
    expect(html).toContain('https://health.example/conditions/pneumonia/symptoms-prevention/');
    expect(html.match(/class="source"/g)).toHaveLength(1);
    expect(html).toContain('1 removed claim(s)');
  });
});

describe('status widgets', () => {
  it('growth badge carries before and after counts', () => {
    const html = growthBadge(session.kg_stats_before, session.kg_stats_after);
    expect(html).toContain('data-before="0"');
    expect(html).toContain('data-after="57"');
    expect(html).toContain('0 &rarr; 57 triples');
  });

  it('timing strip shows all four figures', () => {
    const html = timingStrip(session.timing);
    for (const piece of ['retrieval', 'knowledge', 'generation', 'total', '0.600s']) {
      expect(html).toContain(piece);
    }
  });
});

describe('knowledge form validation', () => {
  it('flags missing fields per row without sending', () => {
    const errors = validateRows(
      [{ source: 'a', label: '', target: 'b' }],
      'dr-lee',
    );
    expect(errors).toEqual([{ row: 0, field: 'label', message: 'label is required' }]);
    expect(canSubmit([{ source: 'a', label: '', target: 'b' }], 'dr-lee')).toBe(false);
  });

  it('requires an author and distinct endpoints', () => {
    expect(validateRows([{ source: 'a', label: 'r', target: 'a' }], 'x')).not.toHaveLength(0);
    expect(validateRows([{ source: 'a', label: 'r', target: 'b' }], ' ')).not.toHaveLength(0);
    expect(canSubmit([{ source: 'a', label: 'r', target: 'b' }], 'dr-lee')).toBe(true);
  });
});

const metrics: Metrics = {
  kg_stats: { term_count: 226, triple_count: 420, relation_type_count: 36 },
  timing_history: Array.from({ length: 20 }, (_, i) => ({
    index: i + 1,
    question_id: `q${i + 1}`,
    timing: { t_L: 0.01, t_R: 0.02, t_A: 0.03, t_total: 0.06 },
    wall_clock: 0.08,
  })),
  growth_checkpoints: [
    { index: 1, stats: { term_count: 29, triple_count: 57, relation_type_count: 10 }, d_triples: null, d_terms: null, d_relation_types: null },
    { index: 10, stats: { term_count: 141, triple_count: 356, relation_type_count: 23 }, d_triples: 299, d_terms: 112, d_relation_types: 13 },
    { index: 20, stats: { term_count: 226, triple_count: 420, relation_type_count: 36 }, d_triples: 64, d_terms: 85, d_relation_types: 13 },
  ],
};

describe('metrics charts', () => {
  it('plots one timing point per question', () => {
    const chart = renderTimingChart(metrics);
    expect(chart.pointCount).toBe(20);
    expect(chart.svg.match(/class="timing-point"/g)).toHaveLength(20);
  });

  it('marks each growth checkpoint', () => {
    const chart = renderGrowthChart(metrics);
    expect(chart.markerCount).toBe(3);
    expect(chart.svg).toContain('420 @ q20');
  });

  it('renders an empty state on a fresh engine', () => {
    const empty: Metrics = { kg_stats: metrics.kg_stats, timing_history: [], growth_checkpoints: [] };
    expect(renderTimingChart(empty).svg).toContain('no sessions yet');
    expect(renderGrowthChart(empty).svg).toContain('no sessions yet');
  });
});
