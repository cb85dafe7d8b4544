// DOM wiring for the three-pane console: answer + sources on the left,
// the answer's knowledge subgraph in the middle, causality analysis on the
// right. All state shown comes from the service; a failed request leaves
// the previous session on screen and surfaces an error banner.

import { ApiClient } from './api.js';
import { renderGraph } from './graphView.js';
import { validateRows } from './knowledgeForm.js';
import { renderGrowthChart, renderTimingChart } from './metricsView.js';
import { errorBanner, growthBadge, renderAnswerPane, timingStrip } from './views.js';
import type { KnowledgeEdgeRow, SessionResult } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

export function startApp(baseUrl: string): void {
  const api = new ApiClient(baseUrl);
  const questionInput = el<HTMLInputElement>('question-input');
  const askButton = el<HTMLButtonElement>('ask-button');
  const banner = el<HTMLDivElement>('banner');
  const answerPane = el<HTMLDivElement>('answer-pane');
  const graphPane = el<HTMLDivElement>('graph-pane');
  const causalityPane = el<HTMLDivElement>('causality-pane');
  const statusBar = el<HTMLDivElement>('status-bar');
  const metricsPane = el<HTMLDivElement>('metrics-pane');

  let inFlight = false;

  const refreshAskButton = () => {
    askButton.disabled = inFlight || questionInput.value.trim().length === 0;
  };
  questionInput.addEventListener('input', refreshAskButton);
  refreshAskButton();

  const showError = (message: string) => {
    banner.innerHTML = errorBanner(message);
  };
  const clearError = () => {
    banner.innerHTML = '';
  };

  async function showCausality(topic: string): Promise<void> {
    try {
      const graph = await api.causality(topic);
      const rendered = renderGraph(graph);
      causalityPane.innerHTML =
        `<h3>causality: ${topic}</h3>` + rendered.svg;
      wireNodeClicks(causalityPane);
    } catch (error) {
      showError(String(error));
    }
  }

  function wireNodeClicks(pane: HTMLElement): void {
    pane.querySelectorAll<SVGGElement>('g.node').forEach((node) => {
      node.addEventListener('click', () => {
        const topic = node.getAttribute('data-node-id');
        if (topic) void showCausality(topic);
      });
    });
  }

  function renderSession(result: SessionResult): void {
    answerPane.innerHTML = renderAnswerPane(result);
    const rendered = renderGraph(result.answer_reasoning);
    graphPane.innerHTML = '<h3>knowledge subgraph</h3>' + rendered.svg;
    wireNodeClicks(graphPane);
    statusBar.innerHTML =
      growthBadge(result.kg_stats_before, result.kg_stats_after) +
      timingStrip(result.timing);
    const firstNode = result.answer_reasoning.nodes[0];
    if (firstNode) void showCausality(firstNode.id);
  }

  askButton.addEventListener('click', async () => {
    if (askButton.disabled) return;
    inFlight = true;
    refreshAskButton();
    try {
      const result = await api.ask(questionInput.value.trim());
      clearError();
      renderSession(result);
    } catch (error) {
      showError(String(error)); // prior session stays on screen
    } finally {
      inFlight = false;
      refreshAskButton();
    }
  });

  // Expert knowledge form: one row of inputs plus author.
  const addButton = el<HTMLButtonElement>('knowledge-add');
  const rowErrors = el<HTMLDivElement>('knowledge-errors');
  addButton.addEventListener('click', async () => {
    const row: KnowledgeEdgeRow = {
      source: el<HTMLInputElement>('k-source').value,
      label: el<HTMLInputElement>('k-label').value,
      target: el<HTMLInputElement>('k-target').value,
    };
    const author = el<HTMLInputElement>('k-author').value;
    const problems = validateRows([row], author);
    if (problems.length > 0) {
      rowErrors.textContent = problems
        .map((p) => (p.row < 0 ? p.message : `row ${p.row + 1}: ${p.message}`))
        .join('; ');
      return; // no request for invalid rows
    }
    rowErrors.textContent = '';
    try {
      const outcome = await api.addKnowledge([row], author);
      const graph = await api.graph();
      const rendered = renderGraph(graph);
      graphPane.innerHTML = '<h3>knowledge graph</h3>' + rendered.svg;
      wireNodeClicks(graphPane);
      const metrics = await api.metrics();
      statusBar.innerHTML =
        `<span class="growth-badge" data-after="${metrics.kg_stats.triple_count}">` +
        `${metrics.kg_stats.triple_count} triples (+${outcome.added} added, ` +
        `${outcome.duplicates} duplicate)</span>`;
    } catch (error) {
      showError(String(error));
    }
  });

  const metricsButton = el<HTMLButtonElement>('metrics-refresh');
  metricsButton.addEventListener('click', async () => {
    try {
      const metrics = await api.metrics();
      metricsPane.innerHTML =
        renderTimingChart(metrics).svg + renderGrowthChart(metrics).svg;
    } catch (error) {
      showError(String(error));
    }
  });
}
