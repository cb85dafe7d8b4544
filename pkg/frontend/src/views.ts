// Pure HTML builders for the session panes. Everything shown is traceable
// to an API response passed in as an argument.

import { escapeXml } from './graphView.js';
import type { SessionResult, Stats, Timing } from './types.js';

export function renderAnswerPane(result: SessionResult): string {
  const paragraphs = result.answer.text
    .split('\n')
    .filter((line) => line.trim().length > 0)
    .map((line) => `<p>${escapeXml(line)}</p>`)
    .join('');
  const sources = result.answer.sources
    .map(
      (url) =>
        `<li class="source"><a href="${escapeXml(url)}">${escapeXml(url)}</a></li>`,
    )
    .join('');
  const removed = result.answer.removed_claims.length
    ? `<details class="removed"><summary>${result.answer.removed_claims.length} removed claim(s)</summary>` +
      result.answer.removed_claims.map((c) => `<p>${escapeXml(c)}</p>`).join('') +
      '</details>'
    : '';
  return (
    `<article class="answer">` +
    `<h2 class="question">${escapeXml(result.question_text)}</h2>` +
    `<div class="answer-text">${paragraphs}</div>` +
    `<ul class="sources">${sources}</ul>` +
    removed +
    `</article>`
  );
}

export function growthBadge(before: Stats, after: Stats): string {
  return (
    `<span class="growth-badge" data-before="${before.triple_count}" ` +
    `data-after="${after.triple_count}">` +
    `${before.triple_count} &rarr; ${after.triple_count} triples</span>`
  );
}

export function timingStrip(timing: Timing): string {
  const cell = (name: string, value: number) =>
    `<span class="timing-cell"><b>${name}</b> ${value.toFixed(3)}s</span>`;
  return (
    `<div class="timing-strip">` +
    cell('retrieval', timing.t_L) +
    cell('knowledge', timing.t_R) +
    cell('generation', timing.t_A) +
    cell('total', timing.t_total) +
    `</div>`
  );
}

export function errorBanner(message: string): string {
  return `<div class="error-banner" role="alert">${escapeXml(message)}</div>`;
}
