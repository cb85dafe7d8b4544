// HTTP client for the service. Every number the console displays comes
// through this module; nothing is fabricated client-side.

import type {
  Graph,
  KnowledgeEdgeRow,
  MergeOutcome,
  Metrics,
  SessionResult,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

async function readJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = typeof body.detail === 'string' ? body.detail : JSON.stringify(body.detail ?? body);
    } catch {
      // keep statusText
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async ask(text: string): Promise<SessionResult> {
    const response = await this.fetchImpl(this.url('/ask'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    });
    return readJson<SessionResult>(response);
  }

  async graph(topic?: string, hops?: number): Promise<Graph> {
    const params = new URLSearchParams();
    if (topic) params.set('topic', topic);
    if (hops !== undefined) params.set('hops', String(hops));
    const suffix = params.size > 0 ? `?${params.toString()}` : '';
    const response = await this.fetchImpl(this.url(`/graph${suffix}`));
    return readJson<Graph>(response);
  }

  async causality(topic: string): Promise<Graph> {
    const params = new URLSearchParams({ topic });
    const response = await this.fetchImpl(this.url(`/causality?${params.toString()}`));
    return readJson<Graph>(response);
  }

  async addKnowledge(edges: KnowledgeEdgeRow[], author: string): Promise<MergeOutcome> {
    const response = await this.fetchImpl(this.url('/knowledge'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ edges, author }),
    });
    return readJson<MergeOutcome>(response);
  }

  async metrics(): Promise<Metrics> {
    const response = await this.fetchImpl(this.url('/metrics'));
    return readJson<Metrics>(response);
  }

  async health(): Promise<{ status: string }> {
    const response = await this.fetchImpl(this.url('/healthz'));
    return readJson<{ status: string }>(response);
  }
}
