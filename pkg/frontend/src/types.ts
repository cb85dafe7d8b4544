// Wire types mirroring the service's response models.

export interface GraphNode {
  id: string;
  label: string;
}

export interface GraphEdge {
  source: string;
  label: string;
  target: string;
}

export interface Graph {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface Stats {
  term_count: number;
  triple_count: number;
  relation_type_count: number;
}

export interface Timing {
  t_L: number;
  t_R: number;
  t_A: number;
  t_total: number;
}

export interface Answer {
  text: string;
  sources: string[];
  removed_claims: string[];
  question_id: string;
}

export interface SessionResult {
  question_id: string;
  question_text: string;
  answer: Answer;
  answer_reasoning: Graph;
  repository_reasoning_delta: { s: string; p: string; o: string; rule: string }[];
  kg_stats_before: Stats;
  kg_stats_after: Stats;
  timing: Timing;
  wall_clock: number;
  warnings: string[];
}

export interface MergeOutcome {
  added: number;
  duplicates: number;
}

export interface TimingRow {
  index: number;
  question_id: string;
  timing: Timing;
  wall_clock: number;
}

export interface Checkpoint {
  index: number;
  stats: Stats;
  d_triples: number | null;
  d_terms: number | null;
  d_relation_types: number | null;
}

export interface Metrics {
  kg_stats: Stats;
  timing_history: TimingRow[];
  growth_checkpoints: Checkpoint[];
}

export interface KnowledgeEdgeRow {
  source: string;
  label: string;
  target: string;
}
