// Wire types of the assistance service HTTP API.

export interface NodeDoc {
  id: string;
  kind: 'operator' | 'operand';
  type: string;
  in_ports: string[];
  out_ports: string[];
  params?: Record<string, unknown>;
  pos?: [number, number];
  size?: [number, number];
}

export interface EdgeDoc {
  src: [string, string];
  dst: [string, string];
  label?: string;
}

export interface CompositeDoc {
  type_id: string;
  inner: ProjectDoc;
  boundary: Record<string, [string, string]>;
}

export interface ProjectDoc {
  project_id: string;
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  composites: CompositeDoc[];
}

/** Small metric panel returned with every state-changing response. */
export interface MetricsPayload {
  cyclomatic: number;
  halstead_length: number;
  halstead_vocabulary: number;
  halstead_difficulty: number;
  layout_quality: number | null;
  [extra: string]: unknown;
}

export interface DetailMetricsPayload extends MetricsPayload {
  layout: Record<string, number> | null;
  halstead_counts: { n1: number; N1: number; n2: number; N2: number };
}

export interface SessionState {
  metrics: MetricsPayload;
  version: string;
}

export interface CreateSessionResponse extends SessionState {
  session_id: string;
}

export type EditOp =
  | { op: 'add_node'; node: NodeDoc }
  | { op: 'remove_node'; id: string }
  | { op: 'add_edge'; edge: EdgeDoc }
  | { op: 'remove_edge'; edge: EdgeDoc }
  | { op: 'move_node'; id: string; x: number; y: number }
  | { op: 'set_param'; id: string; name: string; value: unknown }
  | { op: 'apply_encapsulation'; plan_id: string }
  | { op: 'apply_layout_opt' };

export interface CandidateEdgeTemplate {
  dir: 'in' | 'out';
  peer: string;
}

export interface Recommendation {
  candidate: { kind: string; type: string; edges: CandidateEdgeTemplate[] };
  min_ged: number;
  summed_confidence: number;
  contributing_rows: number[];
}

export interface ClonePlanSummary {
  plan_id: string;
  composite_type: string;
  pattern_nodes: number;
  pattern_edges: number;
  occurrences: string[][];
  support: number;
  predicted_node_delta: number;
}

export interface MetricsDeltaPayload {
  before: Record<string, number>;
  after: Record<string, number>;
  deltas: Record<string, number>;
}

export interface EncapsulateResponse extends SessionState {
  metrics_delta: MetricsDeltaPayload;
  composite: { type_id: string; in_ports: string[]; out_ports: string[] };
}

export interface LayoutResponse extends SessionState {
  metrics_delta: MetricsDeltaPayload;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}
