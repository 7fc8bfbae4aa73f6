/** Wire types for the session service HTTP + NDJSON event API. */

export type ClassLabel = string | number;

export interface BudgetInfo {
  B: number;
  W: number;
  b: number;
  t_p: number;
}

export interface PendingQuery {
  sample_id: number;
  node_id: number;
  features: number[];
  deadline_s: number;
}

export interface SessionState {
  v: number;
  id: string;
  t: number;
  total_samples: number;
  n_nodes: number;
  n_classes: number;
  classes: ClassLabel[];
  budget: BudgetInfo;
  queries: number;
  labels: number;
  skips: number;
  pending_query: PendingQuery | null;
  pacing: number;
  done: boolean;
}

export interface SnapshotNode {
  id: number;
  pos: number[];
  d: number;
  q: number[];
  predicted: ClassLabel;
}

export interface Snapshot {
  v: number;
  id: string;
  t: number;
  nodes: SnapshotNode[];
  edges: [number, number, number][];
  classes: ClassLabel[];
  accuracy_curve: [number, number][];
  graph_hash: string;
}

interface EventBase {
  v: number;
  seq: number;
}

export interface SampleProcessedEvent extends EventBase {
  kind: "sample_processed";
  t: number;
  winner: number;
  y_hat: ClassLabel;
  u_e: number;
  u_a: number;
  u_t: number;
  s_t: number;
  queried: boolean;
  n_nodes: number;
  n_classes: number;
  node: { id: number; pos: number[]; d: number; q: number[] };
}

export interface QueryRequestedEvent extends EventBase {
  kind: "query_requested";
  sample_id: number;
  node_id: number;
  features: number[];
  t: number;
  deadline_s?: number;
}

export interface LabelAcceptedEvent extends EventBase {
  kind: "label_accepted";
  sample_id: number;
  label: ClassLabel | null;
  skipped: boolean;
  classes: ClassLabel[];
}

export interface WindowRolledEvent extends EventBase {
  kind: "window_rolled";
  t: number;
  b: number;
}

export interface EvalPointEvent extends EventBase {
  kind: "eval_point";
  t: number;
  accuracy: number;
}

export interface EndOfStreamEvent extends EventBase {
  kind: "end_of_stream";
  t: number;
}

export type SessionEvent =
  | SampleProcessedEvent
  | QueryRequestedEvent
  | LabelAcceptedEvent
  | WindowRolledEvent
  | EvalPointEvent
  | EndOfStreamEvent;

export interface SessionCreateRequest {
  config?: Record<string, unknown>;
  data?: Record<string, unknown>;
  oracle?: "human" | "dataset";
  eval_interval?: number;
  query_deadline_s?: number;
}
