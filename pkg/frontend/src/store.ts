/** Client-side session state, reduced from the ordered event feed.
 *
 * The store is the single source of truth for what the UI shows between
 * snapshot fetches, and it is also the auditor: every event's sequence
 * number is checked, so duplicated or dropped events (e.g. across a
 * reconnect) surface as nonzero `duplicates`/`gaps` counters instead of
 * silently corrupting the view. Query prompts are tracked per sample id
 * with a surface count, giving exactly-once accounting for the panel.
 */

import type {
  ClassLabel,
  SampleProcessedEvent,
  SessionEvent,
} from "./types.js";

export interface LiveNode {
  id: number;
  pos: number[];
  d: number;
  q: number[];
}

export interface PromptRecord {
  sampleId: number;
  nodeId: number;
  features: number[];
  t: number;
  deadlineS: number | null;
  receivedAtMs: number;
  /** Times this prompt was surfaced by a fresh (non-duplicate) event. */
  timesSeen: number;
  resolved: boolean;
  label: ClassLabel | null;
  skipped: boolean;
}

export class SessionStore {
  // Feed accounting.
  lastSeq = -1;
  duplicates = 0;
  gaps = 0;
  /** Bumped on every applied event; cheap dirty flag for render loops. */
  version = 0;

  // Stream progress.
  t = 0;
  done = false;
  nNodes = 0;
  nClasses = 0;
  classes: ClassLabel[] = [];
  windowRolls = 0;
  lastWindowBudget: number | null = null;
  lastSample: SampleProcessedEvent | null = null;

  // Incremental views.
  nodes = new Map<number, LiveNode>();
  accuracy: Array<[number, number]> = [];
  /** Stream positions where a query fired (marks on the accuracy chart). */
  queryMarks: number[] = [];

  // Query prompts, keyed by sample id.
  prompts = new Map<number, PromptRecord>();
  pendingSampleId: number | null = null;

  private readonly now: () => number;

  constructor(now: () => number = Date.now) {
    this.now = now;
  }

  get pendingPrompt(): PromptRecord | null {
    if (this.pendingSampleId === null) return null;
    return this.prompts.get(this.pendingSampleId) ?? null;
  }

  get labelsSubmitted(): number {
    let n = 0;
    for (const p of this.prompts.values()) if (p.resolved && !p.skipped) n += 1;
    return n;
  }

  apply(ev: SessionEvent): void {
    if (ev.seq <= this.lastSeq) {
      this.duplicates += 1;
      return;
    }
    // seq is dense from 0, so any jump is that many missing events.
    this.gaps += ev.seq - (this.lastSeq + 1);
    this.lastSeq = ev.seq;
    this.version += 1;

    switch (ev.kind) {
      case "sample_processed": {
        this.t = ev.t + 1;
        this.nNodes = ev.n_nodes;
        this.nClasses = ev.n_classes;
        this.lastSample = ev;
        this.nodes.set(ev.node.id, {
          id: ev.node.id,
          pos: ev.node.pos,
          d: ev.node.d,
          q: ev.node.q,
        });
        if (ev.queried) this.queryMarks.push(ev.t);
        break;
      }
      case "query_requested": {
        const existing = this.prompts.get(ev.sample_id);
        if (existing) {
          existing.timesSeen += 1;
        } else {
          this.prompts.set(ev.sample_id, {
            sampleId: ev.sample_id,
            nodeId: ev.node_id,
            features: ev.features,
            t: ev.t,
            deadlineS: ev.deadline_s ?? null,
            receivedAtMs: this.now(),
            timesSeen: 1,
            resolved: false,
            label: null,
            skipped: false,
          });
        }
        this.pendingSampleId = ev.sample_id;
        break;
      }
      case "label_accepted": {
        const prompt = this.prompts.get(ev.sample_id);
        if (prompt) {
          prompt.resolved = true;
          prompt.label = ev.label;
          prompt.skipped = ev.skipped;
        }
        if (this.pendingSampleId === ev.sample_id) this.pendingSampleId = null;
        this.classes = ev.classes;
        this.nClasses = ev.classes.length;
        break;
      }
      case "window_rolled": {
        this.windowRolls += 1;
        this.lastWindowBudget = ev.b;
        break;
      }
      case "eval_point": {
        this.accuracy.push([ev.t, ev.accuracy]);
        break;
      }
      case "end_of_stream": {
        this.done = true;
        this.t = ev.t;
        break;
      }
    }
  }

  /** Seconds left on the pending prompt's deadline, or null if none/untimed. */
  pendingRemainingS(): number | null {
    const p = this.pendingPrompt;
    if (!p || p.deadlineS === null) return null;
    const elapsed = (this.now() - p.receivedAtMs) / 1000;
    return Math.max(0, p.deadlineS - elapsed);
  }
}
