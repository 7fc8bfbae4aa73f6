import { describe, expect, it } from "vitest";

import { SessionStore } from "../src/store.js";
import type {
  EvalPointEvent,
  LabelAcceptedEvent,
  QueryRequestedEvent,
  SampleProcessedEvent,
  SessionEvent,
  WindowRolledEvent,
} from "../src/types.js";

let seqCounter = 0;

function sample(t: number, over: Partial<SampleProcessedEvent> = {}): SampleProcessedEvent {
  return {
    v: 1,
    seq: seqCounter++,
    kind: "sample_processed",
    t,
    winner: 0,
    y_hat: "unlabeled",
    u_e: 1,
    u_a: 1,
    u_t: 1,
    s_t: 0.01,
    queried: false,
    n_nodes: 1,
    n_classes: 0,
    node: { id: 0, pos: [0.5, 0.5], d: 0, q: [] },
    ...over,
  };
}

function query(sampleId: number, t: number): QueryRequestedEvent {
  return {
    v: 1,
    seq: seqCounter++,
    kind: "query_requested",
    sample_id: sampleId,
    node_id: 2,
    features: [0.1, 0.9, 0.4],
    t,
    deadline_s: 60,
  };
}

function accepted(
  sampleId: number,
  label: string | number | null,
  classes: Array<string | number>,
  skipped = false,
): LabelAcceptedEvent {
  return {
    v: 1,
    seq: seqCounter++,
    kind: "label_accepted",
    sample_id: sampleId,
    label,
    skipped,
    classes,
  };
}

describe("SessionStore event reduction", () => {
  it("tracks stream position, node map and counts from sample events", () => {
    seqCounter = 0;
    const store = new SessionStore();
    store.apply(sample(0, { n_nodes: 1, node: { id: 0, pos: [0.2, 0.3], d: 0, q: [] } }));
    store.apply(sample(1, { n_nodes: 2, node: { id: 1, pos: [0.8, 0.7], d: 1, q: [] } }));
    store.apply(sample(2, { n_nodes: 2, node: { id: 0, pos: [0.25, 0.3], d: 2, q: [] } }));

    expect(store.t).toBe(3);
    expect(store.nNodes).toBe(2);
    expect(store.nodes.size).toBe(2);
    expect(store.nodes.get(0)?.d).toBe(2); // latest update wins
    expect(store.duplicates).toBe(0);
    expect(store.gaps).toBe(0);
    expect(store.lastSeq).toBe(2);
  });

  it("runs the prompt lifecycle: pending while unresolved, then resolved", () => {
    seqCounter = 0;
    const store = new SessionStore(() => 1000);
    store.apply(sample(0));
    expect(store.pendingPrompt).toBeNull();

    store.apply(query(7, 1));
    const pending = store.pendingPrompt;
    expect(pending).not.toBeNull();
    expect(pending!.sampleId).toBe(7);
    expect(pending!.features).toEqual([0.1, 0.9, 0.4]);
    expect(pending!.timesSeen).toBe(1);

    store.apply(accepted(7, "cat", ["cat"]));
    expect(store.pendingPrompt).toBeNull();
    expect(store.prompts.get(7)!.resolved).toBe(true);
    expect(store.prompts.get(7)!.label).toBe("cat");
    expect(store.classes).toEqual(["cat"]);
    expect(store.nClasses).toBe(1);
    expect(store.labelsSubmitted).toBe(1);
  });

  it("grows the class set when a label names a brand-new class", () => {
    seqCounter = 0;
    const store = new SessionStore();
    store.apply(query(3, 5));
    store.apply(accepted(3, 0, [0]));
    store.apply(query(9, 11));
    store.apply(accepted(9, "zebra", [0, "zebra"]));
    expect(store.classes).toEqual([0, "zebra"]);
    expect(store.nClasses).toBe(2);
  });

  it("records skips without counting them as labels", () => {
    seqCounter = 0;
    const store = new SessionStore();
    store.apply(query(4, 2));
    store.apply(accepted(4, null, [], true));
    expect(store.prompts.get(4)!.skipped).toBe(true);
    expect(store.labelsSubmitted).toBe(0);
    expect(store.pendingPrompt).toBeNull();
  });

  it("counts duplicate sequence numbers without reapplying them", () => {
    seqCounter = 0;
    const store = new SessionStore();
    const q = query(5, 1);
    store.apply(q);
    store.apply(q); // replayed event, same seq
    store.apply({ ...q }); // and again
    expect(store.duplicates).toBe(2);
    expect(store.prompts.get(5)!.timesSeen).toBe(1); // surfaced exactly once
  });

  it("counts gaps in the sequence, including a missed head", () => {
    seqCounter = 0;
    const fresh = new SessionStore();
    const a = sample(0);
    seqCounter = 4; // events 1..3 never arrive
    const b = sample(1);
    fresh.apply(a);
    fresh.apply(b);
    expect(fresh.gaps).toBe(3);

    const missedHead = new SessionStore();
    seqCounter = 2;
    missedHead.apply(sample(0));
    expect(missedHead.gaps).toBe(2); // seq 0 and 1 were never seen
  });

  it("collects eval points, window rolls and query marks for the chart", () => {
    seqCounter = 0;
    const store = new SessionStore();
    store.apply(sample(0, { queried: true }));
    const roll: WindowRolledEvent = { v: 1, seq: seqCounter++, kind: "window_rolled", t: 49, b: 1 };
    store.apply(roll);
    const ev: EvalPointEvent = { v: 1, seq: seqCounter++, kind: "eval_point", t: 500, accuracy: 0.82 };
    store.apply(ev);
    const end: SessionEvent = { v: 1, seq: seqCounter++, kind: "end_of_stream", t: 1200 };
    store.apply(end);

    expect(store.queryMarks).toEqual([0]);
    expect(store.windowRolls).toBe(1);
    expect(store.lastWindowBudget).toBe(1);
    expect(store.accuracy).toEqual([[500, 0.82]]);
    expect(store.done).toBe(true);
    expect(store.t).toBe(1200);
  });

  it("reports the remaining deadline from the prompt's receipt time", () => {
    seqCounter = 0;
    let nowMs = 10_000;
    const store = new SessionStore(() => nowMs);
    store.apply(query(1, 0)); // deadline_s = 60, received at t=10s
    nowMs = 25_000;
    expect(store.pendingRemainingS()).toBeCloseTo(45, 6);
    nowMs = 200_000;
    expect(store.pendingRemainingS()).toBe(0); // clamped, never negative
  });
});
