/** DOM controller: one session, one event feed, one render loop.
 *
 * Everything runs on the page's event loop: the NDJSON reader feeds the
 * store, the store's version number marks the view dirty, and a single
 * requestAnimationFrame loop repaints and (throttled) refreshes the
 * snapshot. The query panel is visible exactly while the store holds an
 * unresolved prompt; answers go through the HTTP client, and a 409
 * (stale/absent prompt) triggers a state refresh instead of a retry.
 */

import { ApiClient, ApiError } from "./api.js";
import { EventReader } from "./events.js";
import { SessionStore } from "./store.js";
import { colorForClass, drawAccuracyChart, drawGraph } from "./render.js";
import type { ClassLabel, SessionState, Snapshot } from "./types.js";

const SNAPSHOT_MIN_INTERVAL_MS = 400;

function el<T extends HTMLElement>(doc: Document, id: string): T {
  const node = doc.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class UiController {
  private api: ApiClient | null = null;
  private reader: EventReader | null = null;
  private store = new SessionStore();
  private sessionId = "";
  private state: SessionState | null = null;
  private snapshot: Snapshot | null = null;
  private snapshotVersion = -1;
  private snapshotFetchedAt = 0;
  private snapshotInFlight = false;
  private renderedVersion = -1;
  private renderedPending: number | null = null;
  private playing = false;
  private deadlineNudged = false;

  constructor(private readonly doc: Document) {}

  wire(): void {
    const d = this.doc;
    el<HTMLButtonElement>(d, "connect-btn").addEventListener("click", () => {
      void this.connect();
    });
    el<HTMLButtonElement>(d, "play-btn").addEventListener("click", () => {
      void this.togglePlay();
    });
    el<HTMLButtonElement>(d, "step-btn").addEventListener("click", () => {
      void this.step();
    });
    el<HTMLInputElement>(d, "rate-slider").addEventListener("input", () => {
      this.updateRateLabel();
      if (this.playing) void this.applyPacing(this.sliderRate());
    });
    el<HTMLButtonElement>(d, "skip-btn").addEventListener("click", () => {
      void this.answer(null, true);
    });
    el<HTMLButtonElement>(d, "new-class-btn").addEventListener("click", () => {
      const input = el<HTMLInputElement>(d, "new-class-input");
      const name = input.value.trim();
      if (!name) return;
      input.value = "";
      void this.answer(name, false);
    });
    setInterval(() => this.tickCountdown(), 250);
    this.updateRateLabel();
    const loop = () => {
      this.renderIfDirty();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  // -- session lifecycle -------------------------------------------------------

  private async connect(): Promise<void> {
    const d = this.doc;
    this.reader?.stop();
    this.store = new SessionStore();
    this.snapshot = null;
    this.snapshotVersion = -1;
    this.renderedVersion = -1;
    this.renderedPending = null;
    this.playing = false;
    this.state = null;

    const baseUrl = el<HTMLInputElement>(d, "server-url").value.replace(/\/+$/, "");
    this.api = new ApiClient(baseUrl);
    const num = (id: string) => Number(el<HTMLInputElement>(d, id).value);
    try {
      const created = await this.api.createSession({
        config: {
          B: num("cfg-b"),
          W: num("cfg-w"),
          strategy: el<HTMLSelectElement>(d, "cfg-strategy").value,
          seed: num("cfg-seed"),
        },
        data: {
          source: "blobs",
          k: num("data-k"),
          dims: num("data-dims"),
          spread: num("data-spread"),
          n_train: num("data-ntrain"),
          n_test: num("data-ntest"),
          seed: num("cfg-seed"),
        },
        oracle: "human",
        eval_interval: num("eval-interval"),
        query_deadline_s: num("cfg-deadline"),
      });
      this.sessionId = created.id;
      this.state = created.state;
    } catch (err) {
      this.banner(`session create failed: ${String(err)}`, true);
      return;
    }
    this.banner("", false);
    el<HTMLSpanElement>(d, "session-id").textContent = this.sessionId;

    this.reader = new EventReader(baseUrl, this.sessionId, {
      onEvent: (ev) => this.store.apply(ev),
      onStatus: (status, detail) => {
        if (status === "retrying") {
          this.banner(`event feed lost — reconnecting… ${detail ?? ""}`, true);
        } else if (status === "open") {
          this.banner("", false);
        } else if (status === "closed" && this.store.done) {
          this.banner("stream complete", false);
        }
      },
    });
    void this.reader.start();
  }

  private async togglePlay(): Promise<void> {
    if (!this.api || !this.sessionId) return;
    this.playing = !this.playing;
    el<HTMLButtonElement>(this.doc, "play-btn").textContent = this.playing
      ? "pause"
      : "play";
    await this.applyPacing(this.playing ? this.sliderRate() : 0);
  }

  private async applyPacing(rate: number): Promise<void> {
    if (!this.api) return;
    try {
      await this.api.setPacing(this.sessionId, rate);
    } catch (err) {
      this.banner(`pacing failed: ${String(err)}`, true);
    }
  }

  private async step(): Promise<void> {
    if (!this.api || !this.sessionId) return;
    try {
      const res = await this.api.step(this.sessionId, 1);
      this.state = res.state;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.refreshState(); // a query is pending; surface it
      } else {
        this.banner(`step failed: ${String(err)}`, true);
      }
    }
  }

  private async answer(label: ClassLabel | null, skip: boolean): Promise<void> {
    const prompt = this.store.pendingPrompt;
    if (!this.api || !prompt) return;
    try {
      const res = skip
        ? await this.api.skipQuery(this.sessionId, prompt.sampleId)
        : await this.api.submitLabel(this.sessionId, prompt.sampleId, label as ClassLabel);
      this.state = res.state;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Stale or already-resolved prompt: trust the server, re-sync.
        await this.refreshState();
      } else {
        this.banner(`label failed: ${String(err)}`, true);
      }
    }
  }

  private async refreshState(): Promise<void> {
    if (!this.api || !this.sessionId) return;
    try {
      this.state = await this.api.getState(this.sessionId);
    } catch (err) {
      this.banner(`state refresh failed: ${String(err)}`, true);
    }
  }

  // -- rendering ---------------------------------------------------------------

  private sliderRate(): number {
    return Number(el<HTMLInputElement>(this.doc, "rate-slider").value);
  }

  private updateRateLabel(): void {
    el<HTMLSpanElement>(this.doc, "rate-value").textContent =
      `${this.sliderRate()} samples/s`;
  }

  private banner(message: string, warn: boolean): void {
    const b = el<HTMLDivElement>(this.doc, "status-banner");
    b.textContent = message;
    b.style.display = message ? "block" : "none";
    b.className = warn ? "banner warn" : "banner";
  }

  private renderIfDirty(): void {
    const pendingId = this.store.pendingSampleId;
    if (
      this.store.version === this.renderedVersion &&
      pendingId === this.renderedPending
    ) {
      return;
    }
    this.renderedVersion = this.store.version;
    this.renderedPending = pendingId;
    this.maybeFetchSnapshot();
    this.renderHud();
    this.renderQueryPanel();
    this.renderCanvases();
  }

  private maybeFetchSnapshot(): void {
    if (!this.api || !this.sessionId || this.snapshotInFlight) return;
    const now = Date.now();
    const stale = this.store.version !== this.snapshotVersion;
    const throttleOk =
      now - this.snapshotFetchedAt >= SNAPSHOT_MIN_INTERVAL_MS ||
      this.store.pendingSampleId !== null ||
      this.store.done;
    if (!stale || !throttleOk) return;
    this.snapshotInFlight = true;
    const versionAtFetch = this.store.version;
    this.api
      .getSnapshot(this.sessionId)
      .then((snap) => {
        this.snapshot = snap;
        this.snapshotVersion = versionAtFetch;
        this.snapshotFetchedAt = Date.now();
        this.renderedVersion = -1; // repaint with the fresh snapshot
      })
      .catch(() => {
        /* transient; next dirty render retries */
      })
      .finally(() => {
        this.snapshotInFlight = false;
      });
  }

  private renderHud(): void {
    const d = this.doc;
    const s = this.store;
    // Counts mirror the most recent snapshot so the HUD and the drawing
    // can never disagree; live stream position comes from the feed.
    const nodes = this.snapshot ? this.snapshot.nodes.length : s.nNodes;
    const classes = this.snapshot ? this.snapshot.classes : s.classes;
    el<HTMLSpanElement>(d, "hud-t").textContent = String(s.t);
    el<HTMLSpanElement>(d, "hud-total").textContent = String(
      this.state?.total_samples ?? "?",
    );
    el<HTMLSpanElement>(d, "hud-nodes").textContent = String(nodes);
    el<HTMLSpanElement>(d, "hud-classes").textContent = String(classes.length);
    el<HTMLSpanElement>(d, "hud-queries").textContent = String(s.prompts.size);
    el<HTMLSpanElement>(d, "hud-labels").textContent = String(s.labelsSubmitted);
    el<HTMLSpanElement>(d, "hud-feed").textContent =
      s.duplicates === 0 && s.gaps === 0
        ? `seq ${s.lastSeq} ✓`
        : `seq ${s.lastSeq} (dups ${s.duplicates}, gaps ${s.gaps})`;
    el<HTMLSpanElement>(d, "hud-done").textContent = s.done ? "done" : "";

    const legend = el<HTMLDivElement>(d, "classes-legend");
    legend.textContent = "";
    for (const c of classes) {
      const chip = d.createElement("span");
      chip.className = "chip";
      chip.style.background = colorForClass(c, classes);
      chip.textContent = String(c);
      legend.appendChild(chip);
    }
  }

  private renderQueryPanel(): void {
    const d = this.doc;
    const panel = el<HTMLDivElement>(d, "query-panel");
    const prompt = this.store.pendingPrompt;
    if (!prompt || prompt.resolved) {
      panel.style.display = "none";
      this.deadlineNudged = false;
      return;
    }
    panel.style.display = "block";
    el<HTMLSpanElement>(d, "query-info").textContent =
      `sample ${prompt.sampleId} (t=${prompt.t}, node ${prompt.nodeId})`;
    // Only the first two dimensions are drawn; every value is shown here.
    el<HTMLSpanElement>(d, "query-features").textContent = prompt.features
      .map((v, i) => `x${i}=${v.toFixed(4)}`)
      .join("  ");
    const buttons = el<HTMLDivElement>(d, "class-buttons");
    buttons.textContent = "";
    for (const c of this.store.classes) {
      const btn = d.createElement("button");
      btn.textContent = String(c);
      btn.style.borderColor = colorForClass(c, this.store.classes);
      btn.addEventListener("click", () => void this.answer(c, false));
      buttons.appendChild(btn);
    }
  }

  private tickCountdown(): void {
    const remaining = this.store.pendingRemainingS();
    const label = el<HTMLSpanElement>(this.doc, "countdown");
    if (remaining === null) {
      label.textContent = "";
      return;
    }
    label.textContent = `${remaining.toFixed(0)}s left`;
    if (remaining <= 0 && !this.deadlineNudged) {
      // The server resolves expired prompts lazily on its next touch.
      this.deadlineNudged = true;
      void this.refreshState();
    }
  }

  private renderCanvases(): void {
    if (!this.snapshot) return;
    const d = this.doc;
    const graph = el<HTMLCanvasElement>(d, "graph-canvas");
    const gctx = graph.getContext("2d");
    if (gctx) {
      const prompt = this.store.pendingPrompt;
      drawGraph(
        gctx,
        this.snapshot,
        graph.width,
        graph.height,
        prompt && !prompt.resolved ? prompt.nodeId : null,
        prompt && !prompt.resolved ? prompt.features : null,
      );
    }
    const chart = el<HTMLCanvasElement>(d, "chart-canvas");
    const cctx = chart.getContext("2d");
    if (cctx) {
      drawAccuracyChart(
        cctx,
        this.snapshot.accuracy_curve,
        this.store.queryMarks,
        this.state?.total_samples ?? Math.max(1, this.store.t),
        chart.width,
        chart.height,
      );
    }
  }
}

export function wireUi(doc: Document): UiController {
  const controller = new UiController(doc);
  controller.wire();
  return controller;
}
