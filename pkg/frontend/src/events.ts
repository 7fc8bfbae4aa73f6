/** Resumable NDJSON event feed.
 *
 * One reader per session. It fetches `/events?since=<lastSeq>&follow=true`,
 * parses newline-delimited JSON incrementally, and forwards every event in
 * order. On any interruption it reconnects from the last sequence number it
 * delivered, so a correct server never duplicates or drops an event across
 * reconnects. The reader is transport only; ordering/duplicate accounting
 * lives in the store so violations are observable rather than masked.
 */

import type { FetchLike } from "./api.js";
import type { SessionEvent } from "./types.js";

export type ReaderStatus = "idle" | "connecting" | "open" | "retrying" | "closed";

export interface EventReaderOptions {
  onEvent: (ev: SessionEvent) => void;
  onStatus?: (status: ReaderStatus, detail?: string) => void;
  fetchFn?: FetchLike;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class EventReader {
  /** Highest sequence number delivered so far; -1 before the first event. */
  lastSeq = -1;
  /** Lines that failed to parse as JSON (skipped, never re-requested). */
  parseErrors = 0;
  /** How many times the reader (re)opened the feed. */
  connects = 0;
  status: ReaderStatus = "idle";

  private readonly onEvent: (ev: SessionEvent) => void;
  private readonly onStatus?: (status: ReaderStatus, detail?: string) => void;
  private readonly fetchFn: FetchLike;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private controller: AbortController | null = null;
  private stopped = false;
  private finished = false;
  private reconnectRequested = false;
  private loop: Promise<void> | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    options: EventReaderOptions,
  ) {
    this.onEvent = options.onEvent;
    this.onStatus = options.onStatus;
    this.fetchFn = options.fetchFn ?? fetch;
    this.initialBackoffMs = options.initialBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 10_000;
  }

  /** Begin (or resume) consuming; returns a promise that settles when closed. */
  start(): Promise<void> {
    if (!this.loop) {
      this.stopped = false;
      this.loop = this.runLoop();
    }
    return this.loop;
  }

  /** Permanently stop; no further events or reconnects. */
  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  /** Drop the current connection; the loop resumes from lastSeq at once. */
  forceReconnect(): void {
    if (this.stopped || this.finished) return;
    this.reconnectRequested = true;
    this.controller?.abort();
  }

  get isFinished(): boolean {
    return this.finished;
  }

  private setStatus(status: ReaderStatus, detail?: string): void {
    this.status = status;
    this.onStatus?.(status, detail);
  }

  private async runLoop(): Promise<void> {
    let backoff = this.initialBackoffMs;
    while (!this.stopped && !this.finished) {
      this.setStatus(this.connects === 0 ? "connecting" : "retrying");
      this.controller = new AbortController();
      const url =
        `${this.baseUrl}/sessions/${this.sessionId}/events` +
        `?since=${this.lastSeq}&follow=true`;
      try {
        const res = await this.fetchFn(url, { signal: this.controller.signal });
        if (!res.ok) {
          throw new Error(`events feed: HTTP ${res.status}`);
        }
        if (!res.body) {
          throw new Error("events feed: response has no body");
        }
        this.connects += 1;
        backoff = this.initialBackoffMs;
        this.setStatus("open");
        await this.consume(res.body);
        if (this.finished || this.stopped) break;
        // Server closed a follow stream before end_of_stream: transient;
        // fall through to the reconnect delay below.
        throw new Error("events feed: stream closed early");
      } catch (err) {
        if (this.stopped) break;
        if (this.reconnectRequested) {
          this.reconnectRequested = false;
          continue; // deliberate drop: resume immediately, no backoff
        }
        this.setStatus("retrying", err instanceof Error ? err.message : String(err));
        await sleep(backoff);
        backoff = Math.min(backoff * 2, this.maxBackoffMs);
      }
    }
    this.setStatus("closed");
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let nl: number;
        while ((nl = buffer.indexOf("\n")) >= 0) {
          const line = buffer.slice(0, nl);
          buffer = buffer.slice(nl + 1);
          this.handleLine(line);
        }
      }
      buffer += decoder.decode();
      this.handleLine(buffer);
    } finally {
      reader.releaseLock();
    }
  }

  private handleLine(line: string): void {
    const trimmed = line.trim();
    if (!trimmed) return;
    let ev: SessionEvent;
    try {
      ev = JSON.parse(trimmed) as SessionEvent;
    } catch {
      this.parseErrors += 1;
      return;
    }
    if (typeof ev.seq !== "number" || typeof ev.kind !== "string") {
      this.parseErrors += 1;
      return;
    }
    if (ev.seq > this.lastSeq) this.lastSeq = ev.seq;
    if (ev.kind === "end_of_stream") this.finished = true;
    this.onEvent(ev);
  }
}
