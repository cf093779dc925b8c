/** Review queue state and triage logic, kept free of DOM concerns.

The store owns the pending queue in served order, a session-local tray
of candidates dropped by this reviewer, the latest stats snapshot, and
one selection cursor. Verdicts update the affected row optimistically,
then reconcile against the server response. A version conflict never
discards the verdict: the row keeps it with a conflict marker and the
queue refetches automatically so a retry goes out at the new version.
At most one verdict per candidate is in flight at a time.
*/

import { ConflictError, HttpError, ReviewClient } from "./client.js";
import type { Candidate, CandidateItem, Stats, VerdictKind } from "./types.js";

export const DEFAULT_POLL_INTERVAL_MS = 5000;
const QUEUE_PAGE_SIZE = 200;

export interface ConflictInfo {
  submitted: number;
  current: number;
}

export interface Row {
  candidate: Candidate;
  item: CandidateItem;
  /** Verdict sent but not yet acknowledged; drives the in-flight guard. */
  optimistic: VerdictKind | null;
  /** Verdict retained across a conflict or network failure, awaiting retry. */
  heldVerdict: VerdictKind | null;
  conflict: ConflictInfo | null;
  error: string | null;
}

export interface StatsView {
  data: Stats | null;
  /** True when the last poll failed; previous values stay on display. */
  stale: boolean;
}

export type Listener = () => void;

function makeRow(item: CandidateItem): Row {
  return {
    candidate: item,
    item,
    optimistic: null,
    heldVerdict: null,
    conflict: null,
    error: null,
  };
}

export class ReviewStore {
  readonly client: ReviewClient;
  version = 0;
  queue: Row[] = [];
  tray: Row[] = [];
  decided: Row[] = [];
  stats: StatsView = { data: null, stale: false };
  banner: string | null = null;
  loadError: string | null = null;
  selectedId: string | null = null;

  private listeners: Listener[] = [];
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(client: ReviewClient) {
    this.client = client;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  row(candidateId: string): Row | undefined {
    return this.queue.find((r) => r.candidate.id === candidateId);
  }

  selectedRow(): Row | undefined {
    if (this.selectedId === null) return undefined;
    return this.row(this.selectedId);
  }

  private selectedIndex(): number {
    if (this.selectedId === null) return -1;
    return this.queue.findIndex((r) => r.candidate.id === this.selectedId);
  }

  /** Keep the cursor on a live row, preferring the given index. */
  private resettleSelection(preferredIndex: number): void {
    if (this.queue.length === 0) {
      this.selectedId = null;
      return;
    }
    const idx = Math.min(Math.max(preferredIndex, 0), this.queue.length - 1);
    const row = this.queue[idx];
    this.selectedId = row ? row.candidate.id : null;
  }

  selectNext(): void {
    const idx = this.selectedIndex();
    this.resettleSelection(idx < 0 ? 0 : idx + 1);
    this.emit();
  }

  selectPrev(): void {
    const idx = this.selectedIndex();
    this.resettleSelection(idx <= 0 ? 0 : idx - 1);
    this.emit();
  }

  /** Fetch the pending queue; session markers survive by candidate id. */
  async refresh(): Promise<void> {
    let page;
    try {
      page = await this.client.listCandidates({ status: "pending", pageSize: QUEUE_PAGE_SIZE });
    } catch (exc) {
      this.loadError = describe(exc);
      this.emit();
      return;
    }
    const prior = new Map(this.queue.map((r) => [r.candidate.id, r]));
    const priorIndex = this.selectedIndex();
    this.version = page.version;
    this.loadError = null;
    this.queue = page.items.map((item) => {
      const old = prior.get(item.id);
      const row = makeRow(item);
      if (old) {
        row.heldVerdict = old.heldVerdict;
        row.conflict = old.conflict;
        row.error = old.error;
      }
      return row;
    });
    if (this.selectedId === null || this.row(this.selectedId) === undefined) {
      this.resettleSelection(priorIndex < 0 ? 0 : priorIndex);
    }
    this.emit();
  }

  /** Send one verdict for the row, optimistically marking it first. */
  async submit(candidateId: string, verdict: VerdictKind): Promise<void> {
    const row = this.row(candidateId);
    if (row === undefined) return;
    if (row.optimistic !== null) return; // one in-flight verdict per candidate
    row.optimistic = verdict;
    row.heldVerdict = verdict;
    row.conflict = null;
    row.error = null;
    this.emit();
    try {
      const resp = await this.client.submitVerdict(candidateId, verdict, this.version);
      this.version = resp.version;
      this.reconcile(row, resp.candidate);
    } catch (exc) {
      row.optimistic = null;
      if (exc instanceof ConflictError) {
        row.conflict = { submitted: exc.submitted, current: exc.current };
        this.banner = "queue changed on the server; refetched";
        this.emit();
        await this.refresh();
        return;
      }
      if (exc instanceof HttpError) {
        // decided elsewhere or rejected outright; the refetch resolves it
        row.heldVerdict = null;
        row.error = describe(exc);
        this.emit();
        await this.refresh();
        return;
      }
      row.error = describe(exc); // network failure: verdict held for retry
      this.emit();
    }
  }

  /** Resend the verdict a conflict or outage left on the row. */
  async retry(candidateId: string): Promise<void> {
    const row = this.row(candidateId);
    if (row === undefined || row.heldVerdict === null) return;
    await this.submit(candidateId, row.heldVerdict);
  }

  private reconcile(row: Row, candidate: Candidate): void {
    row.optimistic = null;
    row.heldVerdict = null;
    row.conflict = null;
    row.error = null;
    row.candidate = candidate;
    if (candidate.status === "pending") {
      this.emit();
      return;
    }
    const idx = this.queue.indexOf(row);
    if (idx >= 0) this.queue.splice(idx, 1);
    if (candidate.status === "accepted") {
      this.decided.push(row);
    } else {
      this.tray.push(row); // rejected or removed this session
    }
    if (this.selectedId === row.candidate.id) {
      this.resettleSelection(idx);
    }
    this.emit();
  }

  /** Push the row to the back of the queue; no request is made. */
  skip(candidateId: string): void {
    const idx = this.queue.findIndex((r) => r.candidate.id === candidateId);
    if (idx < 0) return;
    const [row] = this.queue.splice(idx, 1);
    if (row === undefined) return;
    this.queue.push(row);
    if (this.selectedId === row.candidate.id) {
      this.resettleSelection(idx);
    }
    this.emit();
  }

  dismissBanner(): void {
    this.banner = null;
    this.emit();
  }

  async pollStatsOnce(): Promise<void> {
    try {
      const data = await this.client.stats();
      this.stats = { data, stale: false };
    } catch {
      this.stats = { data: this.stats.data, stale: true };
    }
    this.emit();
  }

  startPolling(intervalMs: number = DEFAULT_POLL_INTERVAL_MS): void {
    this.stopPolling();
    this.pollTimer = setInterval(() => {
      void this.pollStatsOnce();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }
}

function describe(exc: unknown): string {
  if (exc instanceof Error) return exc.message;
  return String(exc);
}
