/** Typed REST client for the review service.

The only write it ever issues is the verdict POST; everything else is
a read. A stale-version write surfaces as ConflictError carrying both
versions so the caller can refetch and retry deliberately.
*/

import type {
  CandidatePage,
  CandidateStatus,
  NodeResponse,
  Stats,
  VerdictKind,
  VerdictResponse,
} from "./types.js";

/** The slice of a fetch Response the client relies on. */
export interface ResponseLike {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<ResponseLike>;

export class HttpError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`HTTP ${status}: ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
    this.name = "HttpError";
    this.status = status;
    this.detail = detail;
  }
}

export class ConflictError extends HttpError {
  readonly submitted: number;
  readonly current: number;

  constructor(submitted: number, current: number) {
    super(409, { submitted, current });
    this.name = "ConflictError";
    this.submitted = submitted;
    this.current = current;
  }
}

export interface ListParams {
  status?: CandidateStatus;
  minP?: number;
  page?: number;
  pageSize?: number;
}

export interface ClientOptions {
  baseUrl?: string;
  fetchFn?: FetchLike;
}

async function parseBody(resp: ResponseLike): Promise<unknown> {
  const text = await resp.text();
  if (text === "") return null;
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

function detailOf(body: unknown): unknown {
  if (body !== null && typeof body === "object" && "detail" in body) {
    return (body as { detail: unknown }).detail;
  }
  return body;
}

export class ReviewClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    // wrap: calling a bare reference to the global fetch throws
    this.fetchFn = options.fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const body = await parseBody(resp);
    if (resp.ok) return body;
    const detail = detailOf(body);
    if (resp.status === 409 && detail !== null && typeof detail === "object") {
      const d = detail as { submitted?: number; current?: number };
      if (typeof d.submitted === "number" && typeof d.current === "number") {
        throw new ConflictError(d.submitted, d.current);
      }
    }
    throw new HttpError(resp.status, detail);
  }

  async listCandidates(params: ListParams = {}): Promise<CandidatePage> {
    const q = new URLSearchParams();
    if (params.status !== undefined) q.set("status", params.status);
    if (params.minP !== undefined) q.set("min_p", String(params.minP));
    if (params.page !== undefined) q.set("page", String(params.page));
    if (params.pageSize !== undefined) q.set("page_size", String(params.pageSize));
    const query = q.toString();
    const suffix = query === "" ? "" : `?${query}`;
    return (await this.request(`/api/candidates${suffix}`)) as CandidatePage;
  }

  async submitVerdict(
    candidateId: string,
    verdict: VerdictKind,
    version: number,
    reviewer = "",
  ): Promise<VerdictResponse> {
    const body = JSON.stringify({ verdict, version, reviewer });
    return (await this.request(`/api/candidates/${encodeURIComponent(candidateId)}/verdict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    })) as VerdictResponse;
  }

  async stats(): Promise<Stats> {
    return (await this.request("/api/stats")) as Stats;
  }

  async node(nodeId: string): Promise<NodeResponse> {
    return (await this.request(`/api/graph/nodes/${encodeURIComponent(nodeId)}`)) as NodeResponse;
  }
}
