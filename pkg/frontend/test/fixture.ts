/** In-process stand-in for the review service.

Implements the same HTTP+JSON contract the page talks to in
production, exposed as a fetch-compatible function, plus knobs tests
need: simulate another writer bumping the version, drop requests to
fake an outage, and gate verdict handling to observe optimistic state.

Verdict semantics mirror the service: rejection subtracts deltaP
(clamped at 0, rounded to 12 places), a probability strictly below
tauAccept drops the candidate ("removed" if its triple was already
integrated, "rejected" otherwise), acceptance is terminal, and every
applied verdict bumps the session version.
*/

import type { FetchLike, ResponseLike } from "../src/client.js";
import type {
  Candidate,
  CandidateItem,
  CandidateStatus,
  Neighbor,
  NodeContext,
  Stats,
  VerdictKind,
} from "../src/types.js";

const STATUSES: CandidateStatus[] = ["pending", "accepted", "rejected", "removed"];
const MAX_PAGE_SIZE = 200;
const NEIGHBOR_CAP = 8;

interface FixtureNode {
  id: string;
  label: string;
  node_type: string;
}

interface FixtureEdge {
  head: string;
  relation: string;
  tail: string;
}

function round12(x: number): number {
  return Math.round(x * 1e12) / 1e12;
}

// plain object, not a stream-backed Response: replies settle in pure
// microtasks, so tests stay deterministic under fake timers
function json(status: number, body: unknown): ResponseLike {
  const text = JSON.stringify(body);
  return {
    ok: status >= 200 && status < 300,
    status,
    text: async () => text,
  };
}

export class FixtureService {
  version = 1;
  iteration = 1;
  tauAccept = 0.5;
  deltaP = 0.2;
  nodes = new Map<string, FixtureNode>();
  edges: FixtureEdge[] = [];
  candidates = new Map<string, Candidate>();

  /** Every request seen, for asserting the page writes nothing extra. */
  requests: { method: string; path: string }[] = [];
  /** While positive, requests reject the way a dead network does. */
  failNextCount = 0;
  /** When set, verdict handling awaits it; lets tests freeze in-flight state. */
  verdictGate: Promise<void> | null = null;

  fetch: FetchLike = (input, init) => this.handle(input, init);

  /** Pretend another writer advanced the session. */
  bumpVersion(): void {
    this.version += 1;
  }

  addNode(id: string, label: string, nodeType: string): void {
    this.nodes.set(id, { id, label, node_type: nodeType });
  }

  addEdge(head: string, relation: string, tail: string): void {
    this.edges.push({ head, relation, tail });
  }

  addCandidate(cand: Candidate): void {
    this.candidates.set(cand.id, cand);
  }

  private async handle(input: string, init?: RequestInit): Promise<ResponseLike> {
    const url = new URL(input, "http://fixture.test");
    const method = (init?.method ?? "GET").toUpperCase();
    this.requests.push({ method, path: url.pathname });
    if (this.failNextCount > 0) {
      this.failNextCount -= 1;
      throw new TypeError("fetch failed");
    }

    if (method === "GET" && url.pathname === "/api/candidates") {
      return this.listCandidates(url.searchParams);
    }
    const verdictMatch = url.pathname.match(/^\/api\/candidates\/([^/]+)\/verdict$/);
    if (method === "POST" && verdictMatch !== null) {
      if (this.verdictGate !== null) await this.verdictGate;
      return this.submitVerdict(decodeURIComponent(verdictMatch[1] ?? ""), init?.body);
    }
    if (method === "GET" && url.pathname === "/api/stats") {
      return json(200, this.stats());
    }
    const nodeMatch = url.pathname.match(/^\/api\/graph\/nodes\/([^/]+)$/);
    if (method === "GET" && nodeMatch !== null) {
      const nodeId = decodeURIComponent(nodeMatch[1] ?? "");
      if (!this.nodes.has(nodeId)) {
        return json(404, { detail: `unknown node '${nodeId}'` });
      }
      return json(200, { version: this.version, node: this.nodeContext(nodeId) });
    }
    return json(404, { detail: "not found" });
  }

  private listCandidates(params: URLSearchParams): ResponseLike {
    const status = params.get("status");
    if (status !== null && !STATUSES.includes(status as CandidateStatus)) {
      return json(400, { detail: `unknown status '${status}'` });
    }
    const minPRaw = params.get("min_p");
    const pageRaw = params.get("page");
    const sizeRaw = params.get("page_size");
    const minP = minPRaw === null ? null : Number(minPRaw);
    const page = pageRaw === null ? 1 : Number(pageRaw);
    const pageSize = sizeRaw === null ? 50 : Number(sizeRaw);
    if (minP !== null && (!Number.isFinite(minP) || minP < 0 || minP > 1)) {
      return json(422, { detail: [{ loc: ["query", "min_p"], msg: "invalid" }] });
    }
    if (!Number.isInteger(page) || page < 1) {
      return json(422, { detail: [{ loc: ["query", "page"], msg: "invalid" }] });
    }
    if (!Number.isInteger(pageSize) || pageSize < 1 || pageSize > MAX_PAGE_SIZE) {
      return json(422, { detail: [{ loc: ["query", "page_size"], msg: "invalid" }] });
    }

    let items = [...this.candidates.values()];
    if (status !== null) items = items.filter((c) => c.status === status);
    if (minP !== null) items = items.filter((c) => c.probability >= minP);
    items.sort((a, b) => b.probability - a.probability || (a.id < b.id ? -1 : 1));
    const total = items.length;
    const start = (page - 1) * pageSize;
    const out: CandidateItem[] = items.slice(start, start + pageSize).map((c) => ({
      ...structuredClone(c),
      head_context: this.nodeContext(c.head),
      tail_context: this.nodeContext(c.tail),
    }));
    return json(200, {
      version: this.version,
      total,
      page,
      page_size: pageSize,
      items: out,
    });
  }

  private submitVerdict(candidateId: string, rawBody: BodyInit | null | undefined): ResponseLike {
    let body: { verdict?: unknown; version?: unknown; reviewer?: unknown };
    try {
      body = JSON.parse(String(rawBody ?? ""));
    } catch {
      return json(422, { detail: [{ loc: ["body"], msg: "invalid JSON" }] });
    }
    const { verdict, version } = body;
    if (typeof verdict !== "string" || typeof version !== "number") {
      return json(422, { detail: [{ loc: ["body"], msg: "invalid fields" }] });
    }
    if (version !== this.version) {
      return json(409, { detail: { submitted: version, current: this.version } });
    }
    const cand = this.candidates.get(candidateId);
    if (cand === undefined) {
      return json(404, { detail: `unknown candidate '${candidateId}'` });
    }
    if (cand.status !== "pending") {
      return json(400, { detail: `candidate ${candidateId} is ${cand.status}` });
    }
    if (verdict !== "accept" && verdict !== "reject") {
      return json(400, { detail: `unknown verdict '${verdict}'` });
    }
    this.applyVerdict(cand, verdict);
    this.version += 1;
    return json(200, { version: this.version, candidate: structuredClone(cand) });
  }

  private applyVerdict(cand: Candidate, verdict: VerdictKind): void {
    const ts = 1_000_000 + cand.feedback.length;
    if (verdict === "accept") {
      cand.status = "accepted";
      cand.feedback.push({ verdict, delta: 0, probability_after: cand.probability, timestamp: ts });
      return;
    }
    cand.probability = round12(Math.max(0, cand.probability - this.deltaP));
    cand.feedback.push({
      verdict,
      delta: this.deltaP,
      probability_after: cand.probability,
      timestamp: ts,
    });
    if (cand.probability < this.tauAccept) {
      cand.status = cand.integrated_at !== null ? "removed" : "rejected";
    }
  }

  private nodeContext(nodeId: string): NodeContext {
    const node = this.nodes.get(nodeId);
    if (node === undefined) throw new Error(`fixture has no node ${nodeId}`);
    const neighbors: Neighbor[] = [];
    for (const e of this.edges) {
      if (neighbors.length >= NEIGHBOR_CAP) break;
      if (e.head === nodeId) {
        const tail = this.nodes.get(e.tail);
        if (tail) {
          neighbors.push({ id: e.tail, label: tail.label, relation: e.relation, direction: "out" });
        }
      } else if (e.tail === nodeId) {
        const head = this.nodes.get(e.head);
        if (head) {
          neighbors.push({ id: e.head, label: head.label, relation: e.relation, direction: "in" });
        }
      }
    }
    return { id: node.id, label: node.label, node_type: node.node_type, neighbors };
  }

  private stats(): Stats {
    const nodesByType: Record<string, number> = {};
    for (const n of this.nodes.values()) {
      nodesByType[n.node_type] = (nodesByType[n.node_type] ?? 0) + 1;
    }
    const edgesByRelation: Record<string, number> = {};
    for (const e of this.edges) {
      edgesByRelation[e.relation] = (edgesByRelation[e.relation] ?? 0) + 1;
    }
    const statusCounts: Record<CandidateStatus, number> = {
      pending: 0,
      accepted: 0,
      rejected: 0,
      removed: 0,
    };
    for (const c of this.candidates.values()) statusCounts[c.status] += 1;
    return {
      version: this.version,
      iteration: this.iteration,
      node_count: this.nodes.size,
      edge_count: this.edges.length,
      nodes_by_type: nodesByType,
      edges_by_relation: edgesByRelation,
      status_counts: statusCounts,
    };
  }
}

function pendingCandidate(
  id: string,
  head: string,
  relation: string,
  tail: string,
  probability: number,
  integratedAt: number | null = null,
): Candidate {
  return {
    id,
    head,
    relation,
    tail,
    probability,
    status: "pending",
    iteration_born: 1,
    integrated_at: integratedAt,
    feedback: [],
  };
}

/** Standard session: five nodes, three edges, three pending candidates.
 *
 * Served order is (-probability, id): cand-00000 at 0.9, cand-00001 at
 * 0.7 (already integrated, so dropping it reads "removed"), cand-00002
 * at 0.55. With deltaP 0.2 and tauAccept 0.5, cand-00001 survives one
 * rejection at exactly 0.5 and drops on the second at 0.3.
 */
export function seededService(): FixtureService {
  const svc = new FixtureService();
  svc.addNode("G1", "BDNF", "Genes");
  svc.addNode("G2", "APOE", "Genes");
  svc.addNode("D1", "alzheimer's disease", "Diseases");
  svc.addNode("C1", "working memory", "CognitiveProcesses");
  svc.addNode("P1", "synaptic signaling", "BiologicalPathways");
  svc.addEdge("G1", "Regulates", "P1");
  svc.addEdge("G2", "Causes", "D1");
  svc.addEdge("C1", "LinkedTo", "D1");
  svc.addCandidate(pendingCandidate("cand-00000", "G1", "AssociatedWith", "D1", 0.9));
  svc.addCandidate(pendingCandidate("cand-00001", "C1", "LinkedTo", "D1", 0.7, 1));
  svc.addCandidate(pendingCandidate("cand-00002", "G1", "InvolvedIn", "P1", 0.55));
  return svc;
}
