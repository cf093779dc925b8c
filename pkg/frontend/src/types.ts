/** JSON shapes exchanged with the review service. */

export type VerdictKind = "accept" | "reject";

export type CandidateStatus = "pending" | "accepted" | "rejected" | "removed";

export interface FeedbackEntry {
  verdict: VerdictKind;
  delta: number;
  probability_after: number;
  timestamp: number;
}

export interface Candidate {
  id: string;
  head: string;
  relation: string;
  tail: string;
  probability: number;
  status: CandidateStatus;
  iteration_born: number;
  integrated_at: number | null;
  feedback: FeedbackEntry[];
}

export interface Neighbor {
  id: string;
  label: string;
  relation: string;
  direction: "in" | "out";
}

export interface NodeContext {
  id: string;
  label: string;
  node_type: string;
  neighbors: Neighbor[];
}

/** One queue item as served: the candidate plus resolved endpoint context. */
export interface CandidateItem extends Candidate {
  head_context: NodeContext;
  tail_context: NodeContext;
}

export interface CandidatePage {
  version: number;
  total: number;
  page: number;
  page_size: number;
  items: CandidateItem[];
}

export interface VerdictResponse {
  version: number;
  candidate: Candidate;
}

export interface Stats {
  version: number;
  iteration: number;
  node_count: number;
  edge_count: number;
  nodes_by_type: Record<string, number>;
  edges_by_relation: Record<string, number>;
  status_counts: Record<CandidateStatus, number>;
}

export interface NodeResponse {
  version: number;
  node: NodeContext;
}
