import { describe, expect, it } from "vitest";

import { ConflictError, HttpError, ReviewClient } from "../src/client.js";
import { seededService } from "./fixture.js";

describe("ReviewClient", () => {
  it("lists candidates sorted by probability then id, with contexts", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const page = await client.listCandidates({ status: "pending" });
    expect(page.version).toBe(1);
    expect(page.total).toBe(3);
    expect(page.items.map((i) => i.id)).toEqual(["cand-00000", "cand-00001", "cand-00002"]);
    expect(page.items.map((i) => i.probability)).toEqual([0.9, 0.7, 0.55]);
    const first = page.items[0]!;
    expect(first.head_context.label).toBe("BDNF");
    expect(first.head_context.node_type).toBe("Genes");
    expect(first.tail_context.label).toBe("alzheimer's disease");
    expect(first.tail_context.neighbors.length).toBeGreaterThan(0);
  });

  it("encodes query parameters the service understands", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const page = await client.listCandidates({ minP: 0.6, page: 1, pageSize: 2 });
    expect(page.items.map((i) => i.id)).toEqual(["cand-00000", "cand-00001"]);
    expect(page.total).toBe(2);
    expect(page.page_size).toBe(2);
  });

  it("paginates", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const page2 = await client.listCandidates({ page: 2, pageSize: 2 });
    expect(page2.items.map((i) => i.id)).toEqual(["cand-00002"]);
    expect(page2.total).toBe(3);
  });

  it("rejects an unknown status with a 400", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    await expect(
      client.listCandidates({ status: "bogus" as never }),
    ).rejects.toMatchObject({ status: 400 });
  });

  it("applies a verdict and returns the new version", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const resp = await client.submitVerdict("cand-00000", "accept", 1);
    expect(resp.version).toBe(2);
    expect(resp.candidate.status).toBe("accepted");
    expect(resp.candidate.feedback).toHaveLength(1);
  });

  it("raises ConflictError carrying both versions on a stale write", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    svc.bumpVersion();
    let caught: unknown;
    try {
      await client.submitVerdict("cand-00000", "reject", 1);
    } catch (exc) {
      caught = exc;
    }
    expect(caught).toBeInstanceOf(ConflictError);
    const conflict = caught as ConflictError;
    expect(conflict.submitted).toBe(1);
    expect(conflict.current).toBe(2);
    expect(svc.candidates.get("cand-00000")!.status).toBe("pending");
  });

  it("raises HttpError 404 for an unknown candidate", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    let caught: unknown;
    try {
      await client.submitVerdict("cand-99999", "accept", 1);
    } catch (exc) {
      caught = exc;
    }
    expect(caught).toBeInstanceOf(HttpError);
    expect((caught as HttpError).status).toBe(404);
  });

  it("raises HttpError 400 when the candidate is already decided", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    await client.submitVerdict("cand-00000", "accept", 1);
    await expect(client.submitVerdict("cand-00000", "reject", 2)).rejects.toMatchObject({
      status: 400,
    });
  });

  it("fetches stats", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const stats = await client.stats();
    expect(stats.node_count).toBe(5);
    expect(stats.edge_count).toBe(3);
    expect(stats.status_counts).toEqual({ pending: 3, accepted: 0, rejected: 0, removed: 0 });
    expect(stats.nodes_by_type["Genes"]).toBe(2);
  });

  it("fetches one node's context and 404s on unknown ids", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    const resp = await client.node("D1");
    expect(resp.node.label).toBe("alzheimer's disease");
    expect(resp.node.neighbors.some((n) => n.direction === "in")).toBe(true);
    await expect(client.node("NOPE")).rejects.toMatchObject({ status: 404 });
  });

  it("propagates network failures as rejections", async () => {
    const svc = seededService();
    const client = new ReviewClient({ fetchFn: svc.fetch });
    svc.failNextCount = 1;
    await expect(client.stats()).rejects.toBeInstanceOf(TypeError);
  });

  it("prefixes a base URL", async () => {
    const svc = seededService();
    const seen: string[] = [];
    const client = new ReviewClient({
      baseUrl: "http://reviewer.test/",
      fetchFn: (input, init) => {
        seen.push(input);
        return svc.fetch(input, init);
      },
    });
    await client.stats();
    expect(seen).toEqual(["http://reviewer.test/api/stats"]);
  });
});
