"""Review session and HTTP endpoint behavior."""
import itertools
import json

import pytest
from fastapi.testclient import TestClient

from kgfuse.errors import ParseError, VersionConflictError
from kgfuse.expand import CandidateEdge, ExpansionState
from kgfuse.graph import KnowledgeGraph, Triple
from kgfuse.service import ReviewSession, create_app, replay_log

from util import mk_node


def fixture_state() -> ExpansionState:
    g = KnowledgeGraph(name="m")
    g.add_node(mk_node("X", "tau kinase", "Genes"))
    g.add_node(mk_node("Y", "memory disorder", "Diseases"))
    g.add_node(mk_node("Z", "working memory", "CognitiveProcesses"))
    g.add_triple(Triple("X", "Causes", "Y", provenance="source:m"))
    cands = {
        "cand-00000": CandidateEdge("cand-00000", "X", "Influences", "Z", 0.9),
        "cand-00001": CandidateEdge("cand-00001", "Y", "AssociatedWith", "Z", 0.7),
        "cand-00002": CandidateEdge("cand-00002", "Z", "LinkedTo", "X", 0.6),
    }
    return ExpansionState(
        graph=g,
        tau_accept=0.5,
        delta_p=0.2,
        auto_accept=False,
        candidates=cands,
        proposed_keys={c.key() for c in cands.values()},
    )


def make_session(tmp_path=None, log_name="verdicts.jsonl"):
    log = None if tmp_path is None else tmp_path / log_name
    ticker = itertools.count(1000)
    return ReviewSession(fixture_state(), log_path=log, clock=lambda: float(next(ticker)))


@pytest.fixture
def client():
    return TestClient(create_app(make_session()))


# ---------------------------------------------------------------------------
# session core


def test_submit_verdict_bumps_version_and_applies_decay(tmp_path):
    session = make_session(tmp_path)
    cand, version = session.submit_verdict("cand-00001", "reject", version=1)
    assert version == 2
    assert cand.probability == pytest.approx(0.5)
    assert cand.status == "pending"


def test_stale_version_conflicts(tmp_path):
    session = make_session(tmp_path)
    session.submit_verdict("cand-00000", "accept", version=1)
    with pytest.raises(VersionConflictError) as exc:
        session.submit_verdict("cand-00001", "reject", version=1)
    assert exc.value.submitted == 1
    assert exc.value.current == 2


def test_failed_verdict_does_not_bump_version(tmp_path):
    session = make_session(tmp_path)
    with pytest.raises(KeyError):
        session.submit_verdict("cand-99999", "accept", version=1)
    assert session.version == 1
    log = tmp_path / "verdicts.jsonl"
    assert not log.exists() or log.read_text(encoding="utf-8") == ""


def test_advance_runs_expansion_step(tmp_path):
    session = make_session(tmp_path)
    session.submit_verdict("cand-00000", "accept", version=1)
    before = session.state.graph.edge_count
    version = session.advance()
    assert version == 3
    assert session.state.graph.edge_count == before + 1
    assert session.state.graph.has_triple("X", "Influences", "Z")


def test_replay_reproduces_candidate_states(tmp_path):
    session = make_session(tmp_path)
    session.submit_verdict("cand-00001", "reject", version=1)
    session.submit_verdict("cand-00000", "accept", version=2)
    session.advance()
    session.submit_verdict("cand-00001", "reject", version=4)

    replayed = replay_log(fixture_state(), tmp_path / "verdicts.jsonl")
    assert replayed.version == session.version
    assert replayed.state.iteration == session.state.iteration
    assert replayed.state.graph == session.state.graph
    for cid, cand in session.state.candidates.items():
        twin = replayed.state.candidates[cid]
        assert twin.to_dict() == cand.to_dict()


def test_replay_rejects_bad_records(tmp_path):
    log = tmp_path / "log.jsonl"
    log.write_text('{"kind": "nope"}\n', encoding="utf-8")
    with pytest.raises(ParseError):
        replay_log(fixture_state(), log)
    log.write_text("not json\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        replay_log(fixture_state(), log)
    assert exc.value.line == 1


def test_log_records_carry_outcome(tmp_path):
    session = make_session(tmp_path)
    session.submit_verdict("cand-00002", "reject", version=1, reviewer="rev1")
    rec = json.loads((tmp_path / "verdicts.jsonl").read_text(encoding="utf-8"))
    assert rec["kind"] == "verdict"
    assert rec["reviewer"] == "rev1"
    assert rec["probability_after"] == pytest.approx(0.4)
    assert rec["status_after"] == "rejected"
    assert rec["version"] == 2


# ---------------------------------------------------------------------------
# HTTP endpoints


def test_list_candidates_sorted_by_probability(client):
    resp = client.get("/api/candidates")
    assert resp.status_code == 200
    data = resp.json()
    assert data["version"] == 1
    assert data["total"] == 3
    assert [c["id"] for c in data["items"]] == ["cand-00000", "cand-00001", "cand-00002"]
    probs = [c["probability"] for c in data["items"]]
    assert probs == sorted(probs, reverse=True)


def test_list_candidates_includes_node_context(client):
    item = client.get("/api/candidates").json()["items"][0]
    assert item["head_context"]["label"] == "tau kinase"
    assert item["head_context"]["node_type"] == "Genes"
    neighbor_ids = {n["id"] for n in item["head_context"]["neighbors"]}
    assert "Y" in neighbor_ids


def test_list_candidates_filters(client):
    assert client.get("/api/candidates", params={"status": "removed"}).json()["total"] == 0
    assert client.get("/api/candidates", params={"min_p": 0.65}).json()["total"] == 2
    rel = client.get("/api/candidates", params={"relation": "LinkedTo"}).json()
    assert [c["id"] for c in rel["items"]] == ["cand-00002"]


def test_list_candidates_rejects_bad_filters(client):
    assert client.get("/api/candidates", params={"status": "embargoed"}).status_code == 400
    assert client.get("/api/candidates", params={"min_p": 1.5}).status_code == 422
    assert client.get("/api/candidates", params={"page_size": 500}).status_code == 422
    assert client.get("/api/candidates", params={"page": 0}).status_code == 422


def test_list_candidates_pagination(client):
    page1 = client.get("/api/candidates", params={"page_size": 2}).json()
    assert [c["id"] for c in page1["items"]] == ["cand-00000", "cand-00001"]
    page2 = client.get("/api/candidates", params={"page_size": 2, "page": 2}).json()
    assert [c["id"] for c in page2["items"]] == ["cand-00002"]
    beyond = client.get("/api/candidates", params={"page_size": 2, "page": 9}).json()
    assert beyond["items"] == []
    assert beyond["total"] == 3


def test_verdict_endpoint_round_trip(client):
    resp = client.post(
        "/api/candidates/cand-00001/verdict",
        json={"verdict": "reject", "version": 1, "reviewer": "rev"},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["version"] == 2
    assert body["candidate"]["probability"] == pytest.approx(0.5)
    assert body["candidate"]["status"] == "pending"
    # the second reject crosses the threshold and drops the candidate
    resp2 = client.post(
        "/api/candidates/cand-00001/verdict",
        json={"verdict": "reject", "version": 2, "reviewer": "rev"},
    )
    assert resp2.json()["candidate"]["status"] == "rejected"
    pending = client.get("/api/candidates", params={"status": "pending"}).json()
    assert {c["id"] for c in pending["items"]} == {"cand-00000", "cand-00002"}


def test_verdict_endpoint_error_mapping(client):
    assert (
        client.post(
            "/api/candidates/ghost/verdict", json={"verdict": "accept", "version": 1}
        ).status_code
        == 404
    )
    ok = client.post("/api/candidates/cand-00000/verdict", json={"verdict": "accept", "version": 1})
    assert ok.status_code == 200
    stale = client.post(
        "/api/candidates/cand-00001/verdict", json={"verdict": "reject", "version": 1}
    )
    assert stale.status_code == 409
    assert stale.json()["detail"] == {"submitted": 1, "current": 2}
    terminal = client.post(
        "/api/candidates/cand-00000/verdict", json={"verdict": "reject", "version": 2}
    )
    assert terminal.status_code == 400
    bad_verdict = client.post(
        "/api/candidates/cand-00001/verdict", json={"verdict": "maybe", "version": 2}
    )
    assert bad_verdict.status_code == 400


def test_interleaved_clients_one_wins():
    session = make_session()
    app = create_app(session)
    a = TestClient(app)
    b = TestClient(app)
    version = a.get("/api/candidates").json()["version"]
    assert b.get("/api/candidates").json()["version"] == version
    first = a.post(
        "/api/candidates/cand-00001/verdict", json={"verdict": "reject", "version": version}
    )
    second = b.post(
        "/api/candidates/cand-00002/verdict", json={"verdict": "reject", "version": version}
    )
    assert first.status_code == 200
    assert second.status_code == 409
    retry = b.post(
        "/api/candidates/cand-00002/verdict",
        json={"verdict": "reject", "version": first.json()["version"]},
    )
    assert retry.status_code == 200


def test_stats_endpoint_tracks_acceptance_and_step(client):
    fresh = client.get("/api/stats").json()
    assert fresh["status_counts"] == {"pending": 3, "accepted": 0, "rejected": 0, "removed": 0}
    assert fresh["node_count"] == 3
    assert fresh["edge_count"] == 1
    assert fresh["nodes_by_type"]["Genes"] == 1


def test_stats_after_accept_and_advance(tmp_path):
    session = make_session(tmp_path)
    app = create_app(session)
    client = TestClient(app)
    client.post("/api/candidates/cand-00000/verdict", json={"verdict": "accept", "version": 1})
    session.advance()
    stats = client.get("/api/stats").json()
    assert stats["status_counts"]["accepted"] == 1
    assert stats["edge_count"] == 2
    assert stats["iteration"] == 1
    assert stats["version"] == 3


def test_stats_empty_session():
    g = KnowledgeGraph(name="empty")
    session = ReviewSession(ExpansionState(graph=g))
    client = TestClient(create_app(session))
    stats = client.get("/api/stats").json()
    assert stats["node_count"] == 0
    assert stats["edge_count"] == 0
    assert stats["status_counts"] == {"pending": 0, "accepted": 0, "rejected": 0, "removed": 0}


def test_node_endpoint(client):
    resp = client.get("/api/graph/nodes/X")
    assert resp.status_code == 200
    body = resp.json()
    assert body["node"]["label"] == "tau kinase"
    assert body["version"] == 1
    assert client.get("/api/graph/nodes/missing").status_code == 404


def test_static_mount_serves_ui(tmp_path):
    (tmp_path / "index.html").write_text("<h1>review queue</h1>", encoding="utf-8")
    client = TestClient(create_app(make_session(), static_dir=tmp_path))
    resp = client.get("/")
    assert resp.status_code == 200
    assert "review queue" in resp.text
    # api routes still take precedence over the static mount
    assert client.get("/api/stats").status_code == 200
