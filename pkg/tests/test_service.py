from __future__ import annotations

import json
import random

import pytest
from fastapi.testclient import TestClient

from conftest import mk_graph
from vpla.corpus import generate_corpus
from vpla.graphs import parse_project, serialize_project
from vpla.metrics import compute_report
from vpla.mining import build_structural_table, mine_frequent
from vpla.service import DISPLAY_METRICS, create_app, graph_version

OP = "operator"


def _node(nid: str, type_label: str = "Pump", x: float = 0.0, y: float = 0.0) -> dict:
    return {
        "id": nid,
        "kind": "operator",
        "type": type_label,
        "in_ports": ["in"],
        "out_ports": ["out"],
        "pos": [x, y],
        "size": [60, 40],
    }


@pytest.fixture
def client() -> TestClient:
    corpus = [
        mk_graph(f"p{i}", [(OP, "Pump"), (OP, "Valve"), (OP, "Limiter")], [(0, 1), (1, 2)])
        for i in range(4)
    ]
    table = build_structural_table(mine_frequent(corpus, minsup=2, max_pattern_nodes=3), corpus)
    return TestClient(create_app(table))


def _session(client: TestClient, project: dict | None = None) -> str:
    payload = {} if project is None else {"project": project}
    response = client.post("/sessions", json=payload)
    assert response.status_code == 200
    return response.json()["session_id"]


def test_create_session_with_and_without_project(client):
    r = client.post("/sessions", json={})
    assert r.status_code == 200
    body = r.json()
    assert set(body) == {"session_id", "metrics", "version"}

    doc = serialize_project(mk_graph("g", [(OP, "Pump")], []))
    r2 = client.post("/sessions", json={"project": doc})
    assert r2.status_code == 200
    assert r2.json()["metrics"]["halstead_length"] == 1


def test_edit_response_carries_fresh_metrics(client):
    sid = _session(client)
    r = client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    assert r.status_code == 200
    metrics = r.json()["metrics"]
    current = parse_project(client.get(f"/sessions/{sid}").json())
    expected = compute_report(current)
    for name in DISPLAY_METRICS:
        assert metrics[name] == pytest.approx(expected.value(name))


def test_rejected_edit_leaves_state_unchanged(client):
    sid = _session(client)
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    before_doc = client.get(f"/sessions/{sid}").json()
    before_metrics = client.get(f"/sessions/{sid}/metrics").json()

    r = client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    assert r.status_code == 422

    assert client.get(f"/sessions/{sid}").json() == before_doc
    assert client.get(f"/sessions/{sid}/metrics").json() == before_metrics


def test_edit_atomicity_on_bad_edge(client):
    sid = _session(client)
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    before = client.get(f"/sessions/{sid}").json()
    r = client.post(
        f"/sessions/{sid}/edits",
        json={"op": "add_edge", "edge": {"src": ["a", "out"], "dst": ["ghost", "in"]}},
    )
    assert r.status_code == 422
    assert client.get(f"/sessions/{sid}").json() == before


def test_undo_then_redo_restores_identical_version(client):
    sid = _session(client)
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    r = client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("b")})
    version_after = r.json()["version"]

    undo = client.post(f"/sessions/{sid}/undo")
    assert undo.status_code == 200
    assert undo.json()["version"] != version_after

    redo = client.post(f"/sessions/{sid}/redo")
    assert redo.status_code == 200
    assert redo.json()["version"] == version_after

    current = parse_project(client.get(f"/sessions/{sid}").json())
    assert graph_version(current) == version_after


def test_undo_empty_stack_conflicts(client):
    sid = _session(client)
    assert client.post(f"/sessions/{sid}/undo").status_code == 409


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/edits", json={"op": "x"}).status_code == 404


def test_recommendations_endpoint(client):
    doc = serialize_project(mk_graph("ctx", [(OP, "Pump"), (OP, "Valve")], [(0, 1)]))
    sid = _session(client, doc)
    r = client.post(f"/sessions/{sid}/recommendations", json={"node_id": "x1", "k": 3})
    assert r.status_code == 200
    recs = r.json()
    assert recs and recs[0]["candidate"]["type"] == "Limiter"
    assert recs[0]["min_ged"] == 0.0

    missing = client.post(f"/sessions/{sid}/recommendations", json={"node_id": "zz"})
    assert missing.status_code == 404


def test_recommendations_empty_table():
    client = TestClient(create_app(None))
    doc = serialize_project(mk_graph("ctx", [(OP, "Pump")], []))
    sid = _session(client, doc)
    r = client.post(f"/sessions/{sid}/recommendations", json={"node_id": "x0"})
    assert r.status_code == 200 and r.json() == []


def test_clone_listing_and_encapsulation_flow(client):
    doc = serialize_project(mk_graph(
        "dup",
        [(OP, "Pump"), (OP, "Valve"), (OP, "Pump"), (OP, "Valve")],
        [(0, 1), (2, 3)],
    ))
    sid = _session(client, doc)
    clones = client.get(f"/sessions/{sid}/clones").json()
    assert clones, "repeated structure must be reported"
    plan = clones[0]
    assert plan["support"] == 2 and plan["predicted_node_delta"] == -2

    r = client.post(f"/sessions/{sid}/encapsulate", json={"plan_id": plan["plan_id"]})
    assert r.status_code == 200
    body = r.json()
    assert body["composite"]["type_id"].startswith("composite_")
    assert body["metrics_delta"]["deltas"]["halstead_length"] < 0

    current = parse_project(client.get(f"/sessions/{sid}").json())
    assert len(current.nodes) == 2
    assert len(current.composites) == 1


def test_stale_plan_conflicts(client):
    doc = serialize_project(mk_graph(
        "dup",
        [(OP, "Pump"), (OP, "Valve"), (OP, "Pump"), (OP, "Valve")],
        [(0, 1), (2, 3)],
    ))
    sid = _session(client, doc)
    plan_id = client.get(f"/sessions/{sid}/clones").json()[0]["plan_id"]
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("zz")})
    r = client.post(f"/sessions/{sid}/encapsulate", json={"plan_id": plan_id})
    assert r.status_code == 409


def test_layout_endpoint_never_worsens(client):
    doc = serialize_project(mk_graph(
        "cross", [(OP, "A"), (OP, "B"), (OP, "C"), (OP, "D")],
        [(0, 2), (1, 3)],
        positions=[(0, 0), (0, 200), (300, 200), (300, 0)],
    ))
    sid = _session(client, doc)
    before = client.get(f"/sessions/{sid}/metrics").json()["layout_quality"]
    r = client.post(f"/sessions/{sid}/layout")
    assert r.status_code == 200
    assert r.json()["metrics"]["layout_quality"] <= before
    deltas = r.json()["metrics_delta"]["deltas"]
    assert deltas["cyclomatic"] == 0 and deltas["halstead_length"] == 0


def test_metrics_detail_endpoint(client):
    doc = serialize_project(mk_graph("g", [(OP, "Pump"), (OP, "Valve")], [(0, 1)]))
    sid = _session(client, doc)
    full = client.get(f"/sessions/{sid}/metrics", params={"detail": "full"}).json()
    assert "layout" in full and set(full["layout"]) == {
        "angular_resolution", "aspect_ratio", "edge_overlaps",
        "nearest_neighbour_variance", "uniform_edges", "concentration", "homogeneity",
    }
    assert "halstead_counts" in full
    small = client.get(f"/sessions/{sid}/metrics").json()
    assert "layout" not in small


def test_move_and_param_and_remove_ops(client):
    sid = _session(client)
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("a")})
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("b", x=10)})
    client.post(f"/sessions/{sid}/edits",
                json={"op": "add_edge", "edge": {"src": ["a", "out"], "dst": ["b", "in"]}})
    r = client.post(f"/sessions/{sid}/edits", json={"op": "move_node", "id": "a", "x": 5, "y": 7})
    assert r.status_code == 200
    r = client.post(f"/sessions/{sid}/edits",
                    json={"op": "set_param", "id": "a", "name": "rate", "value": 3})
    assert r.status_code == 200
    r = client.post(f"/sessions/{sid}/edits",
                    json={"op": "remove_edge", "edge": {"src": ["a", "out"], "dst": ["b", "in"]}})
    assert r.status_code == 200
    r = client.post(f"/sessions/{sid}/edits", json={"op": "remove_node", "id": "b"})
    assert r.status_code == 200
    current = parse_project(client.get(f"/sessions/{sid}").json())
    assert [n.id for n in current.nodes] == ["a"]
    assert current.node("a").params["rate"] == 3
    assert current.node("a").position == (5.0, 7.0)


def test_table_never_mutated_by_requests():
    corpus = [
        mk_graph(f"p{i}", [(OP, "Pump"), (OP, "Valve")], [(0, 1)]) for i in range(3)
    ]
    table = build_structural_table(mine_frequent(corpus, minsup=2), corpus)
    snapshot = table.to_json()
    client = TestClient(create_app(table))
    doc = serialize_project(mk_graph("ctx", [(OP, "Pump")], []))
    sid = _session(client, doc)
    client.post(f"/sessions/{sid}/recommendations", json={"node_id": "x0"})
    client.post(f"/sessions/{sid}/edits", json={"op": "add_node", "node": _node("q")})
    client.post(f"/sessions/{sid}/recommendations", json={"node_id": "q"})
    assert table.to_json() == snapshot


def test_distinct_sessions_are_independent(client):
    s1 = _session(client)
    s2 = _session(client)
    client.post(f"/sessions/{s1}/edits", json={"op": "add_node", "node": _node("only1")})
    g2 = parse_project(client.get(f"/sessions/{s2}").json())
    assert not g2.has_node("only1")
