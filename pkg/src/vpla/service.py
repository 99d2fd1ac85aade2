"""HTTP service for online assistance during editing.

Sessions hold one project graph each; every successful edit responds with
freshly recomputed metrics, so a client never issues a separate "recompute"
call. The structural table is shared immutable state; one writer per session
(edits are serialized per session), reads are concurrent.
"""

from __future__ import annotations

import hashlib
import itertools
import threading
from dataclasses import dataclass, field, replace

from fastapi import Body, FastAPI, HTTPException

from .encapsulate import (
    EncapsulationPlan,
    StaleEmbedding,
    find_clone_plans,
    metrics_delta,
    optimize_layout,
)
from .graphs import (
    Edge,
    GraphError,
    ProjectGraph,
    parse_edge,
    parse_node,
    parse_project,
    serialize_project,
    to_json,
    validate,
)
from .metrics import (
    LAYOUT_METRIC_NAMES,
    MissingLayout,
    compute_report,
    cyclomatic,
    halstead,
)
from .mining import StructuralTable
from .recommend import TableIndex, UnknownNode, recommend

UNDO_LIMIT = 100

#: Metric names shown in the default (small) panel; the full set stays
#: available under the detail endpoint.
DISPLAY_METRICS = (
    "cyclomatic",
    "halstead_length",
    "halstead_vocabulary",
    "halstead_difficulty",
    "layout_quality",
)


class EditRejected(ValueError):
    pass


def _metrics_payload(g: ProjectGraph, detail: bool = False) -> dict:
    """Metric values for API responses. Layout values are null when some
    node has no position yet (structural metrics are always available)."""
    try:
        report = compute_report(g)
        payload: dict = {name: report.value(name) for name in DISPLAY_METRICS}
        if detail:
            payload["layout"] = {name: report.layout[name] for name in LAYOUT_METRIC_NAMES}
    except MissingLayout:
        h = halstead(g)
        payload = {
            "cyclomatic": cyclomatic(g),
            "halstead_length": h.length,
            "halstead_vocabulary": h.vocabulary,
            "halstead_difficulty": h.difficulty,
            "layout_quality": None,
        }
        if detail:
            payload["layout"] = None
    if detail:
        h = halstead(g)
        payload["halstead_counts"] = {"n1": h.n1, "N1": h.N1, "n2": h.n2, "N2": h.N2}
    return payload


def graph_version(g: ProjectGraph) -> str:
    return hashlib.sha256(to_json(g).encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Edit operations
# ---------------------------------------------------------------------------


def apply_edit(g: ProjectGraph, op: dict) -> ProjectGraph:
    """Apply one EditOp; raises EditRejected and leaves no partial state.
    apply_encapsulation/apply_layout_opt are handled by the session layer."""
    kind = op.get("op")
    try:
        if kind == "add_node":
            node = parse_node(op["node"])
            return validate(replace(g, nodes=g.nodes + (node,)))
        if kind == "remove_node":
            node_id = str(op["id"])
            if not g.has_node(node_id):
                raise EditRejected(f"unknown node {node_id!r}")
            return validate(
                replace(
                    g,
                    nodes=tuple(n for n in g.nodes if n.id != node_id),
                    edges=tuple(
                        e for e in g.edges if e.src[0] != node_id and e.dst[0] != node_id
                    ),
                )
            )
        if kind == "add_edge":
            edge = parse_edge(op["edge"])
            return validate(replace(g, edges=g.edges + (edge,)))
        if kind == "remove_edge":
            ref = parse_edge(op["edge"])
            remaining = tuple(e for e in g.edges if e.key != ref.key)
            if len(remaining) == len(g.edges):
                raise EditRejected(f"no edge {ref.key}")
            return validate(replace(g, edges=remaining))
        if kind == "move_node":
            node_id = str(op["id"])
            if not g.has_node(node_id):
                raise EditRejected(f"unknown node {node_id!r}")
            x, y = float(op["x"]), float(op["y"])
            return validate(
                g.with_nodes(
                    replace(n, position=(x, y), size=n.size or (60.0, 40.0))
                    if n.id == node_id
                    else n
                    for n in g.nodes
                )
            )
        if kind == "set_param":
            node_id = str(op["id"])
            if not g.has_node(node_id):
                raise EditRejected(f"unknown node {node_id!r}")
            name = str(op["name"])
            value = op.get("value")
            return validate(
                g.with_nodes(
                    replace(n, params={**n.params, name: value}) if n.id == node_id else n
                    for n in g.nodes
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, EditRejected):
            raise
        raise EditRejected(f"malformed edit: {exc}") from exc
    except GraphError as exc:
        raise EditRejected(str(exc)) from exc
    raise EditRejected(f"unknown edit op {kind!r}")


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


@dataclass
class Session:
    session_id: str
    graph: ProjectGraph
    revision: int = 0
    undo_stack: list[ProjectGraph] = field(default_factory=list)
    redo_stack: list[ProjectGraph] = field(default_factory=list)
    plans: dict[str, tuple[int, EncapsulationPlan]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def _commit(self, new_graph: ProjectGraph) -> None:
        self.undo_stack.append(self.graph)
        if len(self.undo_stack) > UNDO_LIMIT:
            self.undo_stack.pop(0)
        self.redo_stack.clear()
        self.graph = new_graph
        self.revision += 1

    def edit(self, op: dict) -> ProjectGraph:
        with self.lock:
            kind = op.get("op")
            if kind == "apply_encapsulation":
                new_graph = self._apply_plan(str(op.get("plan_id")))
            elif kind == "apply_layout_opt":
                new_graph = optimize_layout(self.graph)
            else:
                new_graph = apply_edit(self.graph, op)
            self._commit(new_graph)
            return new_graph

    def _apply_plan(self, plan_id: str) -> ProjectGraph:
        from .encapsulate import encapsulate

        if plan_id not in self.plans:
            raise EditRejected(f"unknown plan {plan_id!r}")
        planned_revision, plan = self.plans[plan_id]
        if planned_revision != self.revision:
            raise StaleEmbedding("graph changed since planning")
        new_graph, _ = encapsulate(self.graph, plan)
        return new_graph

    def undo(self) -> ProjectGraph:
        with self.lock:
            if not self.undo_stack:
                raise EditRejected("nothing to undo")
            self.redo_stack.append(self.graph)
            self.graph = self.undo_stack.pop()
            self.revision += 1
            return self.graph

    def redo(self) -> ProjectGraph:
        with self.lock:
            if not self.redo_stack:
                raise EditRejected("nothing to redo")
            self.undo_stack.append(self.graph)
            self.graph = self.redo_stack.pop()
            self.revision += 1
            return self.graph

    def refresh_plans(self, min_occurrences: int = 2) -> list[tuple[str, EncapsulationPlan]]:
        with self.lock:
            plans = find_clone_plans(self.graph, min_occurrences=min_occurrences)
            self.plans = {
                f"p{i}": (self.revision, plan) for i, plan in enumerate(plans)
            }
            return [(f"p{i}", plan) for i, plan in enumerate(plans)]


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = itertools.count(1)

    def create(self, graph: ProjectGraph) -> Session:
        with self._lock:
            session_id = f"s{next(self._counter)}"
            session = Session(session_id=session_id, graph=graph)
            self._sessions[session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")


# ---------------------------------------------------------------------------
# FastAPI application
# ---------------------------------------------------------------------------


def create_app(table: StructuralTable | None = None) -> FastAPI:
    app = FastAPI(title="vpla assistance service")
    store = SessionStore()
    index = TableIndex(table) if table is not None and table.rows else None
    app.state.store = store
    app.state.table = table

    def _state(graph: ProjectGraph, extra: dict | None = None) -> dict:
        out = {"metrics": _metrics_payload(graph), "version": graph_version(graph)}
        if extra:
            out.update(extra)
        return out

    @app.post("/sessions")
    def create_session(payload: dict = Body(default={})) -> dict:
        doc = payload.get("project")
        if doc is None:
            graph = ProjectGraph(project_id=str(payload.get("project_id", "untitled")))
        else:
            try:
                graph = parse_project(doc)
            except GraphError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        session = store.create(graph)
        return {"session_id": session.session_id, **_state(graph)}

    @app.get("/sessions/{session_id}")
    def get_project(session_id: str) -> dict:
        return serialize_project(store.get(session_id).graph)

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, op: dict = Body(...)) -> dict:
        session = store.get(session_id)
        try:
            graph = session.edit(op)
        except StaleEmbedding as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (EditRejected, GraphError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _state(graph)

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str) -> dict:
        try:
            return _state(store.get(session_id).undo())
        except EditRejected as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/sessions/{session_id}/redo")
    def post_redo(session_id: str) -> dict:
        try:
            return _state(store.get(session_id).redo())
        except EditRejected as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/sessions/{session_id}/recommendations")
    def post_recommendations(session_id: str, payload: dict = Body(...)) -> list:
        session = store.get(session_id)
        node_id = payload.get("node_id")
        if node_id is None:
            raise HTTPException(status_code=422, detail="node_id is required")
        k = int(payload.get("k", 5))
        if index is None:
            return []
        try:
            recs = recommend(session.graph, str(node_id), index, k=k)
        except UnknownNode as exc:
            raise HTTPException(status_code=404, detail=f"unknown node {exc.node_id!r}")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return [r.as_dict() for r in recs]

    @app.get("/sessions/{session_id}/clones")
    def get_clones(session_id: str, min_occurrences: int = 2) -> list:
        session = store.get(session_id)
        summaries = []
        for plan_id, plan in session.refresh_plans(min_occurrences=min_occurrences):
            summaries.append(
                {
                    "plan_id": plan_id,
                    "composite_type": plan.new_composite.type_id,
                    "pattern_nodes": len(plan.pattern.pattern.nodes),
                    "pattern_edges": len(plan.pattern.pattern.edges),
                    "occurrences": [
                        sorted(em.host_nodes) for em in plan.occurrences
                    ],
                    "support": plan.pattern.support,
                    "predicted_node_delta": plan.predicted_node_delta,
                }
            )
        return summaries

    @app.post("/sessions/{session_id}/encapsulate")
    def post_encapsulate(session_id: str, payload: dict = Body(...)) -> dict:
        session = store.get(session_id)
        plan_id = str(payload.get("plan_id"))
        before = session.graph
        try:
            graph = session.edit({"op": "apply_encapsulation", "plan_id": plan_id})
        except StaleEmbedding as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (EditRejected, GraphError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        delta = metrics_delta(before, graph)
        composite = graph.composites[-1]
        return _state(
            graph,
            {
                "metrics_delta": delta.as_dict(),
                "composite": {
                    "type_id": composite.type_id,
                    "in_ports": sorted(
                        p for p in composite.boundary
                        if composite.boundary_direction(p) == "in"
                    ),
                    "out_ports": sorted(
                        p for p in composite.boundary
                        if composite.boundary_direction(p) == "out"
                    ),
                },
            },
        )

    @app.post("/sessions/{session_id}/layout")
    def post_layout(session_id: str) -> dict:
        session = store.get(session_id)
        before = session.graph
        try:
            graph = session.edit({"op": "apply_layout_opt"})
        except (EditRejected, GraphError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _state(graph, {"metrics_delta": metrics_delta(before, graph).as_dict()})

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str, detail: str | None = None) -> dict:
        session = store.get(session_id)
        return _metrics_payload(session.graph, detail=(detail == "full"))

    return app
