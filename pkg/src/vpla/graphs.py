"""Graph representation of visual-programming projects.

A project is a directed, labeled, ported multigraph: blocks and variables are
nodes, their interconnections are edges. Every analysis in this package
(metrics, mining, edit distance, encapsulation) runs on this representation.

Graphs are immutable values: every edit produces a new ``ProjectGraph``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping

OPERATOR = "operator"
OPERAND = "operand"
KINDS = (OPERATOR, OPERAND)

#: Port name that matches any concrete port during embedding search.
#: Patterns produced by mining carry only wildcard ports.
WILDCARD_PORT = "*"


class GraphError(Exception):
    """Base class for all graph construction/validation errors."""


class MalformedDocument(GraphError):
    pass


class DuplicateNodeId(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingEdge(GraphError):
    def __init__(self, edge: "Edge"):
        super().__init__(f"edge references unknown node: {edge}")
        self.edge = edge


class UnknownPort(GraphError):
    def __init__(self, node_id: str, port: str):
        super().__init__(f"node {node_id!r} has no port {port!r}")
        self.node_id = node_id
        self.port = port


class PatternDisconnected(GraphError):
    pass


class UnknownCompositeType(GraphError):
    def __init__(self, type_id: str):
        super().__init__(f"composite type {type_id!r} is not defined")
        self.type_id = type_id


@dataclass(frozen=True)
class Node:
    id: str
    kind: str  # operator | operand
    type_label: str
    in_ports: tuple[str, ...] = ()
    out_ports: tuple[str, ...] = ()
    params: dict[str, Any] = field(default_factory=dict)
    position: tuple[float, float] | None = None
    size: tuple[float, float] | None = None
    extra: dict[str, Any] = field(default_factory=dict)  # unknown doc fields

    @property
    def label(self) -> tuple[str, str]:
        return (self.kind, self.type_label)

    def operand_name(self) -> str:
        """Identifier used for Halstead operand counting."""
        name = self.params.get("name")
        return str(name) if name is not None else self.type_label


@dataclass(frozen=True)
class Edge:
    src: tuple[str, str]  # (node id, out port)
    dst: tuple[str, str]  # (node id, in port)
    label: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.src[0], self.src[1], self.dst[0], self.dst[1])


@dataclass(frozen=True)
class CompositeBlockDef:
    """A reusable composite block: an inner graph plus its boundary ports.

    ``boundary`` maps each composite port name to the inner (node id, port)
    it stands for; the port's direction follows from whether the inner port
    is an input or an output of that inner node.
    """

    type_id: str
    inner: "ProjectGraph"
    boundary: dict[str, tuple[str, str]] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def boundary_direction(self, port: str) -> str:
        node_id, inner_port = self.boundary[port]
        node = self.inner.node(node_id)
        if inner_port in node.in_ports:
            return "in"
        if inner_port in node.out_ports:
            return "out"
        raise UnknownPort(node_id, inner_port)


@dataclass(frozen=True)
class ProjectGraph:
    project_id: str
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    composites: tuple[CompositeBlockDef, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def _index(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _out(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out[e.src[0]].append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _in(self) -> dict[str, tuple[Edge, ...]]:
        inc: dict[str, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            inc[e.dst[0]].append(e)
        return {k: tuple(v) for k, v in inc.items()}

    def node(self, node_id: str) -> Node:
        return self._index[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._index

    def out_edges(self, node_id: str) -> tuple[Edge, ...]:
        return self._out.get(node_id, ())

    def in_edges(self, node_id: str) -> tuple[Edge, ...]:
        return self._in.get(node_id, ())

    def neighbors(self, node_id: str) -> set[str]:
        """Adjacent node ids, ignoring direction."""
        out = {e.dst[0] for e in self.out_edges(node_id)}
        out.update(e.src[0] for e in self.in_edges(node_id))
        return out

    def composite_def(self, type_id: str) -> CompositeBlockDef | None:
        for c in self.composites:
            if c.type_id == type_id:
                return c
        return None

    def with_nodes(self, nodes: Iterable[Node]) -> "ProjectGraph":
        return replace(self, nodes=tuple(nodes))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(g: ProjectGraph) -> ProjectGraph:
    """Check all structural invariants; returns ``g`` unchanged on success."""
    seen: set[str] = set()
    for n in g.nodes:
        if n.id in seen:
            raise DuplicateNodeId(n.id)
        seen.add(n.id)
        if n.kind not in KINDS:
            raise MalformedDocument(f"node {n.id!r}: unknown kind {n.kind!r}")
        if len(set(n.in_ports)) != len(n.in_ports):
            raise MalformedDocument(f"node {n.id!r}: duplicate in-port names")
        if len(set(n.out_ports)) != len(n.out_ports):
            raise MalformedDocument(f"node {n.id!r}: duplicate out-port names")
        if n.size is not None and (n.size[0] <= 0 or n.size[1] <= 0):
            raise MalformedDocument(f"node {n.id!r}: non-positive size {n.size}")

    keys: set[tuple[str, str, str, str]] = set()
    for e in g.edges:
        for node_id, port, ports_attr in (
            (e.src[0], e.src[1], "out_ports"),
            (e.dst[0], e.dst[1], "in_ports"),
        ):
            if node_id not in g._index:
                raise DanglingEdge(e)
            declared = getattr(g.node(node_id), ports_attr)
            if port != WILDCARD_PORT and port not in declared:
                raise UnknownPort(node_id, port)
        if e.src == e.dst:
            raise MalformedDocument(f"self-edge on identical port pair: {e.key}")
        if e.key in keys:
            raise MalformedDocument(f"duplicate edge {e.key}")
        keys.add(e.key)

    _validate_composites(g)
    return g


def _validate_composites(g: ProjectGraph) -> None:
    defs = {c.type_id: c for c in g.composites}
    for c in g.composites:
        validate(c.inner)
        for port, (node_id, inner_port) in c.boundary.items():
            if not c.inner.has_node(node_id):
                raise MalformedDocument(
                    f"composite {c.type_id!r}: boundary {port!r} targets missing node {node_id!r}"
                )
            node = c.inner.node(node_id)
            if inner_port not in node.in_ports and inner_port not in node.out_ports:
                raise UnknownPort(node_id, inner_port)
    # acyclic "uses" relation
    state: dict[str, int] = {}

    def visit(type_id: str) -> None:
        if state.get(type_id) == 1:
            raise MalformedDocument(f"composite {type_id!r} contains itself transitively")
        if state.get(type_id) == 2 or type_id not in defs:
            return
        state[type_id] = 1
        for n in defs[type_id].inner.nodes:
            visit(n.type_label)
        state[type_id] = 2

    for type_id in defs:
        visit(type_id)


# ---------------------------------------------------------------------------
# Interchange format (UTF-8 JSON)
# ---------------------------------------------------------------------------

_NODE_FIELDS = {"id", "kind", "type", "in_ports", "out_ports", "params", "pos", "size"}
_EDGE_FIELDS = {"src", "dst", "label"}
_DOC_FIELDS = {"project_id", "nodes", "edges", "composites"}
_COMPOSITE_FIELDS = {"type_id", "inner", "boundary"}


def _pair(value: Any, what: str) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise MalformedDocument(f"{what} must be a [x, y] number pair, got {value!r}")
    return (float(value[0]), float(value[1]))


def _endpoint(value: Any, what: str) -> tuple[str, str]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise MalformedDocument(f"{what} must be [node id, port], got {value!r}")
    return (str(value[0]), str(value[1]))


def parse_node(obj: Any) -> Node:
    if not isinstance(obj, dict) or "id" not in obj or "kind" not in obj or "type" not in obj:
        raise MalformedDocument(f"node object must have id/kind/type: {obj!r}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise MalformedDocument(f"node {obj['id']!r}: params must be an object")
    return Node(
        id=str(obj["id"]),
        kind=str(obj["kind"]),
        type_label=str(obj["type"]),
        in_ports=tuple(str(p) for p in obj.get("in_ports", [])),
        out_ports=tuple(str(p) for p in obj.get("out_ports", [])),
        params=dict(params),
        position=_pair(obj["pos"], "node pos") if obj.get("pos") is not None else None,
        size=_pair(obj["size"], "node size") if obj.get("size") is not None else None,
        extra={k: v for k, v in obj.items() if k not in _NODE_FIELDS},
    )


def parse_edge(obj: Any) -> Edge:
    if not isinstance(obj, dict) or "src" not in obj or "dst" not in obj:
        raise MalformedDocument(f"edge object must have src/dst: {obj!r}")
    label = obj.get("label")
    return Edge(
        src=_endpoint(obj["src"], "edge src"),
        dst=_endpoint(obj["dst"], "edge dst"),
        label=str(label) if label is not None else None,
        extra={k: v for k, v in obj.items() if k not in _EDGE_FIELDS},
    )


def _parse_composite(obj: Any) -> CompositeBlockDef:
    if not isinstance(obj, dict) or "type_id" not in obj or "inner" not in obj:
        raise MalformedDocument(f"composite object must have type_id/inner: {obj!r}")
    boundary_obj = obj.get("boundary", {})
    if not isinstance(boundary_obj, dict):
        raise MalformedDocument("composite boundary must be an object")
    boundary = {str(p): _endpoint(t, f"boundary {p!r}") for p, t in boundary_obj.items()}
    return CompositeBlockDef(
        type_id=str(obj["type_id"]),
        inner=_parse_document(obj["inner"]),
        boundary=boundary,
        extra={k: v for k, v in obj.items() if k not in _COMPOSITE_FIELDS},
    )


def _parse_document(doc: Any) -> ProjectGraph:
    if not isinstance(doc, dict):
        raise MalformedDocument("document root must be a JSON object")
    if "project_id" not in doc:
        raise MalformedDocument("document is missing project_id")
    for key, typ in (("nodes", list), ("edges", list), ("composites", list)):
        if key in doc and not isinstance(doc[key], typ):
            raise MalformedDocument(f"{key} must be an array")
    return ProjectGraph(
        project_id=str(doc["project_id"]),
        nodes=tuple(parse_node(n) for n in doc.get("nodes", [])),
        edges=tuple(parse_edge(e) for e in doc.get("edges", [])),
        composites=tuple(_parse_composite(c) for c in doc.get("composites", [])),
        extra={k: v for k, v in doc.items() if k not in _DOC_FIELDS},
    )


def parse_project(data: bytes | str | dict) -> ProjectGraph:
    """Parse an interchange document into a validated ``ProjectGraph``."""
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc}") from exc
    else:
        doc = data
    return validate(_parse_document(doc))


def node_to_dict(n: Node) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": n.id,
        "kind": n.kind,
        "type": n.type_label,
        "in_ports": list(n.in_ports),
        "out_ports": list(n.out_ports),
        "params": dict(n.params),
    }
    if n.position is not None:
        out["pos"] = list(n.position)
    if n.size is not None:
        out["size"] = list(n.size)
    out.update(n.extra)
    return out


def edge_to_dict(e: Edge) -> dict[str, Any]:
    out: dict[str, Any] = {"src": list(e.src), "dst": list(e.dst)}
    if e.label is not None:
        out["label"] = e.label
    out.update(e.extra)
    return out


def serialize_project(g: ProjectGraph) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "project_id": g.project_id,
        "nodes": [node_to_dict(n) for n in g.nodes],
        "edges": [edge_to_dict(e) for e in g.edges],
        "composites": [
            {
                "type_id": c.type_id,
                "inner": serialize_project(c.inner),
                "boundary": {p: list(t) for p, t in sorted(c.boundary.items())},
                **c.extra,
            }
            for c in g.composites
        ],
    }
    doc.update(g.extra)
    return doc


def to_json(g: ProjectGraph, indent: int | None = None) -> str:
    """Canonical JSON serialization (sorted keys; byte-stable for equal graphs)."""
    return json.dumps(serialize_project(g), sort_keys=True, indent=indent)


# ---------------------------------------------------------------------------
# Connectivity helpers
# ---------------------------------------------------------------------------


def weak_components(g: ProjectGraph) -> list[set[str]]:
    """Weakly connected components of the node set."""
    remaining = {n.id for n in g.nodes}
    components = []
    while remaining:
        start = next(iter(remaining))
        comp = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nb in g.neighbors(cur):
                if nb in remaining and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        remaining -= comp
        components.append(comp)
    return components


def is_weakly_connected(g: ProjectGraph) -> bool:
    return len(g.nodes) <= 1 or len(weak_components(g)) == 1


def induced_subgraph(g: ProjectGraph, node_ids: set[str], project_id: str | None = None) -> ProjectGraph:
    """Subgraph on ``node_ids`` with every edge among them (composites dropped)."""
    return ProjectGraph(
        project_id=project_id if project_id is not None else g.project_id,
        nodes=tuple(n for n in g.nodes if n.id in node_ids),
        edges=tuple(e for e in g.edges if e.src[0] in node_ids and e.dst[0] in node_ids),
    )


# ---------------------------------------------------------------------------
# Edge-parameter expansion
# ---------------------------------------------------------------------------


def expand_edge_params(g: ProjectGraph) -> ProjectGraph:
    """Turn every labeled edge a->b into a -> p -> b with p an operand node.

    The new node carries the edge label both as its type and as its operand
    identifier, so Halstead counts are unchanged by the expansion. Unlabeled
    edges are untouched.
    """
    nodes = list(g.nodes)
    edges: list[Edge] = []
    existing = {n.id for n in g.nodes}
    counter = 0
    for e in g.edges:
        if e.label is None:
            edges.append(e)
            continue
        node_id = f"param_{counter}"
        while node_id in existing:
            counter += 1
            node_id = f"param_{counter}"
        counter += 1
        existing.add(node_id)
        src_node, dst_node = g.node(e.src[0]), g.node(e.dst[0])
        position = None
        if src_node.position is not None and dst_node.position is not None:
            position = (
                (src_node.position[0] + dst_node.position[0]) / 2.0,
                (src_node.position[1] + dst_node.position[1]) / 2.0,
            )
        nodes.append(
            Node(
                id=node_id,
                kind=OPERAND,
                type_label=e.label,
                in_ports=("in",),
                out_ports=("out",),
                params={"name": e.label},
                position=position,
                size=(20.0, 20.0) if position is not None else None,
            )
        )
        edges.append(Edge(src=e.src, dst=(node_id, "in")))
        edges.append(Edge(src=(node_id, "out"), dst=e.dst))
    return validate(replace(g, nodes=tuple(nodes), edges=tuple(edges)))


# ---------------------------------------------------------------------------
# Embedding search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    """Injective, label/direction-preserving map of a pattern into a host."""

    node_map: tuple[tuple[str, str], ...]  # (pattern node id, host node id)
    edge_map: tuple[tuple[tuple[str, str, str, str], tuple[str, str, str, str]], ...]

    @cached_property
    def nodes(self) -> dict[str, str]:
        return dict(self.node_map)

    @cached_property
    def host_nodes(self) -> frozenset[str]:
        return frozenset(h for _, h in self.node_map)

    def overlaps(self, other: "Embedding") -> bool:
        return bool(self.host_nodes & other.host_nodes)


def _ports_compatible(pattern_port: str, host_port: str) -> bool:
    return pattern_port == WILDCARD_PORT or pattern_port == host_port


def _matching_host_edges(host: ProjectGraph, pe: Edge, src: str, dst: str) -> list[Edge]:
    found = [
        he
        for he in host.out_edges(src)
        if he.dst[0] == dst
        and _ports_compatible(pe.src[1], he.src[1])
        and _ports_compatible(pe.dst[1], he.dst[1])
    ]
    found.sort(key=lambda he: he.key)
    return found


def find_embeddings(
    pattern: ProjectGraph, host: ProjectGraph, limit: int | None = None
) -> list[Embedding]:
    """All embeddings of ``pattern`` in ``host``, in lexicographic order.

    Pattern wildcard ports (``*``) match any host port; concrete pattern
    ports must match host ports by name. Order is lexicographic by the tuple
    of mapped host ids taken in pattern node-list order.
    """
    if not pattern.nodes:
        raise PatternDisconnected("pattern has no nodes")
    if not is_weakly_connected(pattern):
        raise PatternDisconnected("pattern must be weakly connected")

    pattern_order = _connected_search_order(pattern, host)
    if pattern_order is None:
        return []

    by_label: dict[tuple[str, str], list[str]] = {}
    for n in host.nodes:
        by_label.setdefault(n.label, []).append(n.id)
    for ids in by_label.values():
        ids.sort()

    pedges_between: dict[tuple[str, str], list[Edge]] = {}
    for pe in pattern.edges:
        pedges_between.setdefault((pe.src[0], pe.dst[0]), []).append(pe)

    results: list[Embedding] = []
    assignment: dict[str, str] = {}
    used: set[str] = set()

    def consistent(pid: str, hid: str) -> bool:
        for qid, hq in assignment.items():
            for a, b, ha, hb in ((pid, qid, hid, hq), (qid, pid, hq, hid)):
                for pe in pedges_between.get((a, b), ()):
                    if not _matching_host_edges(host, pe, ha, hb):
                        return False
        return True

    def extend(depth: int) -> bool:
        if depth == len(pattern_order):
            node_map = tuple((n.id, assignment[n.id]) for n in pattern.nodes)
            edge_map = []
            for pe in pattern.edges:
                he = _matching_host_edges(
                    host, pe, assignment[pe.src[0]], assignment[pe.dst[0]]
                )[0]
                edge_map.append((pe.key, he.key))
            results.append(Embedding(node_map=node_map, edge_map=tuple(edge_map)))
            return limit is not None and len(results) >= limit
        pid = pattern_order[depth]
        pnode = pattern.node(pid)
        for hid in by_label.get(pnode.label, ()):
            if hid in used or not consistent(pid, hid):
                continue
            assignment[pid] = hid
            used.add(hid)
            stop = extend(depth + 1)
            del assignment[pid]
            used.remove(hid)
            if stop:
                return True
        return False

    extend(0)
    results.sort(key=lambda em: tuple(em.nodes[n.id] for n in pattern.nodes))
    return results


def has_embedding(pattern: ProjectGraph, host: ProjectGraph) -> bool:
    return bool(find_embeddings(pattern, host, limit=1))


def _connected_search_order(pattern: ProjectGraph, host: ProjectGraph) -> list[str] | None:
    """Pattern node order for backtracking: rarest host label first, then
    connected expansion. Returns None when some pattern label is absent."""
    host_counts: dict[tuple[str, str], int] = {}
    for n in host.nodes:
        host_counts[n.label] = host_counts.get(n.label, 0) + 1
    for n in pattern.nodes:
        if host_counts.get(n.label, 0) == 0:
            return None
    start = min(pattern.nodes, key=lambda n: (host_counts[n.label], n.id))
    order = [start.id]
    seen = {start.id}
    frontier = sorted(pattern.neighbors(start.id) - seen)
    while frontier:
        nxt = min(frontier, key=lambda nid: (host_counts[pattern.node(nid).label], nid))
        order.append(nxt)
        seen.add(nxt)
        frontier = sorted(
            {nb for nid in seen for nb in pattern.neighbors(nid)} - seen
        )
    return order


# ---------------------------------------------------------------------------
# Flattening composite blocks
# ---------------------------------------------------------------------------


def flatten(g: ProjectGraph) -> ProjectGraph:
    """Expand every composite-typed node until none remain. Idempotent."""
    defs = dict(_collect_defs(g))
    current = g
    guard = 0
    while True:
        composite_nodes = [n for n in current.nodes if n.type_label in defs]
        if not composite_nodes:
            break
        guard += 1
        if guard > 1000:
            raise MalformedDocument("composite expansion did not terminate")
        current = _expand_once(current, composite_nodes, defs)
    return validate(replace(current, composites=()))


def _collect_defs(g: ProjectGraph) -> Iterator[tuple[str, CompositeBlockDef]]:
    for c in g.composites:
        yield (c.type_id, c)
        yield from _collect_defs(c.inner)


def _expand_once(
    g: ProjectGraph, composite_nodes: list[Node], defs: dict[str, CompositeBlockDef]
) -> ProjectGraph:
    expanding = {n.id: defs[n.type_label] for n in composite_nodes}
    existing = {n.id for n in g.nodes}
    rename: dict[tuple[str, str], str] = {}  # (instance id, inner id) -> new id

    def fresh(instance: str, inner_id: str) -> str:
        base = f"{instance}/{inner_id}"
        candidate = base
        k = 2
        while candidate in existing:
            candidate = f"{base}#{k}"
            k += 1
        existing.add(candidate)
        rename[(instance, inner_id)] = candidate
        return candidate

    nodes: list[Node] = [n for n in g.nodes if n.id not in expanding]
    edges: list[Edge] = []
    for inst in composite_nodes:
        cdef = expanding[inst.id]
        offset = _inner_offset(inst, cdef.inner)
        for inner_node in cdef.inner.nodes:
            new_pos = inner_node.position
            if new_pos is not None and offset is not None:
                new_pos = (new_pos[0] + offset[0], new_pos[1] + offset[1])
            nodes.append(replace(inner_node, id=fresh(inst.id, inner_node.id), position=new_pos))
        for inner_edge in cdef.inner.edges:
            edges.append(
                replace(
                    inner_edge,
                    src=(rename[(inst.id, inner_edge.src[0])], inner_edge.src[1]),
                    dst=(rename[(inst.id, inner_edge.dst[0])], inner_edge.dst[1]),
                )
            )

    def rewire(end: tuple[str, str], expect: str) -> tuple[str, str]:
        node_id, port = end
        if node_id not in expanding:
            return end
        cdef = expanding[node_id]
        if port not in cdef.boundary:
            raise UnknownPort(node_id, port)
        inner_id, inner_port = cdef.boundary[port]
        if cdef.boundary_direction(port) != expect:
            raise UnknownPort(node_id, port)
        return (rename[(node_id, inner_id)], inner_port)

    for e in g.edges:
        edges.append(replace(e, src=rewire(e.src, "out"), dst=rewire(e.dst, "in")))
    return replace(g, nodes=tuple(nodes), edges=tuple(edges))


def _inner_offset(instance: Node, inner: ProjectGraph) -> tuple[float, float] | None:
    """Shift inner coordinates so the expansion lands near the instance."""
    if instance.position is None:
        return None
    placed = [n.position for n in inner.nodes if n.position is not None]
    if not placed:
        return None
    cx = sum(p[0] for p in placed) / len(placed)
    cy = sum(p[1] for p in placed) / len(placed)
    return (instance.position[0] - cx, instance.position[1] - cy)
