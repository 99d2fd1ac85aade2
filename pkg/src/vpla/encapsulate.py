"""Clone encapsulation and layout optimization.

Encapsulation replaces the vertex-disjoint occurrences of a repetitive
pattern with instances of a new composite block; flattening the result
restores a graph isomorphic to the original. Layout optimization re-places
nodes (layered ranks + barycenter ordering + hill climbing) and never makes
the weighted layout score worse.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .graphs import (
    OPERATOR,
    CompositeBlockDef,
    Edge,
    Embedding,
    GraphError,
    Node,
    ProjectGraph,
    induced_subgraph,
    validate,
)
from .metrics import (
    METRIC_COLUMNS,
    LayoutWeights,
    MetricsReport,
    compute_report,
    layout_quality,
)
from .mining import FrequentSubgraph, mine_single_graph

COMPOSITE_SIZE = (100.0, 80.0)


class EmptyCloneList(ValueError):
    pass


class OverlappingOccurrences(GraphError):
    pass


class StaleEmbedding(GraphError):
    pass


def select_clone(clones: list[FrequentSubgraph]) -> FrequentSubgraph:
    """Priority: higher support first, then larger pattern, then stable code
    order. More frequent clones give the quickest simplification; on equal
    frequency the larger one minimizes the number of steps."""
    if not clones:
        raise EmptyCloneList("no clones to select from")
    return min(
        clones,
        key=lambda c: (-c.support, -(c.num_nodes + c.num_edges), c.canonical_code),
    )


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncapsulationPlan:
    pattern: FrequentSubgraph
    occurrences: tuple[Embedding, ...]
    new_composite: CompositeBlockDef
    predicted_node_delta: int

    @property
    def plan_id(self) -> str:
        return f"{self.new_composite.type_id}@{len(self.occurrences)}x{len(self.pattern.pattern.nodes)}"


def _occurrence_signature(g: ProjectGraph, pattern: ProjectGraph, em: Embedding) -> tuple:
    """Port-level content of an occurrence, in pattern-node space. Only
    occurrences with identical signatures can share one composite
    definition and still flatten back exactly."""
    inverse = {h: p for p, h in em.node_map}
    node_part = tuple(
        (
            g.node(em.nodes[p.id]).kind,
            g.node(em.nodes[p.id]).type_label,
            g.node(em.nodes[p.id]).in_ports,
            g.node(em.nodes[p.id]).out_ports,
        )
        for p in pattern.nodes
    )
    covered = em.host_nodes
    edge_part = tuple(
        sorted(
            (inverse[e.src[0]], e.src[1], inverse[e.dst[0]], e.dst[1], e.label or "")
            for e in g.edges
            if e.src[0] in covered and e.dst[0] in covered
        )
    )
    return (node_part, edge_part)


def _crossing_attachments(
    g: ProjectGraph, occurrences: tuple[Embedding, ...]
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Boundary attachment points over all occurrences, in pattern space:
    (pattern node id, host port) pairs for incoming and outgoing edges."""
    membership: dict[str, int] = {}
    inverses: list[dict[str, str]] = []
    for i, em in enumerate(occurrences):
        inverses.append({h: p for p, h in em.node_map})
        for h in em.host_nodes:
            membership[h] = i
    ins: set[tuple[str, str]] = set()
    outs: set[tuple[str, str]] = set()
    for e in g.edges:
        si = membership.get(e.src[0])
        di = membership.get(e.dst[0])
        if di is not None and si != di:
            ins.add((inverses[di][e.dst[0]], e.dst[1]))
        if si is not None and si != di:
            outs.add((inverses[si][e.src[0]], e.src[1]))
    return sorted(ins), sorted(outs)


def _build_composite(
    g: ProjectGraph,
    pattern: ProjectGraph,
    occurrences: tuple[Embedding, ...],
    type_id: str,
) -> CompositeBlockDef:
    first = occurrences[0]
    inner = induced_subgraph(g, set(first.host_nodes), project_id=type_id)
    ins, outs = _crossing_attachments(g, occurrences)
    boundary: dict[str, tuple[str, str]] = {}
    for i, (pid, port) in enumerate(ins, start=1):
        boundary[f"p_in_{i}"] = (first.nodes[pid], port)
    for i, (pid, port) in enumerate(outs, start=1):
        boundary[f"p_out_{i}"] = (first.nodes[pid], port)
    return CompositeBlockDef(type_id=type_id, inner=inner, boundary=boundary)


def _fresh_type_id(taken: set[str]) -> str:
    i = 1
    while f"composite_{i}" in taken:
        i += 1
    taken.add(f"composite_{i}")
    return f"composite_{i}"


def find_clone_plans(
    g: ProjectGraph,
    min_occurrences: int = 2,
    max_pattern_nodes: int = 6,
) -> list[EncapsulationPlan]:
    """Encapsulation plans for the repetitive structures in ``g``, in
    application priority order (see select_clone)."""
    clones = mine_single_graph(g, min_occurrences=min_occurrences, max_pattern_nodes=max_pattern_nodes)
    ranked = sorted(
        clones,
        key=lambda c: (-c.support, -(c.num_nodes + c.num_edges), c.canonical_code),
    )
    taken = {c.type_id for c in g.composites} | {n.type_label for n in g.nodes}
    plans = []
    for clone in ranked:
        occurrences = clone.embeddings_by_project.get(g.project_id, ())
        groups: dict[tuple, list[Embedding]] = {}
        for em in occurrences:
            groups.setdefault(_occurrence_signature(g, clone.pattern, em), []).append(em)
        best = max(groups.values(), key=len, default=[])
        if len(best) < min_occurrences:
            continue
        chosen = tuple(best)
        type_id = _fresh_type_id(taken)
        plans.append(
            EncapsulationPlan(
                pattern=clone,
                occurrences=chosen,
                new_composite=_build_composite(g, clone.pattern, chosen, type_id),
                predicted_node_delta=-sum(
                    len(clone.pattern.nodes) - 1 for _ in chosen
                ),
            )
        )
    return plans


# ---------------------------------------------------------------------------
# Applying a plan
# ---------------------------------------------------------------------------


def encapsulate(g: ProjectGraph, plan: EncapsulationPlan) -> tuple[ProjectGraph, CompositeBlockDef]:
    """Replace each occurrence by one composite node; returns the rewritten
    graph and the stored composite definition."""
    pattern = plan.pattern.pattern
    taken: set[str] = set()
    for em in plan.occurrences:
        if em.host_nodes & taken:
            raise OverlappingOccurrences("occurrences share a node")
        taken.update(em.host_nodes)

    reference_sig: tuple | None = None
    for em in plan.occurrences:
        for _, host_id in em.node_map:
            if not g.has_node(host_id):
                raise StaleEmbedding(f"node {host_id!r} no longer exists")
        sig = _occurrence_signature(g, pattern, em)
        if reference_sig is None:
            reference_sig = sig
        elif sig != reference_sig:
            raise StaleEmbedding("occurrence content diverged since planning")

    cdef = plan.new_composite
    attachment_to_port = {
        (cdef.boundary_direction(port), cdef.boundary[port][0], cdef.boundary[port][1]): port
        for port in cdef.boundary
    }

    membership: dict[str, int] = {}
    inverses: list[dict[str, str]] = []
    for i, em in enumerate(plan.occurrences):
        inverses.append({h: p for p, h in em.node_map})
        for h in em.host_nodes:
            membership[h] = i

    existing_ids = {n.id for n in g.nodes}
    instance_ids: list[str] = []
    for i in range(len(plan.occurrences)):
        base = f"{cdef.type_id}_{i + 1}"
        candidate = base
        k = 2
        while candidate in existing_ids:
            candidate = f"{base}#{k}"
            k += 1
        existing_ids.add(candidate)
        instance_ids.append(candidate)

    in_port_names = tuple(
        sorted((p for p in cdef.boundary if cdef.boundary_direction(p) == "in"),
               key=_port_sort_key)
    )
    out_port_names = tuple(
        sorted((p for p in cdef.boundary if cdef.boundary_direction(p) == "out"),
               key=_port_sort_key)
    )

    nodes = [n for n in g.nodes if n.id not in membership]
    for i, em in enumerate(plan.occurrences):
        members = [g.node(h) for h in sorted(em.host_nodes)]
        position = None
        if all(m.position is not None for m in members):
            position = (
                sum(m.position[0] for m in members) / len(members),
                sum(m.position[1] for m in members) / len(members),
            )
        nodes.append(
            Node(
                id=instance_ids[i],
                kind=OPERATOR,
                type_label=cdef.type_id,
                in_ports=in_port_names,
                out_ports=out_port_names,
                position=position,
                size=COMPOSITE_SIZE if position is not None else None,
            )
        )

    def boundary_port(direction: str, occ: int, host_id: str, host_port: str) -> str:
        pattern_node = inverses[occ][host_id]
        key = (direction, plan.occurrences[0].nodes[pattern_node], host_port)
        if key not in attachment_to_port:
            raise StaleEmbedding(
                f"edge attaches at {host_id!r}:{host_port!r}, not a planned boundary"
            )
        return attachment_to_port[key]

    edges: list[Edge] = []
    for e in g.edges:
        si = membership.get(e.src[0])
        di = membership.get(e.dst[0])
        if si is not None and si == di:
            continue  # interior edge, represented by the composite's inner graph
        src, dst = e.src, e.dst
        if si is not None:
            src = (instance_ids[si], boundary_port("out", si, e.src[0], e.src[1]))
        if di is not None:
            dst = (instance_ids[di], boundary_port("in", di, e.dst[0], e.dst[1]))
        edges.append(replace(e, src=src, dst=dst))

    result = validate(
        replace(
            g,
            nodes=tuple(nodes),
            edges=tuple(edges),
            composites=g.composites + (cdef,),
        )
    )
    return result, cdef


def _port_sort_key(port: str) -> tuple:
    # p_in_10 sorts after p_in_2
    head, _, tail = port.rpartition("_")
    return (head, int(tail)) if tail.isdigit() else (port, 0)


# ---------------------------------------------------------------------------
# Metric deltas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsDelta:
    before: MetricsReport
    after: MetricsReport
    deltas: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "before": self.before.as_dict(),
            "after": self.after.as_dict(),
            "deltas": dict(self.deltas),
        }


def metrics_delta(
    g: ProjectGraph, g_after: ProjectGraph, weights: LayoutWeights | None = None
) -> MetricsDelta:
    before = compute_report(g, weights)
    after = compute_report(g_after, weights)
    return MetricsDelta(
        before=before,
        after=after,
        deltas={name: after.value(name) - before.value(name) for name in METRIC_COLUMNS},
    )


# ---------------------------------------------------------------------------
# Layout optimization
# ---------------------------------------------------------------------------

RANK_SPACING = 180.0
ROW_SPACING = 120.0
HILL_CLIMB_NODE_LIMIT = 150


def optimize_layout(
    g: ProjectGraph, weights: LayoutWeights | None = None, seed: int = 0
) -> ProjectGraph:
    """Re-place nodes without touching structure; the weighted layout score
    never increases (the input layout is kept when no candidate beats it)."""
    weights = weights or LayoutWeights()
    baseline = layout_quality(g, weights)  # also validates presence of layout
    if len(g.nodes) < 2:
        return g

    candidate = _layered_positions(g)
    if len(g.nodes) <= HILL_CLIMB_NODE_LIMIT:
        candidate = _hill_climb(candidate, weights, seed)
    return candidate if layout_quality(candidate, weights) <= baseline else g


def _scc_condensation(g: ProjectGraph) -> tuple[dict[str, int], list[set[int]]]:
    """Tarjan SCCs (iterative); returns node -> scc id and the successor sets."""
    order = sorted(n.id for n in g.nodes)
    succ = {nid: sorted({e.dst[0] for e in g.out_edges(nid)}) for nid in order}
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    scc_of: dict[str, int] = {}
    counter = 0
    scc_count = 0

    for root in order:
        if root in index:
            continue
        frames: list[list] = [[root, 0]]  # [node, next child index]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while frames:
            node, child_i = frames[-1]
            advanced = False
            children = succ[node]
            while child_i < len(children):
                w = children[child_i]
                child_i += 1
                if w not in index:
                    frames[-1][1] = child_i
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    frames.append([w, 0])
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    scc_of[top] = scc_count
                    if top == node:
                        break
                scc_count += 1

    succs: list[set[int]] = [set() for _ in range(scc_count)]
    for e in g.edges:
        a, b = scc_of[e.src[0]], scc_of[e.dst[0]]
        if a != b:
            succs[a].add(b)
    return scc_of, succs


def _layered_positions(g: ProjectGraph) -> ProjectGraph:
    scc_of, succs = _scc_condensation(g)
    n_scc = len(succs)
    indeg = [0] * n_scc
    for a in range(n_scc):
        for b in succs[a]:
            indeg[b] += 1
    rank = [0] * n_scc
    ready = [i for i in range(n_scc) if indeg[i] == 0]
    while ready:
        cur = ready.pop()
        for b in succs[cur]:
            rank[b] = max(rank[b], rank[cur] + 1)
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)

    node_rank = {n.id: rank[scc_of[n.id]] for n in g.nodes}
    layers: dict[int, list[str]] = {}
    for n in sorted(g.nodes, key=lambda n: n.id):
        layers.setdefault(node_rank[n.id], []).append(n.id)

    order = {nid: i for layer in layers.values() for i, nid in enumerate(layer)}
    neighbors: dict[str, list[str]] = {n.id: [] for n in g.nodes}
    for e in g.edges:
        neighbors[e.src[0]].append(e.dst[0])
        neighbors[e.dst[0]].append(e.src[0])

    for _ in range(4):  # barycenter sweeps
        for r in sorted(layers):
            members = layers[r]
            keys = {}
            for nid in members:
                adjacent = [order[m] for m in neighbors[nid] if node_rank[m] != r]
                keys[nid] = (
                    sum(adjacent) / len(adjacent) if adjacent else order[nid],
                    nid,
                )
            members.sort(key=lambda nid: keys[nid])
            for i, nid in enumerate(members):
                order[nid] = i

    positions: dict[str, tuple[float, float]] = {}
    for r, members in layers.items():
        offset = (len(members) - 1) / 2.0
        for i, nid in enumerate(members):
            positions[nid] = (r * RANK_SPACING, (i - offset) * ROW_SPACING)
    return g.with_nodes(
        replace(n, position=positions[n.id]) for n in g.nodes
    )


_MOVE_OFFSETS = [
    (dx, dy)
    for dx in (-RANK_SPACING, -60.0, 0.0, 60.0, RANK_SPACING)
    for dy in (-ROW_SPACING, -60.0, 0.0, 60.0, ROW_SPACING)
    if (dx, dy) != (0.0, 0.0)
]


def _hill_climb(g: ProjectGraph, weights: LayoutWeights, seed: int) -> ProjectGraph:
    rng = random.Random(seed)
    current = g
    score = layout_quality(current, weights)
    for _ in range(2):
        improved = False
        node_ids = sorted(n.id for n in current.nodes)
        rng.shuffle(node_ids)
        for nid in node_ids:
            node = current.node(nid)
            best_candidate = None
            best_score = score
            for dx, dy in _MOVE_OFFSETS:
                moved = current.with_nodes(
                    replace(n, position=(n.position[0] + dx, n.position[1] + dy))
                    if n.id == nid
                    else n
                    for n in current.nodes
                )
                s = layout_quality(moved, weights)
                if s < best_score - 1e-12:
                    best_score = s
                    best_candidate = moved
            if best_candidate is not None:
                current = best_candidate
                score = best_score
                improved = True
        if not improved:
            break
    return current
