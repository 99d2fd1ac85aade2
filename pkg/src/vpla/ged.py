"""Graph edit distance between labeled directed graphs.

The distance is the minimum total cost of node/edge insertions, deletions,
and substitutions transforming one graph into the other. Exact values come
from best-first search over partial node assignments with an admissible
lower bound; an always-available greedy upper bound covers graphs above the
exactness cutoff.

Graphs are compared at the same abstraction mining uses: (kind, type) node
labels and deduplicated directed adjacency. Under the default unit costs the
distance counts edit steps, with substitutions free between identical labels.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from .graphs import ProjectGraph

DEFAULT_EXACT_CUTOFF = 8


class SizeExceedsCutoff(ValueError):
    pass


@dataclass(frozen=True)
class EditCosts:
    node_insert: float = 1.0
    node_delete: float = 1.0
    node_substitute: float = 1.0  # charged only when (kind, type) differ
    edge_insert: float = 1.0
    edge_delete: float = 1.0
    edge_substitute: float = 1.0  # charged only when direction-respecting labels differ

    def __post_init__(self):
        for name in (
            "node_insert",
            "node_delete",
            "node_substitute",
            "edge_insert",
            "edge_delete",
            "edge_substitute",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"edit cost {name} must be >= 0")


class _View:
    """Index-based view: labels as ints, adjacency as bitmasks."""

    __slots__ = ("n", "labels", "out_mask", "in_mask", "edge_label", "edge_count")

    def __init__(self, g: ProjectGraph, intern: dict[tuple[str, str], int]):
        ids = sorted(n.id for n in g.nodes)
        index = {nid: i for i, nid in enumerate(ids)}
        self.n = len(ids)
        self.labels = []
        for nid in ids:
            lab = g.node(nid).label
            if lab not in intern:
                intern[lab] = len(intern)
            self.labels.append(intern[lab])
        self.out_mask = [0] * self.n
        self.in_mask = [0] * self.n
        self.edge_label: dict[tuple[int, int], str | None] = {}
        labels_by_arc: dict[tuple[int, int], list[str]] = {}
        for e in g.edges:
            u, v = index[e.src[0]], index[e.dst[0]]
            if u == v:
                continue
            labels_by_arc.setdefault((u, v), [])
            if e.label is not None:
                labels_by_arc[(u, v)].append(e.label)
        for (u, v), labels in labels_by_arc.items():
            self.out_mask[u] |= 1 << v
            self.in_mask[v] |= 1 << u
            # parallel edges collapse; keep the smallest label for determinism
            self.edge_label[(u, v)] = min(labels) if labels else None
        self.edge_count = len(labels_by_arc)

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_mask[u] >> v & 1)

    def degree(self, i: int) -> tuple[int, int]:
        return (bin(self.in_mask[i]).count("1"), bin(self.out_mask[i]).count("1"))


def _node_lower_bound(
    labels1: list[int], labels2: list[int], costs: EditCosts
) -> float:
    """Exact minimum of the node-only relaxation: same-label pairs are free,
    mismatched pairs cost min(substitute, delete+insert), surplus nodes cost
    delete/insert."""
    c1: dict[int, int] = {}
    c2: dict[int, int] = {}
    for lab in labels1:
        c1[lab] = c1.get(lab, 0) + 1
    for lab in labels2:
        c2[lab] = c2.get(lab, 0) + 1
    overlap = sum(min(c, c2.get(lab, 0)) for lab, c in c1.items())
    r1, r2 = len(labels1), len(labels2)
    sub = min(costs.node_substitute, costs.node_delete + costs.node_insert)
    best = float("inf")
    for k in range(min(r1, r2) + 1):
        pairs_mismatched = max(0, k - overlap)
        cost = (
            pairs_mismatched * sub
            + (r1 - k) * costs.node_delete
            + (r2 - k) * costs.node_insert
        )
        best = min(best, cost)
    return best


def ged_exact(
    g1: ProjectGraph,
    g2: ProjectGraph,
    costs: EditCosts | None = None,
    exact_cutoff: int = DEFAULT_EXACT_CUTOFF,
) -> float:
    """Minimum edit cost over all node mappings (including to/from epsilon)."""
    if max(len(g1.nodes), len(g2.nodes)) > exact_cutoff:
        raise SizeExceedsCutoff(
            f"graphs exceed the exact-search cutoff of {exact_cutoff} nodes"
        )
    costs = costs or EditCosts()
    intern: dict[tuple[str, str], int] = {}
    a = _View(g1, intern)
    b = _View(g2, intern)

    full_b = (1 << b.n) - 1

    if a.n == 0:
        return b.n * costs.node_insert + b.edge_count * costs.edge_insert

    def transition_cost(mapping: tuple[int, ...], i: int, j: int) -> float:
        """Cost of assigning a-node i -> b-node j (or -1 for deletion),
        including all edge costs decidable at this point."""
        cost = 0.0
        if j < 0:
            cost += costs.node_delete
        else:
            if a.labels[i] != b.labels[j]:
                cost += costs.node_substitute
        for k in range(i):
            m = mapping[k]
            for (x, y) in ((i, k), (k, i)):
                e1 = a.has_arc(x, y)
                if j < 0 or m < 0:
                    if e1:
                        cost += costs.edge_delete
                    continue
                jx = j if x == i else m
                jy = j if y == i else m
                e2 = b.has_arc(jx, jy)
                if e1 and e2:
                    if a.edge_label.get((x, y)) != b.edge_label.get((jx, jy)):
                        cost += costs.edge_substitute
                elif e1:
                    cost += costs.edge_delete
                elif e2:
                    cost += costs.edge_insert
        return cost

    def completion_cost(used: int) -> float:
        """All a-nodes assigned: remaining b-nodes and their edges are inserted."""
        cost = 0.0
        unused = full_b & ~used
        for j in range(b.n):
            if unused >> j & 1:
                cost += costs.node_insert
        for (u, v) in b.edge_label:
            if (unused >> u & 1) or (unused >> v & 1):
                cost += costs.edge_insert
        return cost

    def heuristic(i: int, used: int) -> float:
        rem1 = list(range(i, a.n))
        labels1 = [a.labels[k] for k in rem1]
        labels2 = [b.labels[j] for j in range(b.n) if not (used >> j & 1)]
        h = _node_lower_bound(labels1, labels2, costs)
        rem1_set = set(rem1)
        a1 = sum(
            1 for (u, v) in a.edge_label if u in rem1_set or v in rem1_set
        )
        a2 = sum(
            1
            for (u, v) in b.edge_label
            if not (used >> u & 1) or not (used >> v & 1)
        )
        h += max(0, a1 - a2) * costs.edge_delete + max(0, a2 - a1) * costs.edge_insert
        return h

    # state: (f, tiebreak, g, i, mapping tuple, used mask)
    counter = 0
    start_h = heuristic(0, 0)
    heap: list[tuple[float, int, float, int, tuple[int, ...], int]] = [
        (start_h, counter, 0.0, 0, (), 0)
    ]
    while heap:
        f, _, gcost, i, mapping, used = heapq.heappop(heap)
        if i == a.n:
            return gcost
        choices: list[int] = [-1] + [j for j in range(b.n) if not (used >> j & 1)]
        for j in choices:
            step = transition_cost(mapping, i, j)
            new_used = used | (1 << j) if j >= 0 else used
            new_mapping = mapping + (j,)
            new_g = gcost + step
            if i + 1 == a.n:
                new_g += completion_cost(new_used)
                h = 0.0
            else:
                h = heuristic(i + 1, new_used)
            counter += 1
            heapq.heappush(heap, (new_g + h, counter, new_g, i + 1, new_mapping, new_used))
    raise AssertionError("search exhausted without reaching a complete mapping")


def mapping_cost(
    g1: ProjectGraph,
    g2: ProjectGraph,
    node_mapping: dict[str, str],
    costs: EditCosts | None = None,
) -> float:
    """Total edit cost of one explicit node mapping (unmapped nodes are
    deleted/inserted). Any mapping's cost is an upper bound on the distance."""
    costs = costs or EditCosts()
    intern: dict[tuple[str, str], int] = {}
    a = _View(g1, intern)
    b = _View(g2, intern)
    ids1 = sorted(n.id for n in g1.nodes)
    ids2 = sorted(n.id for n in g2.nodes)
    idx1 = {nid: i for i, nid in enumerate(ids1)}
    idx2 = {nid: i for i, nid in enumerate(ids2)}
    mapped = {idx1[u]: idx2[v] for u, v in node_mapping.items()}

    cost = 0.0
    for i in range(a.n):
        if i not in mapped:
            cost += costs.node_delete
        elif a.labels[i] != b.labels[mapped[i]]:
            cost += costs.node_substitute
    used = set(mapped.values())
    cost += (b.n - len(used)) * costs.node_insert

    for (u, v), label in a.edge_label.items():
        if u in mapped and v in mapped and b.has_arc(mapped[u], mapped[v]):
            if label != b.edge_label.get((mapped[u], mapped[v])):
                cost += costs.edge_substitute
        else:
            cost += costs.edge_delete
    inv = {j: i for i, j in mapped.items()}
    for (u, v) in b.edge_label:
        if u in inv and v in inv and a.has_arc(inv[u], inv[v]):
            continue  # matched or substituted above
        cost += costs.edge_insert
    return cost


def ged_upper_bound(
    g1: ProjectGraph, g2: ProjectGraph, costs: EditCosts | None = None
) -> float:
    """Greedy label-aware bound: >= the exact distance, 0 on identical inputs.

    Equal-label nodes are matched by (in, out) degree similarity; the result
    is the full cost of that one mapping.
    """
    costs = costs or EditCosts()
    if _identical(g1, g2):
        return 0.0

    deg1 = _degrees(g1)
    deg2 = _degrees(g2)
    by_label: dict[tuple[str, str], list[str]] = {}
    for n in g2.nodes:
        by_label.setdefault(n.label, []).append(n.id)
    for ids in by_label.values():
        ids.sort(key=lambda nid: (deg2[nid], nid))

    mapping: dict[str, str] = {}
    taken: set[str] = set()
    for n in sorted(g1.nodes, key=lambda n: (n.label, deg1[n.id], n.id)):
        candidates = [c for c in by_label.get(n.label, ()) if c not in taken]
        if not candidates:
            continue
        d = deg1[n.id]
        best = min(
            candidates,
            key=lambda c: (abs(deg2[c][0] - d[0]) + abs(deg2[c][1] - d[1]), c),
        )
        mapping[n.id] = best
        taken.add(best)
    return mapping_cost(g1, g2, mapping, costs)


def _degrees(g: ProjectGraph) -> dict[str, tuple[int, int]]:
    arcs = {(e.src[0], e.dst[0]) for e in g.edges if e.src[0] != e.dst[0]}
    deg = {n.id: [0, 0] for n in g.nodes}
    for u, v in arcs:
        deg[v][0] += 1
        deg[u][1] += 1
    return {k: (v[0], v[1]) for k, v in deg.items()}


def _identical(g1: ProjectGraph, g2: ProjectGraph) -> bool:
    nodes1 = sorted((n.id, n.kind, n.type_label) for n in g1.nodes)
    nodes2 = sorted((n.id, n.kind, n.type_label) for n in g2.nodes)
    if nodes1 != nodes2:
        return False
    arcs1 = sorted({(e.src[0], e.dst[0], e.label) for e in g1.edges if e.src[0] != e.dst[0]})
    arcs2 = sorted({(e.src[0], e.dst[0], e.label) for e in g2.edges if e.src[0] != e.dst[0]})
    return arcs1 == arcs2
