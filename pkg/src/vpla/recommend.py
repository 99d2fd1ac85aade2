"""Online next-block recommendations.

Pipeline per query: extract the upstream graph feeding the selected node,
score every structural-table row by edit distance between that reference and
the row's upstream pattern, merge rows proposing the same candidate (summed
confidence, minimum distance), and rank ascending by distance with summed
confidence as tie-breaker.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .ged import DEFAULT_EXACT_CUTOFF, EditCosts, ged_exact, ged_upper_bound
from .graphs import ProjectGraph, induced_subgraph
from .mining import StructuralTable, StructuralTableRow, canonical_form, strip_for_mining

DEFAULT_MAX_NODES = 10
DEFAULT_MAX_HOPS = 3
DEFAULT_K = 5


class UnknownNode(KeyError):
    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id


def upstream_graph(
    g: ProjectGraph,
    selected: str,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> ProjectGraph:
    """Ancestor subgraph of the selected node: reversed BFS up to
    ``max_hops``, truncated to the ``max_nodes`` closest nodes (layer order,
    ties by node id), induced edges included. Tolerates cycles."""
    if not g.has_node(selected):
        raise UnknownNode(selected)
    layer = [selected]
    seen = {selected}
    kept: list[str] = []
    for _ in range(max_hops + 1):
        for nid in layer:
            if len(kept) < max_nodes:
                kept.append(nid)
        nxt = sorted(
            {
                e.src[0]
                for nid in layer
                for e in g.in_edges(nid)
                if e.src[0] not in seen
            }
        )
        seen.update(nxt)
        if not nxt or len(kept) >= max_nodes:
            break
        layer = nxt
    return induced_subgraph(g, set(kept), project_id=f"{g.project_id}:upstream:{selected}")


@dataclass(frozen=True)
class Recommendation:
    candidate_kind: str
    candidate_type: str
    edge_template: tuple[tuple[str, str], ...]  # sorted (dir, upstream peer) pairs
    min_ged: float
    summed_confidence: float
    contributing_rows: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "candidate": {
                "kind": self.candidate_kind,
                "type": self.candidate_type,
                "edges": [{"dir": d, "peer": p} for d, p in self.edge_template],
            },
            "min_ged": self.min_ged,
            "summed_confidence": self.summed_confidence,
            "contributing_rows": list(self.contributing_rows),
        }


class TableIndex:
    """Query-side view of a structural table: rows grouped by upstream
    pattern so each distinct upstream is scored once per query."""

    def __init__(self, table: StructuralTable):
        self.table = table
        self.groups: dict[str, tuple[ProjectGraph, list[int]]] = {}
        for i, row in enumerate(table.rows):
            if row.upstream_code not in self.groups:
                self.groups[row.upstream_code] = (row.upstream, [])
            self.groups[row.upstream_code][1].append(i)

    @cached_property
    def row_count(self) -> int:
        return len(self.table.rows)


def _candidate_identity(row: StructuralTableRow) -> tuple:
    """Merge key: users pick a block type from the palette, not a node id,
    so identity is the label plus the multiset of connecting-edge shapes."""
    return (
        row.candidate_kind,
        row.candidate_type,
        tuple(sorted((e.dir, e.peer) for e in row.candidate_edges)),
    )


def recommend(
    g: ProjectGraph,
    selected: str,
    table: StructuralTable | TableIndex,
    k: int = DEFAULT_K,
    costs: EditCosts | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> list[Recommendation]:
    """Top-k next-block recommendations for the selected node."""
    if k < 1:
        raise ValueError("k must be >= 1")
    index = table if isinstance(table, TableIndex) else TableIndex(table)
    if not index.table.rows:
        return []
    costs = costs or EditCosts()

    reference = strip_for_mining(upstream_graph(g, selected, max_nodes, max_hops))
    ref_code = canonical_form(reference)[0] if reference.nodes else ""
    ref_size = len(reference.nodes)

    distance_by_code: dict[str, float] = {}
    for code, (upstream, _) in index.groups.items():
        if code == ref_code:
            distance_by_code[code] = 0.0
        elif max(ref_size, len(upstream.nodes)) <= DEFAULT_EXACT_CUTOFF:
            distance_by_code[code] = ged_exact(reference, upstream, costs)
        else:
            distance_by_code[code] = ged_upper_bound(reference, upstream, costs)

    merged: dict[tuple, dict] = {}
    for code, (_, row_indices) in index.groups.items():
        d = distance_by_code[code]
        for i in row_indices:
            row = index.table.rows[i]
            key = _candidate_identity(row)
            slot = merged.setdefault(
                key, {"min_ged": d, "confidence": 0.0, "rows": []}
            )
            slot["min_ged"] = min(slot["min_ged"], d)
            slot["confidence"] += row.confidence
            slot["rows"].append(i)

    recs = [
        Recommendation(
            candidate_kind=key[0],
            candidate_type=key[1],
            edge_template=key[2],
            min_ged=slot["min_ged"],
            summed_confidence=slot["confidence"],
            contributing_rows=tuple(sorted(slot["rows"])),
        )
        for key, slot in merged.items()
    ]
    recs.sort(
        key=lambda r: (
            r.min_ged,
            -r.summed_confidence,
            r.candidate_type,
            r.candidate_kind,
            r.edge_template,
        )
    )
    return recs[:k]
