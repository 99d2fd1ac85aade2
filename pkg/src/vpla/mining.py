"""Frequent subgraph mining and the structural rule table.

Two mining modes: transaction-based (patterns that recur across a corpus of
projects, support = number of containing projects) and single-graph (patterns
that repeat within one project, support = greedy vertex-disjoint occurrence
count). Patterns are grown edge-by-edge with anti-monotone pruning and
deduplicated by a minimum-DFS-code canonical form, so isomorphic patterns are
reported once.

Mining runs on a stripped view of the graphs: node labels are (kind, type),
ports become wildcards, parallel edges collapse, and positions/params are
dropped. Finer granularity would need far larger corpora to produce reliable
rules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from .graphs import (
    WILDCARD_PORT,
    Edge,
    Embedding,
    Node,
    PatternDisconnected,
    ProjectGraph,
    find_embeddings,
    induced_subgraph,
    is_weakly_connected,
    parse_project,
    serialize_project,
    validate,
)

Label = tuple[str, str]  # (kind, type_label)


class EmptyCorpus(ValueError):
    pass


class InvalidMinsup(ValueError):
    pass


# ---------------------------------------------------------------------------
# Stripped mining view
# ---------------------------------------------------------------------------


def strip_for_mining(g: ProjectGraph) -> ProjectGraph:
    """Label graph used for mining and edit distance: (kind, type) labels,
    wildcard ports, deduplicated edges, no layout, no params, no self-loops."""
    nodes = tuple(
        Node(
            id=n.id,
            kind=n.kind,
            type_label=n.type_label,
            in_ports=(WILDCARD_PORT,),
            out_ports=(WILDCARD_PORT,),
        )
        for n in g.nodes
    )
    arcs = sorted({(e.src[0], e.dst[0]) for e in g.edges if e.src[0] != e.dst[0]})
    edges = tuple(
        Edge(src=(u, WILDCARD_PORT), dst=(v, WILDCARD_PORT)) for u, v in arcs
    )
    return ProjectGraph(project_id=g.project_id, nodes=nodes, edges=edges)


def _arcs(g: ProjectGraph) -> list[tuple[str, str]]:
    return sorted({(e.src[0], e.dst[0]) for e in g.edges if e.src[0] != e.dst[0]})


# ---------------------------------------------------------------------------
# Minimum DFS code (canonical form)
# ---------------------------------------------------------------------------
#
# A code is a sequence of entries (i, j, label_i, direction, label_j) where
# i/j are DFS discovery indices and direction says whether the arc runs
# i->j (0) or j->i (1). Codes are compared entry-wise; the minimum over all
# valid DFS traversals is a canonical form: equal exactly for isomorphic
# patterns.

Entry = tuple[int, int, Label, int, Label]


def _entry_less(a: Entry, b: Entry) -> bool:
    ai, aj = a[0], a[1]
    bi, bj = b[0], b[1]
    a_fwd = ai < aj
    b_fwd = bi < bj
    if a_fwd and b_fwd:
        if (aj, -ai) != (bj, -bi):
            return (aj, -ai) < (bj, -bi)
        return a[2:] < b[2:]
    if not a_fwd and not b_fwd:
        if (ai, aj) != (bi, bj):
            return (ai, aj) < (bi, bj)
        return a[2:] < b[2:]
    if not a_fwd:  # a backward, b forward
        return ai < bj
    return aj <= bi  # a forward, b backward


def _min_entry(entries: list[Entry]) -> Entry:
    best = entries[0]
    for e in entries[1:]:
        if _entry_less(e, best):
            best = e
    return best


@dataclass(frozen=True)
class _Projection:
    nodes: tuple[str, ...]  # DFS index -> graph node id
    used: frozenset[tuple[str, str]]


def canonical_form(g: ProjectGraph) -> tuple[str, tuple[str, ...]]:
    """Minimum DFS code and the node order realizing it.

    Returns (code string, node ids in DFS discovery order). Raises
    PatternDisconnected for disconnected or empty inputs.
    """
    if not g.nodes:
        raise PatternDisconnected("empty pattern")
    if not is_weakly_connected(g):
        raise PatternDisconnected("pattern must be weakly connected")
    labels = {n.id: n.label for n in g.nodes}
    arcs = set(_arcs(g))
    if not arcs:
        only = g.nodes[0]
        return (json.dumps(["v", list(only.label)], separators=(",", ":")), (only.id,))

    und: dict[str, set[str]] = {n.id: set() for n in g.nodes}
    for u, v in arcs:
        und[u].add(v)
        und[v].add(u)

    # seed with the minimal single-entry code over both arc orientations
    first: dict[Entry, list[_Projection]] = {}
    for u, v in sorted(arcs):
        for a, b, d in ((u, v, 0), (v, u, 1)):
            entry: Entry = (0, 1, labels[a], d, labels[b])
            first.setdefault(entry, []).append(
                _Projection(nodes=(a, b), used=frozenset({(u, v)}))
            )
    entry = _min_entry(list(first))
    code = [entry]
    projections = first[entry]

    while len(code) < len(arcs):
        rmpath_vertices = _rightmost_path(code)  # DFS indices, rightmost first
        maxtoc = rmpath_vertices[0]
        candidates: dict[Entry, list[_Projection]] = {}
        for proj in projections:
            right = proj.nodes[maxtoc]
            for idx in rmpath_vertices[1:]:  # backward targets, excluding self
                w = proj.nodes[idx]
                for a, b, d in ((right, w, 0), (w, right, 1)):
                    if (a, b) in arcs and (a, b) not in proj.used:
                        e: Entry = (maxtoc, idx, labels[right], d, labels[w])
                        candidates.setdefault(e, []).append(
                            _Projection(proj.nodes, proj.used | {(a, b)})
                        )
            visited = set(proj.nodes)
            for idx in rmpath_vertices:  # forward from any rightmost-path vertex
                u = proj.nodes[idx]
                for w in sorted(und[u] - visited):
                    for a, b, d in ((u, w, 0), (w, u, 1)):
                        if (a, b) in arcs and (a, b) not in proj.used:
                            e = (idx, maxtoc + 1, labels[u], d, labels[w])
                            candidates.setdefault(e, []).append(
                                _Projection(proj.nodes + (w,), proj.used | {(a, b)})
                            )
        if not candidates:
            raise AssertionError("DFS code construction stalled on a connected graph")
        entry = _min_entry(list(candidates))
        code.append(entry)
        projections = candidates[entry]

    order = min(p.nodes for p in projections)
    code_json = json.dumps(
        [[i, j, list(li), d, list(lj)] for (i, j, li, d, lj) in code],
        separators=(",", ":"),
    )
    return code_json, order


def _rightmost_path(code: list[Entry]) -> list[int]:
    """DFS indices on the rightmost path, from the rightmost vertex to root."""
    path: list[int] = []
    last_frm: int | None = None
    for entry in reversed(code):
        i, j = entry[0], entry[1]
        if i < j and (last_frm is None or j == last_frm):
            if not path:
                path.append(j)
            path.append(i)
            last_frm = i
    return path


def canonical_code(pattern: ProjectGraph) -> str:
    return canonical_form(pattern)[0]


def pattern_from_code(code_json: str) -> ProjectGraph:
    """Rebuild the canonical pattern graph (node ids n0, n1, ...) from a code."""
    decoded = json.loads(code_json)
    labels: dict[int, Label] = {}
    arcs: set[tuple[int, int]] = set()
    if decoded and decoded[0] == "v":
        labels[0] = tuple(decoded[1])
    else:
        for i, j, li, d, lj in decoded:
            labels.setdefault(i, tuple(li))
            labels.setdefault(j, tuple(lj))
            arcs.add((i, j) if d == 0 else (j, i))
    nodes = tuple(
        Node(
            id=f"n{i}",
            kind=labels[i][0],
            type_label=labels[i][1],
            in_ports=(WILDCARD_PORT,),
            out_ports=(WILDCARD_PORT,),
        )
        for i in sorted(labels)
    )
    edges = tuple(
        Edge(src=(f"n{u}", WILDCARD_PORT), dst=(f"n{v}", WILDCARD_PORT))
        for u, v in sorted(arcs)
    )
    return ProjectGraph(project_id="pattern", nodes=nodes, edges=edges)


# ---------------------------------------------------------------------------
# Frequent subgraphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequentSubgraph:
    pattern: ProjectGraph  # canonical stripped pattern, node ids n0..nk
    canonical_code: str
    support: int
    embeddings_by_project: dict[str, tuple[Embedding, ...]] = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.pattern.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.pattern.edges)


def _label_arc_types(stripped: list[ProjectGraph]) -> set[tuple[Label, Label]]:
    types: set[tuple[Label, Label]] = set()
    for g in stripped:
        for u, v in _arcs(g):
            types.add((g.node(u).label, g.node(v).label))
    return types


def _grow_candidates(
    pattern: ProjectGraph,
    arc_types: set[tuple[Label, Label]],
    max_pattern_nodes: int,
) -> list[ProjectGraph]:
    """All single-edge extensions of a pattern whose new arc type occurs in
    the data: a new node attached in either direction, or a new arc between
    existing nodes."""
    out: list[ProjectGraph] = []
    existing = {(e.src[0], e.dst[0]) for e in pattern.edges}
    labels = sorted({lab for pair in arc_types for lab in pair})
    next_id = f"n{len(pattern.nodes)}"
    if len(pattern.nodes) < max_pattern_nodes:
        for n in pattern.nodes:
            for lab in labels:
                if (n.label, lab) in arc_types:
                    out.append(_with_new_node(pattern, next_id, lab, src=n.id))
                if (lab, n.label) in arc_types:
                    out.append(_with_new_node(pattern, next_id, lab, dst=n.id))
    for a in pattern.nodes:
        for b in pattern.nodes:
            if a.id == b.id or (a.id, b.id) in existing:
                continue
            if (a.label, b.label) in arc_types:
                out.append(
                    ProjectGraph(
                        project_id=pattern.project_id,
                        nodes=pattern.nodes,
                        edges=pattern.edges
                        + (Edge(src=(a.id, WILDCARD_PORT), dst=(b.id, WILDCARD_PORT)),),
                    )
                )
    return out


def _with_new_node(
    pattern: ProjectGraph, new_id: str, label: Label, src: str | None = None, dst: str | None = None
) -> ProjectGraph:
    node = Node(
        id=new_id,
        kind=label[0],
        type_label=label[1],
        in_ports=(WILDCARD_PORT,),
        out_ports=(WILDCARD_PORT,),
    )
    if src is not None:
        edge = Edge(src=(src, WILDCARD_PORT), dst=(new_id, WILDCARD_PORT))
    else:
        edge = Edge(src=(new_id, WILDCARD_PORT), dst=(dst, WILDCARD_PORT))
    return ProjectGraph(
        project_id=pattern.project_id,
        nodes=pattern.nodes + (node,),
        edges=pattern.edges + (edge,),
    )


def default_minsup(corpus_size: int) -> int:
    """ceil(5% of corpus size), floor 2: balances rule count vs overfitting."""
    return max(2, math.ceil(0.05 * corpus_size))


def mine_frequent(
    corpus: list[ProjectGraph],
    minsup: int,
    max_pattern_nodes: int = 6,
) -> list[FrequentSubgraph]:
    """Transaction-based FSM: connected patterns (>=2 nodes, >=1 edge)
    contained in at least ``minsup`` corpus projects."""
    if not corpus:
        raise EmptyCorpus("corpus must not be empty")
    if not isinstance(minsup, int) or minsup < 2:
        raise InvalidMinsup(f"minsup must be an integer >= 2, got {minsup!r}")
    if max_pattern_nodes < 2:
        raise ValueError("max_pattern_nodes must be >= 2")

    stripped = [strip_for_mining(g) for g in corpus]
    arc_types = _label_arc_types(stripped)

    # seed: single-arc patterns
    seeds: dict[str, tuple[ProjectGraph, list[int]]] = {}
    for la, lb in sorted(arc_types):
        pattern = ProjectGraph(
            project_id="pattern",
            nodes=(
                Node("n0", la[0], la[1], (WILDCARD_PORT,), (WILDCARD_PORT,)),
                Node("n1", lb[0], lb[1], (WILDCARD_PORT,), (WILDCARD_PORT,)),
            ),
            edges=(Edge(src=("n0", WILDCARD_PORT), dst=("n1", WILDCARD_PORT)),),
        )
        code, _ = canonical_form(pattern)
        supporters = [i for i, h in enumerate(stripped) if find_embeddings(pattern, h, limit=1)]
        if len(supporters) >= minsup and code not in seeds:
            seeds[code] = (pattern_from_code(code), supporters)

    results: list[FrequentSubgraph] = []
    seen: set[str] = set(seeds)
    frontier = sorted(seeds.items())
    while frontier:
        next_frontier: dict[str, tuple[ProjectGraph, list[int]]] = {}
        for code, (pattern, supporters) in frontier:
            witnesses = {
                stripped[i].project_id: tuple(find_embeddings(pattern, stripped[i], limit=1))
                for i in supporters
            }
            results.append(
                FrequentSubgraph(
                    pattern=pattern,
                    canonical_code=code,
                    support=len(supporters),
                    embeddings_by_project=witnesses,
                )
            )
            for candidate in _grow_candidates(pattern, arc_types, max_pattern_nodes):
                cand_code, _ = canonical_form(candidate)
                if cand_code in seen:
                    continue
                seen.add(cand_code)
                canonical = pattern_from_code(cand_code)
                cand_supporters = [
                    i for i in supporters if find_embeddings(canonical, stripped[i], limit=1)
                ]
                if len(cand_supporters) >= minsup:
                    next_frontier[cand_code] = (canonical, cand_supporters)
        frontier = sorted(next_frontier.items())

    results.sort(key=lambda f: (f.num_nodes, f.num_edges, f.canonical_code))
    return results


def greedy_disjoint(embeddings: list[Embedding]) -> list[Embedding]:
    """Vertex-disjoint subset chosen greedily in lexicographic order of the
    sorted host-node sets. Keying on the node set (not the node map) makes
    the count independent of the pattern's node numbering; embeddings on the
    same node set conflict with exactly the same others."""
    ordered = sorted(embeddings, key=lambda em: (tuple(sorted(em.host_nodes)), em.node_map))
    chosen: list[Embedding] = []
    taken: set[str] = set()
    for em in ordered:
        if not (em.host_nodes & taken):
            chosen.append(em)
            taken.update(em.host_nodes)
    return chosen


def mine_single_graph(
    g: ProjectGraph,
    min_occurrences: int = 2,
    max_pattern_nodes: int = 6,
) -> list[FrequentSubgraph]:
    """Single-graph FSM: patterns whose greedy vertex-disjoint occurrence
    count within ``g`` is at least ``min_occurrences``."""
    if min_occurrences < 2:
        raise InvalidMinsup(f"min_occurrences must be >= 2, got {min_occurrences!r}")
    host = strip_for_mining(g)
    arc_types = _label_arc_types([host])

    results: list[FrequentSubgraph] = []
    seen: set[str] = set()
    frontier: list[tuple[str, ProjectGraph]] = []
    for la, lb in sorted(arc_types):
        pattern = ProjectGraph(
            project_id="pattern",
            nodes=(
                Node("n0", la[0], la[1], (WILDCARD_PORT,), (WILDCARD_PORT,)),
                Node("n1", lb[0], lb[1], (WILDCARD_PORT,), (WILDCARD_PORT,)),
            ),
            edges=(Edge(src=("n0", WILDCARD_PORT), dst=("n1", WILDCARD_PORT)),),
        )
        code, _ = canonical_form(pattern)
        if code not in seen:
            seen.add(code)
            frontier.append((code, pattern_from_code(code)))
    frontier.sort()

    while frontier:
        next_frontier: list[tuple[str, ProjectGraph]] = []
        for code, pattern in frontier:
            embeddings = find_embeddings(pattern, host)
            # total embedding count bounds the disjoint count from above,
            # so it is a safe anti-monotone pruning criterion
            if len(embeddings) < min_occurrences:
                continue
            disjoint = greedy_disjoint(embeddings)
            if len(disjoint) >= min_occurrences:
                results.append(
                    FrequentSubgraph(
                        pattern=pattern,
                        canonical_code=code,
                        support=len(disjoint),
                        embeddings_by_project={g.project_id: tuple(disjoint)},
                    )
                )
            for candidate in _grow_candidates(pattern, arc_types, max_pattern_nodes):
                cand_code, _ = canonical_form(candidate)
                if cand_code not in seen:
                    seen.add(cand_code)
                    next_frontier.append((cand_code, pattern_from_code(cand_code)))
        next_frontier.sort()
        frontier = next_frontier

    results.sort(key=lambda f: (f.num_nodes, f.num_edges, f.canonical_code))
    return results


# ---------------------------------------------------------------------------
# Structural table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateEdge:
    dir: str  # "in": upstream peer -> candidate; "out": candidate -> peer
    peer: str  # node id in the canonical upstream pattern

    def as_dict(self) -> dict[str, str]:
        return {"dir": self.dir, "peer": self.peer}


@dataclass(frozen=True)
class StructuralTableRow:
    upstream: ProjectGraph  # canonical stripped pattern
    upstream_code: str
    candidate_kind: str
    candidate_type: str
    candidate_edges: tuple[CandidateEdge, ...]
    confidence: float
    support_full: int
    support_upstream: int

    @property
    def candidate_signature(self) -> tuple:
        return (
            self.candidate_kind,
            self.candidate_type,
            tuple(sorted((e.dir, e.peer) for e in self.candidate_edges)),
        )


@dataclass(frozen=True)
class StructuralTable:
    rows: tuple[StructuralTableRow, ...]
    provenance: dict[str, object] = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "provenance": dict(self.provenance),
            "rows": [
                {
                    "upstream": serialize_project(r.upstream),
                    "candidate": {
                        "kind": r.candidate_kind,
                        "type": r.candidate_type,
                        "edges": [e.as_dict() for e in r.candidate_edges],
                    },
                    "confidence": r.confidence,
                    "support_full": r.support_full,
                    "support_upstream": r.support_upstream,
                }
                for r in self.rows
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=indent)

    @staticmethod
    def from_document(doc: dict) -> "StructuralTable":
        rows = []
        for obj in doc.get("rows", []):
            upstream = validate(parse_project(obj["upstream"]))
            code, _ = canonical_form(upstream)
            cand = obj["candidate"]
            rows.append(
                StructuralTableRow(
                    upstream=upstream,
                    upstream_code=code,
                    candidate_kind=str(cand["kind"]),
                    candidate_type=str(cand["type"]),
                    candidate_edges=tuple(
                        CandidateEdge(dir=str(e["dir"]), peer=str(e["peer"]))
                        for e in cand.get("edges", [])
                    ),
                    confidence=float(obj["confidence"]),
                    support_full=int(obj["support_full"]),
                    support_upstream=int(obj["support_upstream"]),
                )
            )
        return StructuralTable(rows=tuple(rows), provenance=dict(doc.get("provenance", {})))

    @staticmethod
    def from_json(text: str | bytes) -> "StructuralTable":
        return StructuralTable.from_document(json.loads(text))


def _label_project_support(stripped: list[ProjectGraph]) -> dict[Label, int]:
    support: dict[Label, int] = {}
    for g in stripped:
        for lab in {n.label for n in g.nodes}:
            support[lab] = support.get(lab, 0) + 1
    return support


def build_structural_table(
    patterns: list[FrequentSubgraph],
    corpus: list[ProjectGraph],
    provenance: dict[str, object] | None = None,
) -> StructuralTable:
    """Split each frequent pattern into (upstream graph, downstream candidate
    node) pairs and attach rule confidences.

    A node qualifies as candidate when it has at least one incoming edge from
    the remaining pattern and its removal keeps the remainder connected.
    Identical (upstream, candidate) rows arising from symmetric removals
    collapse into one.
    """
    stripped = [strip_for_mining(g) for g in corpus]
    label_support = _label_project_support(stripped)
    support_by_code = {p.canonical_code: p.support for p in patterns}

    rows: dict[tuple[str, tuple], StructuralTableRow] = {}
    for p in patterns:
        pattern = p.pattern
        for v in pattern.nodes:
            incoming = [e for e in pattern.edges if e.dst[0] == v.id and e.src[0] != v.id]
            if not incoming:
                continue
            rest_ids = {n.id for n in pattern.nodes if n.id != v.id}
            rest = induced_subgraph(pattern, rest_ids, project_id="pattern")
            if not rest.nodes or not is_weakly_connected(rest):
                continue
            code, order = canonical_form(rest)
            rename = {old: f"n{i}" for i, old in enumerate(order)}
            upstream = pattern_from_code(code)
            edges = []
            for e in pattern.edges:
                if e.src[0] == v.id and e.dst[0] in rest_ids:
                    edges.append(CandidateEdge(dir="out", peer=rename[e.dst[0]]))
                elif e.dst[0] == v.id and e.src[0] in rest_ids:
                    edges.append(CandidateEdge(dir="in", peer=rename[e.src[0]]))
            row = StructuralTableRow(
                upstream=upstream,
                upstream_code=code,
                candidate_kind=v.kind,
                candidate_type=v.type_label,
                candidate_edges=tuple(sorted(edges, key=lambda e: (e.dir, e.peer))),
                confidence=0.0,  # filled below
                support_full=p.support,
                support_upstream=(
                    label_support.get(upstream.nodes[0].label, 0)
                    if len(upstream.nodes) == 1
                    else support_by_code[code]
                ),
            )
            key = (code, row.candidate_signature)
            if key not in rows:
                rows[key] = row

    final = []
    for row in rows.values():
        final.append(
            StructuralTableRow(
                upstream=row.upstream,
                upstream_code=row.upstream_code,
                candidate_kind=row.candidate_kind,
                candidate_type=row.candidate_type,
                candidate_edges=row.candidate_edges,
                confidence=row.support_full / row.support_upstream,
                support_full=row.support_full,
                support_upstream=row.support_upstream,
            )
        )
    final.sort(key=lambda r: (r.upstream_code, r.candidate_signature))
    return StructuralTable(rows=tuple(final), provenance=dict(provenance or {}))
