"""Independent brute-force oracles used to verify the library.

Everything here is deliberately written from first principles (exhaustive
enumeration, permutation canonicalization, textbook formulas) and never
calls the code paths it checks.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

from vpla.graphs import ProjectGraph

Label = tuple[str, str]


def arc_view(g: ProjectGraph) -> tuple[dict[str, Label], set[tuple[str, str]]]:
    """(kind, type) labels and deduplicated self-loop-free directed arcs."""
    labels = {n.id: (n.kind, n.type_label) for n in g.nodes}
    arcs = {(e.src[0], e.dst[0]) for e in g.edges if e.src[0] != e.dst[0]}
    return labels, arcs


# ---------------------------------------------------------------------------
# Embedding enumeration
# ---------------------------------------------------------------------------


def brute_embeddings(pattern: ProjectGraph, host: ProjectGraph) -> list[tuple[str, ...]]:
    """All injective label/direction-preserving node maps, as tuples of host
    ids in pattern node-list order. Ports are ignored (wildcard semantics)."""
    plabels, parcs = arc_view(pattern)
    hlabels, harcs = arc_view(host)
    pids = [n.id for n in pattern.nodes]
    hids = [n.id for n in host.nodes]
    found = []
    for image in itertools.permutations(hids, len(pids)):
        mapping = dict(zip(pids, image))
        if any(plabels[p] != hlabels[mapping[p]] for p in pids):
            continue
        if all((mapping[a], mapping[b]) in harcs for a, b in parcs):
            found.append(tuple(image))
    return sorted(found)


# ---------------------------------------------------------------------------
# Permutation-based canonical form / isomorphism
# ---------------------------------------------------------------------------


def perm_canonical(g: ProjectGraph, ports: bool = False):
    """Canonical form by minimizing over node permutations (within blocks of
    equal invariants). Independent of the DFS-code canonicalization."""
    if ports:
        node_key = {
            n.id: (n.kind, n.type_label, tuple(n.in_ports), tuple(n.out_ports))
            for n in g.nodes
        }
        arcs = sorted(
            (e.src[0], e.src[1], e.dst[0], e.dst[1], e.label or "") for e in g.edges
        )
    else:
        node_key = {n.id: (n.kind, n.type_label) for n in g.nodes}
        arcs = sorted((e.src[0], "", e.dst[0], "", "") for e in set_arcs(g))

    indeg = Counter(a[2] for a in arcs)
    outdeg = Counter(a[0] for a in arcs)
    full_key = {
        nid: (node_key[nid], indeg.get(nid, 0), outdeg.get(nid, 0)) for nid in node_key
    }
    ordered = sorted(node_key, key=lambda nid: (full_key[nid], nid))

    blocks: list[list[str]] = []
    for nid in ordered:
        if blocks and full_key[blocks[-1][0]] == full_key[nid]:
            blocks[-1].append(nid)
        else:
            blocks.append([nid])

    key_sequence = tuple(full_key[nid][0] for nid in ordered)
    best = None
    for perm in _block_permutations(blocks):
        index = {nid: i for i, nid in enumerate(perm)}
        arc_code = tuple(
            sorted((index[a], sp, index[b], dp, lab) for a, sp, b, dp, lab in arcs)
        )
        if best is None or arc_code < best:
            best = arc_code
    return (key_sequence, best)


def set_arcs(g: ProjectGraph):
    seen = set()
    out = []
    for e in g.edges:
        key = (e.src[0], e.dst[0])
        if e.src[0] != e.dst[0] and key not in seen:
            seen.add(key)
            out.append(e)
    return out


def _block_permutations(blocks: list[list[str]]):
    per_block = [list(itertools.permutations(b)) for b in blocks]
    for combo in itertools.product(*per_block):
        yield [nid for block in combo for nid in block]


def isomorphic(g1: ProjectGraph, g2: ProjectGraph, ports: bool = False) -> bool:
    return perm_canonical(g1, ports=ports) == perm_canonical(g2, ports=ports)


# ---------------------------------------------------------------------------
# Connected-subgraph enumeration (mining oracle)
# ---------------------------------------------------------------------------


def connected_edge_subsets(g: ProjectGraph, max_nodes: int):
    """Every weakly connected nonempty arc subset with <= max_nodes vertices,
    as induced pattern node/arc structures."""
    labels, arcs = arc_view(g)
    arc_list = sorted(arcs)
    results = []
    for r in range(1, len(arc_list) + 1):
        for subset in itertools.combinations(arc_list, r):
            vertices = {u for u, _ in subset} | {v for _, v in subset}
            if len(vertices) > max_nodes:
                continue
            if _arcs_connected(subset, vertices):
                results.append((frozenset(vertices), frozenset(subset)))
    return results


def _arcs_connected(arcs, vertices) -> bool:
    adj: dict[str, set[str]] = {v: set() for v in vertices}
    for u, v in arcs:
        adj[u].add(v)
        adj[v].add(u)
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nb in adj[cur]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(vertices)


def _subset_canonical(labels: dict[str, Label], vertices: frozenset[str], arcs: frozenset):
    """perm_canonical for a (vertices, arcs) selection without building a
    ProjectGraph; same block-refined minimization."""
    indeg = Counter(v for _, v in arcs)
    outdeg = Counter(u for u, _ in arcs)
    full_key = {v: (labels[v], indeg.get(v, 0), outdeg.get(v, 0)) for v in vertices}
    ordered = sorted(vertices, key=lambda v: (full_key[v], v))
    blocks: list[list[str]] = []
    for v in ordered:
        if blocks and full_key[blocks[-1][0]] == full_key[v]:
            blocks[-1].append(v)
        else:
            blocks.append([v])
    key_sequence = tuple(full_key[v][0] for v in ordered)
    best = None
    for perm in _block_permutations(blocks):
        index = {v: i for i, v in enumerate(perm)}
        code = tuple(sorted((index[u], index[v]) for u, v in arcs))
        if best is None or code < best:
            best = code
    return (key_sequence, best)


def oracle_mine_frequent(corpus: list[ProjectGraph], minsup: int, max_nodes: int):
    """Frequent patterns by exhaustive enumeration: canonical form -> project
    support, restricted to >=2 node / >=1 arc connected patterns."""
    per_project: list[set] = []
    for g in corpus:
        labels, _ = arc_view(g)
        forms = set()
        seen_subsets = set()
        for vertices, arcs in connected_edge_subsets(g, max_nodes):
            key = (vertices, arcs)
            if key in seen_subsets:
                continue
            seen_subsets.add(key)
            forms.add(_subset_canonical(labels, vertices, arcs))
        per_project.append(forms)
    support: Counter = Counter()
    for forms in per_project:
        support.update(forms)
    return {form: count for form, count in support.items() if count >= minsup}


def pattern_oracle_form(pattern: ProjectGraph):
    """Map a mined pattern into the oracle's canonical space."""
    labels, arcs = arc_view(pattern)
    return _subset_canonical(labels, frozenset(labels), frozenset(arcs))


# ---------------------------------------------------------------------------
# Exhaustive GED
# ---------------------------------------------------------------------------


def brute_ged(
    g1: ProjectGraph,
    g2: ProjectGraph,
    node_sub: float = 1.0,
    node_ins: float = 1.0,
    node_del: float = 1.0,
    edge_sub: float = 1.0,
    edge_ins: float = 1.0,
    edge_del: float = 1.0,
) -> float:
    """Minimum cost over every injective partial node mapping."""
    labels1, arcs1 = arc_view(g1)
    labels2, arcs2 = arc_view(g2)
    ids1 = sorted(labels1)
    ids2 = sorted(labels2)
    best = math.inf
    for k in range(min(len(ids1), len(ids2)) + 1):
        for kept in itertools.combinations(ids1, k):
            for image in itertools.permutations(ids2, k):
                mapping = dict(zip(kept, image))
                cost = (len(ids1) - k) * node_del + (len(ids2) - k) * node_ins
                cost += sum(
                    node_sub for u in kept if labels1[u] != labels2[mapping[u]]
                )
                for (u, v) in arcs1:
                    if u in mapping and v in mapping and (mapping[u], mapping[v]) in arcs2:
                        pass  # identical unlabeled arcs substitute for free
                    else:
                        cost += edge_del
                inverse = {v: u for u, v in mapping.items()}
                for (x, y) in arcs2:
                    if x in inverse and y in inverse and (inverse[x], inverse[y]) in arcs1:
                        continue
                    cost += edge_ins
                best = min(best, cost)
    return best


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def oracle_pearson(xs: list[float], ys: list[float]) -> float:
    """Textbook two-pass Pearson correlation."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    num = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    den = math.sqrt(sum((x - mean_x) ** 2 for x in xs)) * math.sqrt(
        sum((y - mean_y) ** 2 for y in ys)
    )
    if den == 0:
        return 0.0
    return num / den


def max_disjoint_embeddings(embeddings: list[frozenset[str]]) -> int:
    """Maximum set of pairwise vertex-disjoint embeddings (exhaustive)."""
    best = 0
    n = len(embeddings)
    for r in range(n, 0, -1):
        if r <= best:
            break
        for combo in itertools.combinations(range(n), r):
            union: set[str] = set()
            total = 0
            ok = True
            for i in combo:
                total += len(embeddings[i])
                union |= embeddings[i]
                if len(union) != total:
                    ok = False
                    break
            if ok:
                best = r
                break
    return best
