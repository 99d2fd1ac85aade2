#!/usr/bin/env python3
"""Latency experiment: query time of the recommender against table size.

Builds synthetic structural tables of growing row counts (fixed pool of
distinct upstream patterns, as mining produces in practice) and reports the
per-query wall time.
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from vpla.graphs import is_weakly_connected
from vpla.mining import (
    CandidateEdge,
    StructuralTable,
    StructuralTableRow,
    canonical_form,
    pattern_from_code,
    strip_for_mining,
)
from vpla.recommend import TableIndex, recommend

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import mk_graph, random_graph  # noqa: E402

OP = "operator"
TYPES = ("Pump", "Valve", "Ramp", "Limiter", "Mixer", "Filter", "Splitter", "Gauge")


def build_table(n_rows: int, n_patterns: int, seed: int = 1) -> StructuralTable:
    rng = random.Random(seed)
    pool = {}
    alphabet = tuple((OP, t) for t in TYPES[:5])
    while len(pool) < n_patterns:
        g = strip_for_mining(random_graph(rng, max_nodes=5, min_nodes=1, alphabet=alphabet))
        if not g.nodes or not is_weakly_connected(g):
            continue
        code, _ = canonical_form(g)
        pool.setdefault(code, pattern_from_code(code))
    patterns = list(pool.items())
    rows = []
    for i in range(n_rows):
        code, upstream = patterns[i % len(patterns)]
        support_upstream = 10 + (i % 7)
        support_full = 1 + (i % support_upstream)
        rows.append(StructuralTableRow(
            upstream=upstream, upstream_code=code, candidate_kind=OP,
            candidate_type=TYPES[i % len(TYPES)],
            candidate_edges=(CandidateEdge(dir="in", peer="n0"),),
            confidence=support_full / support_upstream,
            support_full=support_full, support_upstream=support_upstream,
        ))
    return StructuralTable(rows=tuple(rows), provenance={"bench": True})


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--patterns", type=int, default=150)
    parser.add_argument("--queries", type=int, default=20)
    args = parser.parse_args()

    context = mk_graph("q", [(OP, "Pump"), (OP, "Valve"), (OP, "Ramp")], [(0, 1), (1, 2)])
    print(f"{'rows':>8} {'patterns':>9} {'median ms':>10} {'p95 ms':>8}")
    for n_rows in (1000, 5000, 10_000, 20_000):
        index = TableIndex(build_table(n_rows, args.patterns))
        recommend(context, "x2", index, k=5)  # warm-up
        samples = []
        for _ in range(args.queries):
            t0 = time.perf_counter()
            recommend(context, "x2", index, k=5)
            samples.append((time.perf_counter() - t0) * 1000)
        samples.sort()
        p95 = samples[min(len(samples) - 1, round(0.95 * len(samples)) - 1)]
        print(f"{n_rows:>8} {args.patterns:>9} {statistics.median(samples):>10.1f} {p95:>8.1f}")


if __name__ == "__main__":
    main()
