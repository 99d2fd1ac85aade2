#!/usr/bin/env python3
"""Layout-optimization experiment: score reduction over random graphs.

Reports the weighted layout score before/after optimization and the share of
graphs where edge crossings reach zero.
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
from pathlib import Path

from vpla.encapsulate import optimize_layout
from vpla.metrics import layout_metrics, layout_quality

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import random_graph  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--graphs", type=int, default=40)
    parser.add_argument("--max-nodes", type=int, default=10)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    reductions = []
    uncrossed = 0
    had_crossings = 0
    for _ in range(args.graphs):
        g = random_graph(rng, max_nodes=args.max_nodes, min_nodes=3, edge_factor=1.4)
        before = layout_quality(g)
        opt = optimize_layout(g)
        after = layout_quality(opt)
        assert after <= before + 1e-12
        if before > 0:
            reductions.append((before - after) / before)
        if layout_metrics(g)["edge_overlaps"] > 0:
            had_crossings += 1
            if layout_metrics(opt)["edge_overlaps"] == 0:
                uncrossed += 1

    print(f"graphs: {args.graphs} (max {args.max_nodes} nodes)")
    if reductions:
        print(f"median score reduction: {statistics.median(reductions):.1%}")
        print(f"mean score reduction:   {statistics.mean(reductions):.1%}")
    if had_crossings:
        print(f"crossings fully removed: {uncrossed}/{had_crossings}")


if __name__ == "__main__":
    main()
