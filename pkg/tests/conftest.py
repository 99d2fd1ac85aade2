from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from vpla.graphs import Edge, Node, ProjectGraph, validate


def mk_graph(
    project_id: str,
    labels: list[tuple[str, str]],
    arcs: list[tuple[int, int]],
    positions: list[tuple[float, float]] | None = None,
    edge_labels: dict[tuple[int, int], str] | None = None,
) -> ProjectGraph:
    """Compact graph builder: nodes x0..xn with in/out ports, arcs by index."""
    nodes = []
    for i, (kind, type_label) in enumerate(labels):
        pos = positions[i] if positions is not None else (100.0 * i, 50.0 * (i % 3))
        nodes.append(
            Node(
                id=f"x{i}",
                kind=kind,
                type_label=type_label,
                in_ports=("in",),
                out_ports=("out",),
                params={"name": f"v{i}"} if kind == "operand" else {},
                position=pos,
                size=(60.0, 40.0),
            )
        )
    edge_labels = edge_labels or {}
    edges = tuple(
        Edge(
            src=(f"x{a}", "out"),
            dst=(f"x{b}", "in"),
            label=edge_labels.get((a, b)),
        )
        for a, b in arcs
    )
    return validate(ProjectGraph(project_id=project_id, nodes=tuple(nodes), edges=edges))


def random_graph(
    rng: random.Random,
    max_nodes: int = 8,
    alphabet: tuple[tuple[str, str], ...] = (
        ("operator", "A"),
        ("operator", "B"),
        ("operand", "C"),
    ),
    min_nodes: int = 1,
    edge_factor: float = 1.2,
) -> ProjectGraph:
    n = rng.randint(min_nodes, max_nodes)
    labels = [alphabet[rng.randrange(len(alphabet))] for _ in range(n)]
    possible = [(a, b) for a in range(n) for b in range(n) if a != b]
    rng.shuffle(possible)
    n_edges = min(len(possible), round(edge_factor * n))
    arcs = sorted(possible[:n_edges])
    return mk_graph(f"rand-{rng.random():.6f}", labels, arcs)


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------

_KINDS = st.sampled_from(["operator", "operand"])
_TYPES = st.sampled_from(["And", "Or", "Pump", "Valve", "Ramp"])


@st.composite
def graphs(draw, max_nodes: int = 6, with_layout: bool = True, edge_labels: bool = False):
    n = draw(st.integers(min_value=0, max_value=max_nodes))
    nodes = []
    for i in range(n):
        kind = draw(_KINDS)
        nodes.append(
            Node(
                id=f"g{i}",
                kind=kind,
                type_label=draw(_TYPES),
                in_ports=("in", "set"),
                out_ports=("out",),
                params={"name": draw(st.sampled_from(["p", "q", "r"]))}
                if kind == "operand" and draw(st.booleans())
                else {},
                position=(
                    float(draw(st.integers(-50, 50)) * 10),
                    float(draw(st.integers(-50, 50)) * 10),
                )
                if with_layout
                else None,
                size=(60.0, 40.0) if with_layout else None,
            )
        )
    possible = [
        (a, b, ip)
        for a in range(n)
        for b in range(n)
        for ip in ("in", "set")
        if a != b
    ]
    chosen = draw(
        st.lists(st.sampled_from(possible), unique=True, max_size=2 * n)
        if possible
        else st.just([])
    )
    edges = tuple(
        Edge(
            src=(f"g{a}", "out"),
            dst=(f"g{b}", ip),
            label=draw(st.sampled_from([None, None, "sig", "ref"])) if edge_labels else None,
        )
        for a, b, ip in sorted(set(chosen))
    )
    return validate(ProjectGraph(project_id="hyp", nodes=tuple(nodes), edges=edges))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
