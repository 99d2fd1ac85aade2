"""Corpus handling: select/clean/transform project files, synthesize test
corpora with known ground truth, and run the full pre-programming pipeline
(preprocess -> mine -> structural table -> persist)."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .graphs import (
    Edge,
    GraphError,
    Node,
    ProjectGraph,
    expand_edge_params,
    parse_project,
    serialize_project,
)
from .mining import (
    StructuralTable,
    build_structural_table,
    default_minsup,
    mine_frequent,
)

DEFAULT_BLOCK_ALPHABET = (
    ("operator", "Valve"),
    ("operator", "Pump"),
    ("operator", "RampGenerator"),
    ("operator", "Limiter"),
    ("operand", "PressureIn"),
    ("operand", "FlowSet"),
    ("operand", "Out"),
)


class NoReadablePaths(ValueError):
    pass


@dataclass(frozen=True)
class CorpusManifest:
    corpus_id: str
    source_paths: tuple[str, ...]
    total: int
    dropped_faulty: int
    dropped_empty: int
    retained: int
    expand_params: bool = False
    faulty_files: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "source_paths": list(self.source_paths),
            "total": self.total,
            "dropped_faulty": self.dropped_faulty,
            "dropped_empty": self.dropped_empty,
            "retained": self.retained,
            "preprocessing": {"expand_params": self.expand_params},
            "faulty_files": list(self.faulty_files),
        }


def _project_files(paths: list[str | Path]) -> list[Path]:
    files: list[Path] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(path.glob("*.json")))
        elif path.is_file():
            files.append(path)
    return sorted(set(files))


def preprocess(
    paths: list[str | Path], expand_params: bool = False
) -> tuple[list[ProjectGraph], CorpusManifest]:
    """Parse and validate every project file; faulty (unparsable or
    invariant-violating) and empty projects are dropped and counted."""
    files = _project_files(paths)
    if not files:
        raise NoReadablePaths(f"no project files under {paths!r}")
    retained: list[ProjectGraph] = []
    faulty: list[str] = []
    empty = 0
    digest = hashlib.sha256()
    for f in files:
        data = f.read_bytes()
        digest.update(f.name.encode())
        digest.update(data)
        try:
            g = parse_project(data)
        except GraphError:
            faulty.append(str(f))
            continue
        if not g.nodes:
            empty += 1
            continue
        retained.append(expand_edge_params(g) if expand_params else g)
    manifest = CorpusManifest(
        corpus_id=digest.hexdigest()[:16],
        source_paths=tuple(str(p) for p in paths),
        total=len(files),
        dropped_faulty=len(faulty),
        dropped_empty=empty,
        retained=len(retained),
        expand_params=expand_params,
        faulty_files=tuple(faulty),
    )
    return retained, manifest


# ---------------------------------------------------------------------------
# Synthetic corpora
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratedCorpus:
    projects: list[ProjectGraph]
    motifs: list[ProjectGraph]
    planted: dict[int, tuple[str, ...]] = field(default_factory=dict)  # motif -> project ids


def _default_motifs(alphabet) -> list[ProjectGraph]:
    a, b, c = alphabet[0], alphabet[1], alphabet[2]

    def block(idx: int, label, x: float, y: float) -> Node:
        return Node(
            id=f"m{idx}",
            kind=label[0],
            type_label=label[1],
            in_ports=("in",),
            out_ports=("out",),
            position=(x, y),
            size=(60.0, 40.0),
        )

    chain = ProjectGraph(
        project_id="motif-chain",
        nodes=(block(0, a, 0, 0), block(1, b, 150, 0), block(2, c, 300, 0)),
        edges=(
            Edge(src=("m0", "out"), dst=("m1", "in")),
            Edge(src=("m1", "out"), dst=("m2", "in")),
        ),
    )
    fanin = ProjectGraph(
        project_id="motif-fanin",
        nodes=(block(0, a, 0, 0), block(1, a, 0, 120), block(2, b, 150, 60)),
        edges=(
            Edge(src=("m0", "out"), dst=("m2", "in")),
            Edge(src=("m1", "out"), dst=("m2", "in")),
        ),
    )
    return [chain, fanin]


def generate_corpus(
    seed: int,
    n_projects: int,
    block_alphabet=DEFAULT_BLOCK_ALPHABET,
    motif_set: list[ProjectGraph] | None = None,
    noise_rate: float = 0.3,
    plant_probability: float = 0.7,
) -> GeneratedCorpus:
    """Reproducible pseudo-random projects that embed known motifs.

    Returns the projects plus the planting ground truth for oracle checks:
    with a fixed seed the corpus is byte-identical across runs.
    """
    if n_projects < 1:
        raise ValueError("n_projects must be >= 1")
    rng = random.Random(seed)
    motifs = motif_set if motif_set is not None else _default_motifs(block_alphabet)
    planted: dict[int, list[str]] = {i: [] for i in range(len(motifs))}
    projects = []
    for p in range(n_projects):
        project_id = f"gen-{seed}-{p}"
        nodes: list[Node] = []
        edges: list[Edge] = []
        counter = 0

        def add_node(kind: str, type_label: str) -> str:
            nonlocal counter
            nid = f"b{counter}"
            counter += 1
            nodes.append(
                Node(
                    id=nid,
                    kind=kind,
                    type_label=type_label,
                    in_ports=("in",),
                    out_ports=("out",),
                    params={"name": f"{type_label.lower()}_{nid}"} if kind == "operand" else {},
                    position=(
                        round(rng.uniform(0, 900), 1),
                        round(rng.uniform(0, 600), 1),
                    ),
                    size=(60.0, 40.0),
                )
            )
            return nid

        for mi, motif in enumerate(motifs):
            if rng.random() < plant_probability:
                rename = {n.id: add_node(n.kind, n.type_label) for n in motif.nodes}
                for e in motif.edges:
                    edges.append(
                        Edge(src=(rename[e.src[0]], "out"), dst=(rename[e.dst[0]], "in"))
                    )
                planted[mi].append(project_id)

        n_noise = max(1, round(noise_rate * 5))
        for _ in range(n_noise):
            kind, type_label = block_alphabet[rng.randrange(len(block_alphabet))]
            add_node(kind, type_label)
        # noise wiring: random forward edges between distinct nodes
        for _ in range(n_noise):
            if len(nodes) < 2:
                break
            a, b = rng.sample(range(len(nodes)), 2)
            e = Edge(src=(nodes[a].id, "out"), dst=(nodes[b].id, "in"))
            if all(existing.key != e.key for existing in edges):
                edges.append(e)

        projects.append(
            ProjectGraph(project_id=project_id, nodes=tuple(nodes), edges=tuple(edges))
        )
    return GeneratedCorpus(
        projects=projects,
        motifs=list(motifs),
        planted={k: tuple(v) for k, v in planted.items()},
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def run_pipeline(
    paths: list[str | Path],
    minsup: int | None = None,
    max_pattern_nodes: int = 6,
    table_path: str | Path | None = None,
    manifest_path: str | Path | None = None,
    expand_params: bool = False,
) -> tuple[StructuralTable, CorpusManifest]:
    """preprocess -> mine_frequent -> build_structural_table -> persist.

    Identical inputs and parameters always produce byte-identical output
    files, so provenance carries a corpus content hash instead of a wall
    clock timestamp.
    """
    corpus, manifest = preprocess(paths, expand_params=expand_params)
    if minsup is None:
        minsup = default_minsup(len(corpus))
    patterns = mine_frequent(corpus, minsup=minsup, max_pattern_nodes=max_pattern_nodes)
    table = build_structural_table(
        patterns,
        corpus,
        provenance={
            "corpus_id": manifest.corpus_id,
            "minsup": minsup,
            "max_pattern_nodes": max_pattern_nodes,
            "projects": manifest.retained,
        },
    )
    if table_path is not None:
        Path(table_path).write_text(table.to_json(), encoding="utf-8")
    if manifest_path is not None:
        Path(manifest_path).write_text(
            json.dumps(manifest.as_dict(), sort_keys=True, indent=2), encoding="utf-8"
        )
    return table, manifest


def write_projects(projects: list[ProjectGraph], directory: str | Path) -> list[Path]:
    """Write one interchange document per project (corpus directory layout)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for g in projects:
        path = directory / f"{g.project_id}.json"
        path.write_text(
            json.dumps(serialize_project(g), sort_keys=True, indent=2), encoding="utf-8"
        )
        written.append(path)
    return written
