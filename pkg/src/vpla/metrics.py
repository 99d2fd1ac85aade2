"""Structural and layout complexity metrics, plus metric-set selection.

Structural metrics (cyclomatic, Halstead) depend only on the graph
structure; the seven layout metrics score the geometric arrangement of the
blocks. All layout metrics are penalties: 0 means "no penalty", lower is
better, and the weighted sum is the overall layout quality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

from .graphs import OPERAND, OPERATOR, GraphError, Node, ProjectGraph, weak_components


class MissingLayout(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} has no position/size")
        self.node_id = node_id


class TooFewSamples(ValueError):
    pass


LAYOUT_METRIC_NAMES = (
    "angular_resolution",
    "aspect_ratio",
    "edge_overlaps",
    "nearest_neighbour_variance",
    "uniform_edges",
    "concentration",
    "homogeneity",
)

#: Column order of the per-project metrics table (CSV export).
METRIC_COLUMNS = (
    "cyclomatic",
    "halstead_length",
    "halstead_vocabulary",
    "halstead_difficulty",
    *LAYOUT_METRIC_NAMES,
    "layout_quality",
)


@dataclass(frozen=True)
class LayoutWeights:
    angular_resolution: float = 1e-2
    aspect_ratio: float = 1e-7
    edge_overlaps: float = 1.0
    nearest_neighbour_variance: float = 1e-6
    uniform_edges: float = 1e-3
    concentration: float = 1.0
    homogeneity: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"layout weight {f.name} must be >= 0")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class HalsteadCounts:
    n1: int  # distinct operator types
    N1: int  # operator occurrences
    n2: int  # distinct operand identifiers
    N2: int  # operand occurrences (nodes + labeled-edge references)

    @property
    def length(self) -> int:
        return self.N1 + self.N2

    @property
    def vocabulary(self) -> int:
        return self.n1 + self.n2

    @property
    def difficulty(self) -> float:
        if self.n2 == 0:
            return 0.0
        return (self.n1 / 2.0) * (self.N2 / self.n2)


@dataclass(frozen=True)
class MetricsReport:
    project_id: str
    cyclomatic: int
    halstead: HalsteadCounts
    layout: dict[str, float] = field(default_factory=dict)
    layout_quality: float = 0.0

    def value(self, name: str) -> float:
        if name == "cyclomatic":
            return float(self.cyclomatic)
        if name == "halstead_length":
            return float(self.halstead.length)
        if name == "halstead_vocabulary":
            return float(self.halstead.vocabulary)
        if name == "halstead_difficulty":
            return self.halstead.difficulty
        if name == "layout_quality":
            return self.layout_quality
        if name in self.layout:
            return self.layout[name]
        raise KeyError(name)

    def as_dict(self) -> dict[str, float]:
        return {name: self.value(name) for name in METRIC_COLUMNS}


# ---------------------------------------------------------------------------
# Structural metrics
# ---------------------------------------------------------------------------


def cyclomatic(g: ProjectGraph) -> int:
    """M = E - N + 2P over the block graph (P = weak components); empty -> 0."""
    if not g.nodes:
        return 0
    return len(g.edges) - len(g.nodes) + 2 * len(weak_components(g))


def halstead(g: ProjectGraph) -> HalsteadCounts:
    """Operator/operand counts over nodes plus labeled-edge references.

    Operand identifiers come from params["name"], falling back to the node's
    type label; a labeled edge counts as one more reference to the operand
    named by its label.
    """
    operator_types: set[str] = set()
    operand_names: set[str] = set()
    N1 = N2 = 0
    for n in g.nodes:
        if n.kind == OPERATOR:
            N1 += 1
            operator_types.add(n.type_label)
        else:
            N2 += 1
            operand_names.add(n.operand_name())
    for e in g.edges:
        if e.label is not None:
            N2 += 1
            operand_names.add(e.label)
    return HalsteadCounts(n1=len(operator_types), N1=N1, n2=len(operand_names), N2=N2)


# ---------------------------------------------------------------------------
# Layout metrics
# ---------------------------------------------------------------------------


def _require_layout(g: ProjectGraph) -> dict[str, tuple[float, float]]:
    centers = {}
    for n in g.nodes:
        if n.position is None or n.size is None:
            raise MissingLayout(n.id)
        centers[n.id] = n.position
    return centers


def _segments(g: ProjectGraph, centers: dict[str, tuple[float, float]]):
    """Edge segments between node centers; self-loops and zero-length
    segments are geometrically degenerate and excluded."""
    segs = []
    for e in g.edges:
        a, b = centers[e.src[0]], centers[e.dst[0]]
        if e.src[0] == e.dst[0] or a == b:
            continue
        segs.append((e.src[0], e.dst[0], a, b))
    return segs


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r, eps=1e-9) -> bool:
    return (
        min(p[0], q[0]) - eps <= r[0] <= max(p[0], q[0]) + eps
        and min(p[1], q[1]) - eps <= r[1] <= max(p[1], q[1]) + eps
    )


def _segments_cross(a1, a2, b1, b2, eps=1e-9) -> bool:
    """Proper crossing or collinear overlap of open segments."""
    d1 = _orient(b1, b2, a1)
    d2 = _orient(b1, b2, a2)
    d3 = _orient(a1, a2, b1)
    d4 = _orient(a1, a2, b2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    # collinear overlap: all four orientations ~0 and projections overlap in
    # more than a point
    if all(abs(d) <= eps for d in (d1, d2, d3, d4)):
        lo_ax, hi_ax = sorted((a1[0], a2[0]))
        lo_bx, hi_bx = sorted((b1[0], b2[0]))
        lo_ay, hi_ay = sorted((a1[1], a2[1]))
        lo_by, hi_by = sorted((b1[1], b2[1]))
        overlap_x = min(hi_ax, hi_bx) - max(lo_ax, lo_bx)
        overlap_y = min(hi_ay, hi_by) - max(lo_ay, lo_by)
        return overlap_x > eps or overlap_y > eps
    return False


def _angular_resolution(g: ProjectGraph, centers) -> float:
    if not g.nodes:
        return 0.0
    total = 0.0
    for n in g.nodes:
        vectors = []
        for e in g.out_edges(n.id):
            other = centers[e.dst[0]]
            if e.dst[0] != n.id and other != centers[n.id]:
                vectors.append(math.atan2(other[1] - centers[n.id][1], other[0] - centers[n.id][0]))
        for e in g.in_edges(n.id):
            other = centers[e.src[0]]
            if e.src[0] != n.id and other != centers[n.id]:
                vectors.append(math.atan2(other[1] - centers[n.id][1], other[0] - centers[n.id][0]))
        if len(vectors) < 2:
            continue
        vectors.sort()
        gaps = [b - a for a, b in zip(vectors, vectors[1:])]
        gaps.append(2 * math.pi - (vectors[-1] - vectors[0]))
        ideal = 2 * math.pi / len(vectors)
        total += max(0.0, ideal - min(gaps)) / (2 * math.pi)
    return total / len(g.nodes)


def _aspect_ratio(g: ProjectGraph, centers) -> float:
    xs_lo, xs_hi, ys_lo, ys_hi = [], [], [], []
    for n in g.nodes:
        x, y = centers[n.id]
        w, h = n.size  # validated present
        xs_lo.append(x - w / 2)
        xs_hi.append(x + w / 2)
        ys_lo.append(y - h / 2)
        ys_hi.append(y + h / 2)
    width = max(xs_hi) - min(xs_lo)
    height = max(ys_hi) - min(ys_lo)
    return abs(math.log(width / height))


def _edge_overlaps(g: ProjectGraph, centers) -> float:
    segs = _segments(g, centers)
    count = 0
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            s, t = segs[i], segs[j]
            if {s[0], s[1]} & {t[0], t[1]}:
                continue  # shared endpoints excluded
            if _segments_cross(s[2], s[3], t[2], t[3]):
                count += 1
    return float(count)


def _nearest_neighbour_variance(g: ProjectGraph, centers) -> float:
    pts = [centers[n.id] for n in g.nodes]
    dists = []
    for i, p in enumerate(pts):
        best = min(
            math.hypot(p[0] - q[0], p[1] - q[1]) for j, q in enumerate(pts) if j != i
        )
        dists.append(best)
    mean = sum(dists) / len(dists)
    return sum((d - mean) ** 2 for d in dists) / len(dists)


def _uniform_edges(g: ProjectGraph, centers) -> float:
    lengths = [math.hypot(b[0] - a[0], b[1] - a[1]) for _, _, a, b in _segments(g, centers)]
    if not lengths:
        return 0.0
    mean = sum(lengths) / len(lengths)
    if mean == 0:
        return 0.0
    var = sum((x - mean) ** 2 for x in lengths) / len(lengths)
    return var / (mean * mean)


def _concentration(g: ProjectGraph, centers) -> float:
    n = len(g.nodes)
    k = math.ceil(math.sqrt(n))
    xs = [centers[node.id][0] for node in g.nodes]
    ys = [centers[node.id][1] for node in g.nodes]
    min_x, max_x, min_y, max_y = min(xs), max(xs), min(ys), max(ys)
    w = max_x - min_x
    h = max_y - min_y
    counts: dict[tuple[int, int], int] = {}
    for x, y in zip(xs, ys):
        ix = min(k - 1, int((x - min_x) / w * k)) if w > 0 else 0
        iy = min(k - 1, int((y - min_y) / h * k)) if h > 0 else 0
        counts[(ix, iy)] = counts.get((ix, iy), 0) + 1
    return sum(max(0, c - 1) for c in counts.values()) / n


def _homogeneity(g: ProjectGraph, centers) -> float:
    n = len(g.nodes)
    xs = [centers[node.id][0] for node in g.nodes]
    ys = [centers[node.id][1] for node in g.nodes]
    cx = (min(xs) + max(xs)) / 2
    cy = (min(ys) + max(ys)) / 2
    quadrants = [0, 0, 0, 0]
    for x, y in zip(xs, ys):
        quadrants[(0 if x < cx else 1) + (0 if y < cy else 2)] += 1
    return (max(quadrants) - min(quadrants)) / n


def layout_metrics(g: ProjectGraph) -> dict[str, float]:
    """The seven layout penalties; graphs with < 2 nodes score all zeros."""
    if len(g.nodes) < 2:
        return {name: 0.0 for name in LAYOUT_METRIC_NAMES}
    centers = _require_layout(g)
    return {
        "angular_resolution": _angular_resolution(g, centers),
        "aspect_ratio": _aspect_ratio(g, centers),
        "edge_overlaps": _edge_overlaps(g, centers),
        "nearest_neighbour_variance": _nearest_neighbour_variance(g, centers),
        "uniform_edges": _uniform_edges(g, centers),
        "concentration": _concentration(g, centers),
        "homogeneity": _homogeneity(g, centers),
    }


def layout_quality(g: ProjectGraph, weights: LayoutWeights | None = None) -> float:
    w = weights or LayoutWeights()
    values = layout_metrics(g)
    return sum(getattr(w, name) * values[name] for name in LAYOUT_METRIC_NAMES)


def compute_report(g: ProjectGraph, weights: LayoutWeights | None = None) -> MetricsReport:
    w = weights or LayoutWeights()
    layout = layout_metrics(g)
    return MetricsReport(
        project_id=g.project_id,
        cyclomatic=cyclomatic(g),
        halstead=halstead(g),
        layout=layout,
        layout_quality=sum(getattr(w, name) * layout[name] for name in LAYOUT_METRIC_NAMES),
    )


# ---------------------------------------------------------------------------
# Metrics table (CSV) and metric selection
# ---------------------------------------------------------------------------


def metrics_table_csv(reports: list[MetricsReport]) -> str:
    """One row per project, one column per metric, header row included."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["project_id", *METRIC_COLUMNS])
    for r in reports:
        writer.writerow([r.project_id] + [repr(r.value(c)) for c in METRIC_COLUMNS])
    return buf.getvalue()


def read_metrics_table_csv(text: str) -> tuple[list[str], dict[str, list[float]]]:
    """Returns (project ids, column name -> values)."""
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    columns: dict[str, list[float]] = {name: [] for name in header[1:]}
    ids = []
    for row in rows[1:]:
        ids.append(row[0])
        for name, cell in zip(header[1:], row[1:]):
            columns[name].append(float(cell))
    return ids, columns


def pearson(xs: list[float], ys: list[float]) -> float:
    """Bravais-Pearson correlation coefficient, two-pass."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs))
    sy = math.sqrt(sum((y - my) ** 2 for y in ys))
    if sx == 0 or sy == 0:
        return 0.0
    return cov / (sx * sy)


def variance(xs: list[float]) -> float:
    n = len(xs)
    m = sum(xs) / n
    return sum((x - m) ** 2 for x in xs) / n


#: Default order used to choose a group representative; stands in for the
#: domain expert's pick among highly correlated metrics.
DEFAULT_PRIORITY = (
    "cyclomatic",
    "halstead_difficulty",
    "halstead_length",
    "halstead_vocabulary",
    "layout_quality",
    "edge_overlaps",
    "concentration",
    "homogeneity",
    "angular_resolution",
    "uniform_edges",
    "nearest_neighbour_variance",
    "aspect_ratio",
)


@dataclass(frozen=True)
class MetricSelection:
    kept: tuple[str, ...]
    dropped_zero_variance: tuple[str, ...]
    redundancy_groups: tuple[tuple[str, ...], ...]
    chosen_representative: dict[str, str]  # group key (first member) -> kept name
    correlations: dict[tuple[str, str], float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kept": list(self.kept),
            "dropped_zero_variance": list(self.dropped_zero_variance),
            "redundancy_groups": [list(grp) for grp in self.redundancy_groups],
            "chosen_representative": dict(self.chosen_representative),
        }


def select_metrics(
    reports: list[MetricsReport] | dict[str, list[float]],
    eps: float = 1e-9,
    tau: float = 0.85,
    priority: tuple[str, ...] = DEFAULT_PRIORITY,
) -> MetricSelection:
    """Two-step metric selection: drop no-variance metrics, then keep one
    representative per transitively-correlated group (|r| >= tau)."""
    if isinstance(reports, dict):
        columns = {name: list(vals) for name, vals in reports.items()}
    else:
        columns = {name: [r.value(name) for r in reports] for name in METRIC_COLUMNS}
    n_samples = min((len(v) for v in columns.values()), default=0)
    if n_samples < 3:
        raise TooFewSamples(f"need >= 3 reports, got {n_samples}")
    if eps < 0 or not (0 < tau <= 1):
        raise ValueError("eps must be >= 0 and tau in (0, 1]")

    names = list(columns)
    dropped = [name for name in names if variance(columns[name]) < eps]
    alive = [name for name in names if name not in dropped]

    parent = {name: name for name in alive}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    correlations: dict[tuple[str, str], float] = {}
    for i, a in enumerate(alive):
        for b in alive[i + 1 :]:
            r = pearson(columns[a], columns[b])
            correlations[(a, b)] = r
            if abs(r) >= tau:
                parent[find(a)] = find(b)

    groups: dict[str, list[str]] = {}
    for name in alive:
        groups.setdefault(find(name), []).append(name)

    rank = {name: i for i, name in enumerate(priority)}

    def representative(members: list[str]) -> str:
        return min(members, key=lambda m: (rank.get(m, len(priority)), m))

    redundancy_groups = []
    chosen: dict[str, str] = {}
    kept_set = set()
    for members in groups.values():
        members_sorted = sorted(members)
        rep = representative(members)
        kept_set.add(rep)
        if len(members) > 1:
            redundancy_groups.append(tuple(members_sorted))
            chosen[members_sorted[0]] = rep
    kept = tuple(name for name in names if name in kept_set)
    return MetricSelection(
        kept=kept,
        dropped_zero_variance=tuple(dropped),
        redundancy_groups=tuple(sorted(redundancy_groups)),
        chosen_representative=chosen,
        correlations=correlations,
    )
