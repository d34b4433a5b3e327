"""Graph model and TU-Dortmund dataset ingestion.

Graphs are stored as adjacency bitsets: ``adjacency[i]`` is an integer whose
bit ``j`` is set iff vertices ``i`` and ``j`` are adjacent. Subgraph index bit
``i`` always refers to the ``i``-th vertex in file order.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_VERTICES = 64


class DatasetError(ValueError):
    """Malformed or missing TU dataset files."""


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    adjacency: tuple[int, ...]
    label: int | None = None
    id: int = 0

    def __post_init__(self):
        n = self.num_vertices
        if not 1 <= n <= MAX_VERTICES:
            raise ValueError(f"num_vertices must be in [1, {MAX_VERTICES}], got {n}")
        if len(self.adjacency) != n:
            raise ValueError("adjacency length does not match num_vertices")
        full = (1 << n) - 1
        for i, row in enumerate(self.adjacency):
            if row & ~full:
                raise ValueError(f"row {i} references a vertex >= n")
            if (row >> i) & 1:
                raise ValueError(f"self-loop at vertex {i}")
            j = row
            while j:
                low = j & -j
                k = low.bit_length() - 1
                if not (self.adjacency[k] >> i) & 1:
                    raise ValueError(f"asymmetric adjacency between {i} and {k}")
                j ^= low

    @classmethod
    def from_edges(cls, n: int, edges, label: int | None = None, id: int = 0) -> Graph:
        rows = [0] * n
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, tuple(rows), label, id)

    @property
    def n(self) -> int:
        return self.num_vertices

    @property
    def num_edges(self) -> int:
        return sum(row.bit_count() for row in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i, row in enumerate(self.adjacency):
            for j in range(i + 1, self.num_vertices):
                if (row >> j) & 1:
                    out.append((i, j))
        return out

    def adjacency_array(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=np.uint64)

    def relabel(self, perm) -> Graph:
        """Graph with vertex ``i`` moved to position ``perm[i]``."""
        return Graph.from_edges(
            self.num_vertices, [(perm[a], perm[b]) for a, b in self.edges()], self.label, self.id
        )


@dataclass(frozen=True)
class GraphDataset:
    name: str
    graphs: tuple[Graph, ...]
    num_classes: int
    original_labels: tuple[int, ...] = ()
    fingerprint: str = ""
    info: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.label for g in self.graphs], dtype=np.int64)

    def class_sizes(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.num_classes).tolist()


def max_degree(g: Graph) -> int:
    return max((row.bit_count() for row in g.adjacency), default=0)


_SPLIT = re.compile(r"[,\s]+")


def _read_int_rows(path: Path) -> list[list[int]]:
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([int(tok) for tok in _SPLIT.split(line) if tok])
            except ValueError:
                raise DatasetError(f"{path.name}:{lineno}: non-integer token in {line!r}") from None
    return rows


def parse_tu_dataset(root_path, name: str) -> GraphDataset:
    """Read ``root_path/name/{name}_A.txt`` and friends into a GraphDataset.

    Directed pairs are symmetrized and deduplicated, vertices renumbered to be
    0-based within each graph, and labels remapped to ``0..num_classes-1`` in
    sorted order of the original values.
    """
    folder = Path(root_path) / name
    files = {
        "A": folder / f"{name}_A.txt",
        "indicator": folder / f"{name}_graph_indicator.txt",
        "labels": folder / f"{name}_graph_labels.txt",
    }
    for path in files.values():
        if not path.is_file():
            raise DatasetError(f"missing file: {path}")

    indicator = [r[0] for r in _read_int_rows(files["indicator"])]
    raw_labels = [r[0] for r in _read_int_rows(files["labels"])]
    num_graphs = len(raw_labels)

    # vertices of graph g occupy a contiguous run of global ids
    start = {}
    counts = [0] * (num_graphs + 1)
    prev = 0
    for vid, gid in enumerate(indicator):
        if gid < 1 or gid > num_graphs:
            raise DatasetError(f"graph indicator {gid} out of range 1..{num_graphs}")
        if gid < prev or (gid != prev and gid in start):
            raise DatasetError(f"graph indicator not contiguous at vertex {vid + 1}")
        if gid != prev:
            start[gid] = vid
            prev = gid
        counts[gid] += 1
    missing = [g for g in range(1, num_graphs + 1) if counts[g] == 0]
    if missing:
        raise DatasetError(f"graphs without vertices: {missing[:5]}")

    rows = [[0] * counts[g] for g in range(num_graphs + 1)]
    for lineno, pair in enumerate(_read_int_rows(files["A"]), 1):
        if len(pair) != 2:
            raise DatasetError(f"{files['A'].name}:{lineno}: expected two integers")
        a, b = pair[0] - 1, pair[1] - 1
        if not (0 <= a < len(indicator) and 0 <= b < len(indicator)):
            raise DatasetError(f"{files['A'].name}:{lineno}: vertex id out of range")
        ga, gb = indicator[a], indicator[b]
        if ga != gb:
            raise DatasetError(f"{files['A'].name}:{lineno}: edge joins graphs {ga} and {gb}")
        if a == b:
            continue
        la, lb = a - start[ga], b - start[ga]
        rows[ga][la] |= 1 << lb
        rows[ga][lb] |= 1 << la

    label_values = sorted(set(raw_labels))
    remap = {lab: k for k, lab in enumerate(label_values)}
    graphs = []
    for g in range(1, num_graphs + 1):
        if counts[g] > MAX_VERTICES:
            raise DatasetError(f"graph {g} has {counts[g]} vertices (> {MAX_VERTICES})")
        graphs.append(Graph(counts[g], tuple(rows[g]), remap[raw_labels[g - 1]], g - 1))

    digest = hashlib.sha256()
    for key in ("A", "indicator", "labels"):
        digest.update(files[key].read_bytes())
    return GraphDataset(
        name=name,
        graphs=tuple(graphs),
        num_classes=len(label_values),
        original_labels=tuple(label_values),
        fingerprint=digest.hexdigest()[:16],
    )


def write_tu_dataset(ds: GraphDataset, root_path) -> Path:
    """Inverse of :func:`parse_tu_dataset` (edges written in both directions)."""
    folder = Path(root_path) / ds.name
    folder.mkdir(parents=True, exist_ok=True)
    orig = ds.original_labels or tuple(range(ds.num_classes))
    a_lines, ind_lines, lab_lines = [], [], []
    offset = 0
    for gi, g in enumerate(ds.graphs, 1):
        for _ in range(g.num_vertices):
            ind_lines.append(str(gi))
        for i, j in g.edges():
            a_lines.append(f"{offset + i + 1}, {offset + j + 1}")
            a_lines.append(f"{offset + j + 1}, {offset + i + 1}")
        lab_lines.append(str(orig[g.label] if g.label is not None else 0))
        offset += g.num_vertices
    (folder / f"{ds.name}_A.txt").write_text("\n".join(a_lines) + "\n")
    (folder / f"{ds.name}_graph_indicator.txt").write_text("\n".join(ind_lines) + "\n")
    (folder / f"{ds.name}_graph_labels.txt").write_text("\n".join(lab_lines) + "\n")
    return folder


def filter_dataset(ds: GraphDataset, max_vertices: int, min_edges: int = 0) -> GraphDataset:
    if max_vertices < 1:
        raise ValueError("max_vertices must be >= 1")
    if min_edges < 0:
        raise ValueError("min_edges must be >= 0")
    kept = tuple(
        g for g in ds.graphs if g.num_vertices <= max_vertices and g.num_edges >= min_edges
    )
    info = dict(ds.info)
    info.update(kept=len(kept), total=len(ds.graphs), max_vertices=max_vertices, min_edges=min_edges)
    return GraphDataset(ds.name, kept, ds.num_classes, ds.original_labels, ds.fingerprint, info)


def toy_graphs() -> tuple[Graph, Graph]:
    """The two 3-vertex example graphs: a triangle and a star centred on vertex 0."""
    g = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)], label=0, id=0)
    g_star = Graph.from_edges(3, [(0, 1), (0, 2)], label=1, id=1)
    return g, g_star


def random_graph(n: int, density: float, rng: np.random.Generator, id: int = 0, label=None) -> Graph:
    """Erdos-Renyi G(n, p) graph."""
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < density
    return Graph.from_edges(n, zip(iu[0][keep].tolist(), iu[1][keep].tolist()), label, id)
