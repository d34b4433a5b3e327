"""Exact feature spectra: multiplicities of every encoded value over all 2^n subgraphs."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .features import EncodingKind, FeatureKey, key_from_text, key_to_text
from .graph import Graph

DEFAULT_MAX_N = 28
HARD_MAX_N = 34  # per-worker uint32 bins stay exact up to C(34, 17)
HIST_MEMORY_BUDGET = 1 << 30

# exponent c in a = O(n^c)
RANGE_EXPONENT = {EncodingKind.VE: 3, EncodingKind.VED: 6}


@dataclass(frozen=True)
class FeatureSpectrum:
    n: int
    kind: EncodingKind
    counts: dict  # FeatureKey -> multiplicity

    def __post_init__(self):
        if self.sum_counts != 1 << self.n:
            raise ValueError(f"counts sum to {self.sum_counts}, expected 2^{self.n}")

    @property
    def sum_counts(self) -> int:
        return sum(self.counts.values())

    @property
    def sum_sq_counts(self) -> int:
        return sum(c * c for c in self.counts.values())

    @property
    def distinct_keys(self) -> int:
        return len(self.counts)

    def sorted_items(self) -> list[tuple[FeatureKey, int]]:
        return sorted(self.counts.items())

    def max_count(self) -> int:
        return max(self.counts.values())

    def coarsen(self) -> FeatureSpectrum:
        """VE spectrum obtained by summing VED counts over the degree components."""
        if self.kind is EncodingKind.VE:
            return self
        merged = Counter()
        for k, c in self.counts.items():
            merged[k[:2]] += c
        return FeatureSpectrum(self.n, EncodingKind.VE, dict(merged))


def _workers_for(hist_size: int, threads: int) -> int:
    by_memory = max(1, HIST_MEMORY_BUDGET // (4 * hist_size))
    return max(1, min(threads, by_memory))


def enumerate_spectrum(
    g: Graph, kind: EncodingKind, max_n: int = DEFAULT_MAX_N, workers: int | None = None
) -> FeatureSpectrum:
    """Count ``#{x : E(g, x) = y}`` for every value ``y`` over all ``2^n`` masks.

    ``workers`` sets how many mask blocks get private histograms; the result
    is identical for every value since merging is exact integer addition.
    """
    import numba

    from ._enumerate import enumerate_histograms, triple_table

    kind = EncodingKind.parse(kind)
    n = g.num_vertices
    if n > min(max_n, HARD_MAX_N):
        raise ValueError(f"graph has n={n} vertices, above the enumeration limit {min(max_n, HARD_MAX_N)}")
    m = g.num_edges
    with_degrees = kind is EncodingKind.VED
    tri, triples = triple_table(n) if with_degrees else (np.zeros((1, 1, 1), np.int64), np.zeros((1, 3), np.int64))
    n_tri = len(triples)
    size = (n + 1) * (m + 1) * (n_tri if with_degrees else 1)
    if workers is None:
        workers = numba.get_num_threads()
    w = _workers_for(size, workers)
    w = min(w, 1 << n)
    hists = enumerate_histograms(g.adjacency_array(), n, m, with_degrees, tri, n_tri, w)
    total = hists.sum(axis=0, dtype=np.uint64)

    counts = {}
    for idx in np.flatnonzero(total).tolist():
        c = int(total[idx])
        if with_degrees:
            ve, t = divmod(idx, n_tri)
            v, e = divmod(ve, m + 1)
            d1, d2, d3 = triples[t].tolist()
            counts[(v, e, d1, d2, d3)] = c
        else:
            v, e = divmod(idx, m + 1)
            counts[(v, e)] = c
    return FeatureSpectrum(n, kind, counts)


def naive_spectrum(g: Graph, kind: EncodingKind) -> FeatureSpectrum:
    """Reference enumeration: re-encode every subset independently."""
    from .features import encode_subgraph

    kind = EncodingKind.parse(kind)
    counts = Counter(encode_subgraph(g, x, kind) for x in range(1 << g.num_vertices))
    return FeatureSpectrum(g.num_vertices, kind, dict(counts))


@dataclass(frozen=True)
class SuccessProbability:
    exact: Fraction
    bound: Fraction  # 1/a

    @property
    def value(self) -> float:
        return float(self.exact)

    def __float__(self):
        return float(self.exact)


def success_probability(s: FeatureSpectrum) -> SuccessProbability:
    """Probability of measuring ``0^n`` on the index register after the Hadamard layer."""
    return SuccessProbability(
        Fraction(s.sum_sq_counts, 1 << (2 * s.n)), Fraction(1, s.distinct_keys)
    )


def reference_curve(n: int, kind: EncodingKind) -> float:
    """sqrt(n) / n^c with unit constant."""
    return math.sqrt(n) / n ** RANGE_EXPONENT[EncodingKind.parse(kind)]


@dataclass(frozen=True)
class RangeGrowthRow:
    n: int
    graphs: int
    mean_a: float
    mean_pr: float
    stderr_pr: float
    min_pr: float
    reference: float
    mean_inverse_a: float


def range_growth_report(spectra) -> list[RangeGrowthRow]:
    """Per vertex-count bucket: mean range size, mean success probability, reference curve."""
    spectra = list(spectra)
    if not spectra:
        raise ValueError("range_growth_report needs at least one spectrum")
    buckets = defaultdict(list)
    for s in spectra:
        buckets[s.n].append(s)
    rows = []
    for n in sorted(buckets):
        group = buckets[n]
        prs = np.array([float(success_probability(s).exact) for s in group])
        a = np.array([s.distinct_keys for s in group], dtype=float)
        stderr = float(prs.std(ddof=1) / math.sqrt(len(prs))) if len(prs) > 1 else 0.0
        rows.append(
            RangeGrowthRow(
                n=n,
                graphs=len(group),
                mean_a=float(a.mean()),
                mean_pr=float(prs.mean()),
                stderr_pr=stderr,
                min_pr=float(prs.min()),
                reference=reference_curve(n, group[0].kind),
                mean_inverse_a=float((1.0 / a).mean()),
            )
        )
    return rows


def keys_per_vertex_count(s: FeatureSpectrum) -> dict[int, int]:
    """Observed |Y_v|: number of distinct keys whose first component is v."""
    out = Counter(k[0] for k in s.counts)
    return dict(sorted(out.items()))


# -- spectrum files -----------------------------------------------------------

def format_spectrum(s: FeatureSpectrum) -> str:
    lines = [f"# n={s.n} kind={s.kind.name} sum={s.sum_counts}"]
    lines += [f"{key_to_text(k)} {c}" for k, c in s.sorted_items()]
    return "\n".join(lines) + "\n"


def parse_spectrum(text: str) -> FeatureSpectrum:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("spectrum file lacks a header line")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    n = int(header["n"])
    kind = EncodingKind[header["kind"]]
    counts = {}
    for ln in lines[1:]:
        key, count = ln.split()
        k = key_from_text(key)
        if len(k) != kind.width:
            raise ValueError(f"key {key} does not match kind {kind.name}")
        counts[k] = int(count)
    s = FeatureSpectrum(n, kind, counts)
    if int(header["sum"]) != s.sum_counts:
        raise ValueError("header sum does not match counts")
    return s


def write_spectrum(s: FeatureSpectrum, path) -> None:
    Path(path).write_text(format_spectrum(s))


def read_spectrum(path) -> FeatureSpectrum:
    return parse_spectrum(Path(path).read_text())


class SpectrumCache:
    """On-disk cache keyed by (dataset fingerprint, graph id, encoding)."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, fingerprint: str, graph_id: int, kind: EncodingKind) -> Path:
        return self.root / fingerprint / EncodingKind.parse(kind).value / f"{graph_id}.spec"

    def get(self, fingerprint: str, g: Graph, kind: EncodingKind, max_n: int = DEFAULT_MAX_N) -> FeatureSpectrum:
        kind = EncodingKind.parse(kind)
        path = self.path(fingerprint, g.id, kind)
        if path.is_file():
            s = read_spectrum(path)
            if s.kind is not kind or s.n != g.num_vertices:
                raise ValueError(f"cached spectrum {path} does not match graph {g.id}/{kind.name}")
            return s
        s = enumerate_spectrum(g, kind, max_n=max_n)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        write_spectrum(s, tmp)
        tmp.replace(path)
        return s
