"""BH and SH kernels over feature spectra, Gram matrices and the SH Cholesky factor.

Numerators and denominators stay exact Python integers; every kernel value
is produced by one correctly rounded integer division (BH adds one sqrt).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .features import EncodingKind, encode_subgraph
from .graph import Graph
from .spectrum import FeatureSpectrum


class KernelKind(enum.Enum):
    BH = "bh"
    SH = "sh"
    NAIVE_INDEXED = "naive"
    CLASSICAL_NORMALIZED = "classical"

    @classmethod
    def parse(cls, value) -> KernelKind:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _check_kinds(s: FeatureSpectrum, t: FeatureSpectrum) -> None:
    if s.kind is not t.kind:
        raise ValueError(f"encoding mismatch: {s.kind.name} vs {t.kind.name}")


def dot_spectra(s: FeatureSpectrum, t: FeatureSpectrum) -> int:
    _check_kinds(s, t)
    if len(s.counts) > len(t.counts):
        s, t = t, s
    other = t.counts
    return sum(c * other[k] for k, c in s.counts.items() if k in other)


def _bh_value(dot: int, p: int, q: int) -> float:
    return math.sqrt(dot * dot / (p * q))


def _sh_value(dot: int, p: int, n: int, q: int, m: int) -> float:
    # 2 dot / (2^(m-n) p + 2^(n-m) q), scaled by 2^|n-m| to stay integral
    if n >= m:
        d = n - m
        return (2 * dot << d) / (p + (q << (2 * d)))
    d = m - n
    return (2 * dot << d) / ((p << (2 * d)) + q)


def bh_kernel(s: FeatureSpectrum, t: FeatureSpectrum) -> float:
    return _bh_value(dot_spectra(s, t), s.sum_sq_counts, t.sum_sq_counts)


def sh_kernel(s: FeatureSpectrum, t: FeatureSpectrum) -> float:
    return _sh_value(dot_spectra(s, t), s.sum_sq_counts, s.n, t.sum_sq_counts, t.n)


def classical_normalized_inner(s: FeatureSpectrum, t: FeatureSpectrum) -> float:
    return dot_spectra(s, t) / (1 << (s.n + t.n))


def sh_coefficient(s: FeatureSpectrum, t: FeatureSpectrum) -> Fraction:
    """Exact k_SH(G, G') = 2 / (2^(n'-n) p + 2^(n-n') p')."""
    return 2 / (Fraction(1 << t.n, 1 << s.n) * s.sum_sq_counts + Fraction(1 << s.n, 1 << t.n) * t.sum_sq_counts)


def naive_indexed_overlap(g: Graph, h: Graph, kind: EncodingKind, max_n: int = 20) -> float:
    """Overlap of the index-carrying states: fraction of masks encoded identically."""
    if g.num_vertices != h.num_vertices:
        raise ValueError("naive indexed overlap needs graphs with equal vertex counts")
    n = g.num_vertices
    if n > max_n:
        raise ValueError(f"n={n} exceeds the direct-loop limit {max_n}")
    agree = sum(encode_subgraph(g, x, kind) == encode_subgraph(h, x, kind) for x in range(1 << n))
    return agree / (1 << n)


@dataclass
class GramMatrix:
    entries: np.ndarray
    kind: KernelKind
    encoding: EncodingKind
    graph_ids: list = field(default_factory=list)
    dataset: str = ""

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def to_csv(self, path=None) -> str:
        lines = [f"# dataset={self.dataset or '-'} kernel={self.kind.name} encoding={self.encoding.name}"]
        lines += [",".join(f"{v:.17g}" for v in row) for row in self.entries]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> GramMatrix:
        lines = Path(path).read_text().splitlines()
        header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        entries = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln.strip()])
        return cls(
            entries,
            KernelKind[header["kernel"]],
            EncodingKind[header["encoding"]],
            list(range(len(entries))),
            "" if header["dataset"] == "-" else header["dataset"],
        )


def dot_matrix(spectra) -> np.ndarray:
    """Exact pairwise f_G^T f_G' as int64 (every entry is at most 2^(n+n') <= 2^62)."""
    index = {}
    rows, cols, vals = [], [], []
    for r, s in enumerate(spectra):
        for k, c in s.counts.items():
            rows.append(r)
            cols.append(index.setdefault(k, len(index)))
            vals.append(c)
    f = sp.csr_matrix(
        (np.array(vals, dtype=np.int64), (rows, cols)), shape=(len(spectra), max(len(index), 1))
    )
    return (f @ f.T).toarray().astype(np.int64)


def gram(spectra, kind, dataset: str = "") -> GramMatrix:
    """Symmetric kernel matrix; each unordered pair is evaluated once."""
    spectra = list(spectra)
    kind = KernelKind.parse(kind)
    if kind is KernelKind.NAIVE_INDEXED:
        raise ValueError("the indexed overlap is not available for Gram construction")
    if not spectra:
        raise ValueError("gram needs at least one spectrum")
    encoding = spectra[0].kind
    for s in spectra:
        _check_kinds(spectra[0], s)
    if 2 * max(s.n for s in spectra) <= 62:
        dots = dot_matrix(spectra).tolist()
    else:
        dots = [[dot_spectra(s, t) for t in spectra] for s in spectra]
    sq = [s.sum_sq_counts for s in spectra]
    ns = [s.n for s in spectra]
    N = len(spectra)
    out = np.empty((N, N))
    for i in range(N):
        for j in range(i + 1):
            d = dots[i][j]
            if kind is KernelKind.BH:
                val = _bh_value(d, sq[i], sq[j])
            elif kind is KernelKind.SH:
                val = _sh_value(d, sq[i], ns[i], sq[j], ns[j])
            else:
                val = d / (1 << (ns[i] + ns[j]))
            out[i, j] = out[j, i] = val
    return GramMatrix(out, kind, encoding, list(range(N)), dataset)


@dataclass
class ShFactor:
    L: np.ndarray
    p: np.ndarray  # sum of squared counts per graph (float copy of exact ints)
    q: np.ndarray  # q[x, y] = 2^(n_y - n_x)

    def coefficient_matrix(self) -> np.ndarray:
        return 2.0 * self.L @ self.L.T


def _signed_log(value: Fraction) -> tuple[float, int]:
    if value == 0:
        return -math.inf, 0
    sign = 1 if value > 0 else -1
    value = abs(value)
    # log of a big rational without overflowing float
    return math.log(value.numerator) - math.log(value.denominator), sign


def sh_factor(spectra) -> ShFactor:
    """Closed-form lower-triangular L with 2 L L^T equal to the k_SH coefficient matrix.

    The telescoping products are accumulated as (log-magnitude, sign) pairs
    from exact rational factors so large N neither underflows nor cancels.
    """
    spectra = list(spectra)
    N = len(spectra)
    if N == 0:
        raise ValueError("sh_factor needs at least one spectrum")
    p = [s.sum_sq_counts for s in spectra]
    ns = [s.n for s in spectra]

    def qp(a, b):  # q_{a,b} p_a as an exact rational
        return Fraction(1 << ns[b], 1 << ns[a]) * p[a]

    # minus[k][i] = q_{k,i} p_k - q_{i,k} p_i, plus[k][i] likewise with +
    log_minus = np.zeros((N, N))
    sign_minus = np.zeros((N, N), dtype=int)
    log_plus = np.zeros((N, N))
    for k in range(N):
        for i in range(N):
            a, b = qp(k, i), qp(i, k)
            log_minus[k, i], sign_minus[k, i] = _signed_log(a - b)
            log_plus[k, i] = _signed_log(a + b)[0]

    L = np.zeros((N, N))
    for j in range(N):
        half_log_2pj = 0.5 * math.log(2 * p[j])
        # diagonal: prod_{k<j} minus[k,j] / (sqrt(2 p_j) prod_{k<j} plus[k,j])
        s = int(np.prod(sign_minus[:j, j])) if j else 1
        if s:
            lg = log_minus[:j, j].sum() - half_log_2pj - log_plus[:j, j].sum()
            L[j, j] = s * math.exp(lg)
        for i in range(j + 1, N):
            s = int(np.prod(sign_minus[:j, i])) if j else 1
            if not s:
                continue
            lg = half_log_2pj + log_minus[:j, i].sum() - log_plus[: j + 1, i].sum()
            L[i, j] = s * math.exp(lg)

    q = np.array([[2.0 ** (ns[y] - ns[x]) for y in range(N)] for x in range(N)])
    return ShFactor(L, np.array([float(v) for v in p]), q)


def sh_coefficient_matrix(spectra) -> np.ndarray:
    spectra = list(spectra)
    return np.array([[float(sh_coefficient(s, t)) for t in spectra] for s in spectra])
