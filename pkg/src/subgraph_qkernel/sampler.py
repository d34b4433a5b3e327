"""Uniform subgraph sampling and the L1 concentration bound it is judged against."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .features import EncodingKind, encode_masks, key_unpack, radices
from .graph import Graph
from .spectrum import FeatureSpectrum


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; independent streams come from distinct seeds."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class EmpiricalSpectrum:
    n: int
    kind: EncodingKind
    probs: dict  # FeatureKey -> empirical probability
    sample_size: int
    seed: int


def sample_masks(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` i.i.d. uniform masks over ``{0,1}^n`` (sampling with replacement)."""
    if n > 63:
        raise ValueError("sampling supports n <= 63")
    return rng.integers(0, 1 << n, size=size, dtype=np.uint64, endpoint=False)


def sample_counts(g: Graph, kind: EncodingKind, S: int, rng: np.random.Generator) -> Counter:
    kind = EncodingKind.parse(kind)
    n = g.num_vertices
    keys = encode_masks(g, sample_masks(n, S, rng), kind)
    codes = np.zeros(S, dtype=np.int64)
    for col, radix in enumerate(radices(n, kind)):
        codes = codes * radix + keys[:, col]
    uniq, freq = np.unique(codes, return_counts=True)
    return Counter({key_unpack(int(c), n, kind): int(f) for c, f in zip(uniq, freq)})


def sample_spectrum(g: Graph, kind: EncodingKind, S: int, seed: int) -> EmpiricalSpectrum:
    if S < 1:
        raise ValueError("sample size must be at least 1")
    kind = EncodingKind.parse(kind)
    counts = sample_counts(g, kind, S, make_rng(seed))
    probs = {k: c / S for k, c in sorted(counts.items())}
    return EmpiricalSpectrum(g.num_vertices, kind, probs, S, seed)


def true_distribution(s: FeatureSpectrum) -> dict:
    total = 1 << s.n
    return {k: Fraction(c, total) for k, c in s.sorted_items()}


def pi_max(P: dict) -> float:
    return float(max(P.values()))


def l1_distance(P: dict, Q: dict) -> float:
    keys = set(P) | set(Q)
    return float(sum(abs(float(P.get(k, 0)) - float(Q.get(k, 0))) for k in keys))


def phi(p: float) -> float:
    """ln((1 - p) / p) / (1 - 2p) for 0 < p < 1/2."""
    if not 0 < p < 0.5:
        raise ValueError(f"phi needs 0 < p < 1/2, got {p}")
    return math.log((1 - p) / p) / (1 - 2 * p)


def weissman_bound(a: int, pi_P: float, S: int, epsilon: float) -> float:
    """(2^a - 2) exp(-S phi(pi_P) eps^2 / 4), an upper bound on Pr(||P - P_hat||_1 >= eps)."""
    if a < 2:
        raise ValueError("need at least two outcomes")
    if epsilon <= 0 or S < 1:
        raise ValueError("epsilon must be positive and S at least 1")
    if not 0 < pi_P < 0.5:
        raise ValueError(f"largest outcome probability {pi_P} is not below 1/2; bound does not apply")
    log_b = math.log(2.0**a - 2) if a < 1000 else a * math.log(2)
    return math.exp(log_b - S * phi(pi_P) * epsilon**2 / 4)


def sample_size_for(a: int, epsilon: float, delta: float, pi_P: float, n: int | None = None) -> dict:
    """Smallest S whose concentration bound is at most ``delta``.

    Returns the exact requirement alongside the ``(a - log delta) / (eps^2 log n)``
    scaling for comparison.
    """
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    f = phi(pi_P)
    S = math.ceil(4 * (a * math.log(2) - math.log(delta)) / (epsilon**2 * f))
    out = {"S": max(S, 1), "phi": f, "pi_P": pi_P}
    if n is not None and n >= 2:
        out["asymptotic"] = (a - math.log(delta)) / (epsilon**2 * math.log(n))
    return out


@dataclass
class ConcentrationReport:
    n: int
    kind: str
    S: int
    seed: int
    l1: float
    epsilon: float
    delta: float
    bound: float
    pi_P: float
    phi: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def l1_trials(
    g: Graph, s: FeatureSpectrum, S: int, trials: int, seed: int
) -> np.ndarray:
    """L1 distances of ``trials`` independent empirical spectra; trial ``t`` uses seed ``(seed, t)``."""
    P = true_distribution(s)
    keys = list(P)
    index = {k: i for i, k in enumerate(keys)}
    p = np.array([float(P[k]) for k in keys])
    out = np.empty(trials)
    for t in range(trials):
        rng = np.random.Generator(np.random.Philox(key=[seed, t]))
        counts = sample_counts(g, s.kind, S, rng)
        q = np.zeros_like(p)
        extra = 0.0
        for k, c in counts.items():
            if k in index:
                q[index[k]] = c / S
            else:  # impossible for a correct encoder; keep the metric honest anyway
                extra += c / S
        out[t] = np.abs(p - q).sum() + extra
    return out
