"""Exact simulation of the index-removal, swap-test, switch-test and amplitude
amplification circuits on small graphs.

States are stored block-sparse: one dense real vector over the index register
for every (control flag, feature key) label that carries amplitude. The
feature register only ever holds basis states, so labels are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .features import EncodingKind, encode_masks
from .graph import Graph

MAX_SIM_N = 14
NORM_TOL = 1e-12


def fwht(vec: np.ndarray, axis: int = -1) -> np.ndarray:
    """Orthonormal Walsh-Hadamard transform (H^{(x)k}) along ``axis``; length must be 2^k."""
    a = np.moveaxis(np.array(vec, dtype=float), axis, -1)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("transform length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(*lead, size // (2 * h), 2, h)
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a = np.stack([top, bot], axis=-2).reshape(*lead, size)
        h *= 2
    a /= math.sqrt(size)
    return np.moveaxis(a, -1, axis)


@dataclass
class SparseState:
    """``blocks[(flag, key)]`` is the amplitude vector over the ``2^n`` index states."""

    n: int
    blocks: dict = field(default_factory=dict)
    n_prime: int | None = None

    def norm_sq(self) -> float:
        return float(sum(np.dot(b, b) for b in self.blocks.values()))

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm_sq() - 1.0) > tol:
            raise AssertionError(f"state norm^2 = {self.norm_sq()!r}")

    def amplitudes(self) -> dict:
        """Nonzero amplitudes keyed by (flag, index, key)."""
        out = {}
        for (flag, key), vec in self.blocks.items():
            for x in np.flatnonzero(vec).tolist():
                out[(flag, x, key)] = float(vec[x])
        return out

    def feature_amplitudes(self) -> dict:
        """For index-free states (n == 0): (flag, key) -> amplitude."""
        if self.n != 0:
            raise ValueError("state still carries an index register")
        return {label: float(vec[0]) for label, vec in self.blocks.items()}

    def copy(self) -> SparseState:
        return SparseState(self.n, {k: v.copy() for k, v in self.blocks.items()}, self.n_prime)

    def inner(self, other: SparseState) -> float:
        return float(sum(np.dot(v, other.blocks[k]) for k, v in self.blocks.items() if k in other.blocks))


@dataclass
class PostselectResult:
    probability: float
    state: SparseState
    norm_constant: float


def _index_blocks(g: Graph, kind: EncodingKind, size: int, offset_flag, weight: float) -> dict:
    n = g.num_vertices
    masks = np.arange(1 << n, dtype=np.uint64)
    keys = encode_masks(g, masks, kind)
    blocks = {}
    for x, key in enumerate(map(tuple, keys.tolist())):
        label = (offset_flag, key)
        if label not in blocks:
            blocks[label] = np.zeros(size)
        blocks[label][x] = weight
    return blocks


def _check_budget(*ns: int) -> None:
    if max(ns) > MAX_SIM_N:
        raise ValueError(f"circuit simulation limited to n <= {MAX_SIM_N}")


def build_indexed_state(g: Graph, kind: EncodingKind) -> SparseState:
    """sum_x |x>|E(g, x)> / sqrt(2^n), the oracle evaluated classically per basis state."""
    kind = EncodingKind.parse(kind)
    n = g.num_vertices
    _check_budget(n)
    return SparseState(n, _index_blocks(g, kind, 1 << n, None, 1 / math.sqrt(1 << n)))


def apply_index_hadamard(s: SparseState) -> SparseState:
    return SparseState(s.n, {label: fwht(vec) for label, vec in s.blocks.items()}, s.n_prime)


def _postselect_zero(s: SparseState) -> tuple[float, dict]:
    kept = {label: vec[0] for label, vec in s.blocks.items() if vec[0] != 0.0}
    prob = float(sum(a * a for a in kept.values()))
    return prob, kept


def hadamard_index_and_postselect(s: SparseState) -> PostselectResult:
    """Apply H on the index register and keep the ``0^n`` outcome."""
    if s.n_prime is not None:
        raise ValueError("use controlled_hadamard_postselect for switch-prepared states")
    prob, kept = _postselect_zero(apply_index_hadamard(s))
    norm = math.sqrt(prob)
    state = SparseState(0, {label: np.array([a / norm]) for label, a in kept.items()})
    return PostselectResult(prob, state, norm)


def _feature_vector(r: PostselectResult, flag=None) -> dict:
    return {key: amp for (f, key), amp in r.state.feature_amplitudes().items() if f == flag}


def swap_test_prob(a: PostselectResult, b: PostselectResult) -> float:
    """Pr(ancilla = 0) for H - controlled-SWAP - H on two feature registers."""
    va, vb = _feature_vector(a), _feature_vector(b)
    # basis labels (ancilla, key_A, key_B)
    state = {(0, ka, kb): xa * xb for ka, xa in va.items() for kb, xb in vb.items()}
    r2 = 1 / math.sqrt(2)

    def hadamard(st):
        out = {}
        for (anc, ka, kb), amp in st.items():
            out[(0, ka, kb)] = out.get((0, ka, kb), 0.0) + r2 * amp
            sign = -1.0 if anc else 1.0
            out[(1, ka, kb)] = out.get((1, ka, kb), 0.0) + sign * r2 * amp
        return out

    state = hadamard(state)
    state = {((anc, kb, ka) if anc else (anc, ka, kb)): amp for (anc, ka, kb), amp in state.items()}
    state = hadamard(state)
    return float(sum(amp * amp for (anc, _, _), amp in state.items() if anc == 0))


def build_switch_state(g: Graph, h: Graph, kind: EncodingKind) -> SparseState:
    """(|0>|G-bar> + |1>|0^(n-n')>|G'-bar>) / sqrt(2); requires n >= n'."""
    kind = EncodingKind.parse(kind)
    n, m = g.num_vertices, h.num_vertices
    if n < m:
        raise ValueError("first graph must have at least as many vertices as the second")
    _check_budget(n, m)
    blocks = _index_blocks(g, kind, 1 << n, 0, 1 / math.sqrt(2 * (1 << n)))
    # the shorter index occupies the low n' qubits; the padding qubits stay |0>
    blocks.update(_index_blocks(h, kind, 1 << n, 1, 1 / math.sqrt(2 * (1 << m))))
    return SparseState(n, blocks, m)


def controlled_hadamard_postselect(s: SparseState) -> PostselectResult:
    """Controlled H^{(x)n} (flag 0) / H^{(x)n'} (flag 1), then keep index ``0^n``."""
    if s.n_prime is None:
        raise ValueError("state was not prepared for the switch test")
    n, m = s.n, s.n_prime
    out = {}
    for (flag, key), vec in s.blocks.items():
        if flag == 0:
            out[(flag, key)] = fwht(vec)
        else:
            out[(flag, key)] = fwht(vec.reshape(1 << (n - m), 1 << m), axis=1).reshape(-1)
    transformed = SparseState(n, out, m)
    transformed.check_norm()
    prob, kept = _postselect_zero(transformed)
    norm = math.sqrt(prob)
    state = SparseState(0, {label: np.array([a / norm]) for label, a in kept.items()}, m)
    # normalisation of the branch weights 1/2^n and 1/2^n' (without the 1/sqrt2 of the control)
    return PostselectResult(prob, state, math.sqrt(2 * prob))


def switch_test_prob(r: PostselectResult) -> float:
    """Pr(control = 0) after a Hadamard on the control qubit."""
    amps = r.state.feature_amplitudes()
    keys = {key for _, key in amps}
    r2 = 1 / math.sqrt(2)
    return float(sum((r2 * (amps.get((0, k), 0.0) + amps.get((1, k), 0.0))) ** 2 for k in keys))


def amplify(psi: SparseState, t: int) -> SparseState:
    """``t`` Grover iterations toward the index-``0^n`` subspace of ``psi``.

    Each iteration flips the sign of the good components and then reflects
    about ``psi`` itself (2|psi><psi| - 1, the preparation A S_0 A^dagger applied
    through the stored state).
    """
    if t < 0:
        raise ValueError("iteration count must be non-negative")
    phi = psi.copy()
    for _ in range(t):
        for vec in phi.blocks.values():
            vec[0] = -vec[0]
        overlap = phi.inner(psi)
        for label, vec in phi.blocks.items():
            vec *= -1.0
            vec += 2.0 * overlap * psi.blocks[label]
    return phi


def good_mass(s: SparseState) -> float:
    return float(sum(vec[0] ** 2 for vec in s.blocks.values()))


def aa_amplitude(g: Graph, kind: EncodingKind, t: int) -> float:
    """Probability mass on index ``0^n`` after ``t`` amplification rounds."""
    psi = apply_index_hadamard(build_indexed_state(g, kind))
    return good_mass(amplify(psi, t))


def aa_switch_amplitude(g: Graph, h: Graph, kind: EncodingKind, t: int) -> float:
    s = build_switch_state(g, h, kind)
    n, m = s.n, s.n_prime
    psi = SparseState(
        n,
        {
            (flag, key): fwht(vec) if flag == 0 else fwht(vec.reshape(1 << (n - m), 1 << m), axis=1).reshape(-1)
            for (flag, key), vec in s.blocks.items()
        },
        m,
    )
    return good_mass(amplify(psi, t))


def aa_closed_form(p: float, t: int) -> float:
    theta = math.asin(math.sqrt(p))
    return math.sin((2 * t + 1) * theta) ** 2


def sample_shots(probability: float, shots: int, seed: int) -> float:
    """Fraction of ``shots`` seeded Bernoulli trials that succeed."""
    rng = np.random.Generator(np.random.Philox(seed))
    return float(rng.binomial(shots, probability) / shots)


@dataclass
class PairVerification:
    n: int
    n_prime: int
    kind: str
    p_postselect: float
    p_bound: float
    p_switch: float
    p_switch_bound: float
    swap_pr0: float
    switch_pr0: float
    bh_closed: float
    sh_closed: float
    max_abs_dev: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def verify_pair(g: Graph, h: Graph, kind: EncodingKind) -> PairVerification:
    """Simulate every circuit on (g, h) and compare with the closed-form kernels."""
    from .kernels import bh_kernel, sh_kernel
    from .spectrum import enumerate_spectrum, success_probability

    kind = EncodingKind.parse(kind)
    if g.num_vertices < h.num_vertices:
        g, h = h, g
    sg, sh = enumerate_spectrum(g, kind), enumerate_spectrum(h, kind)
    ra = hadamard_index_and_postselect(build_indexed_state(g, kind))
    rb = hadamard_index_and_postselect(build_indexed_state(h, kind))
    rs = controlled_hadamard_postselect(build_switch_state(g, h, kind))
    swap = swap_test_prob(ra, rb)
    switch = switch_test_prob(rs)
    bh, shk = bh_kernel(sg, sh), sh_kernel(sg, sh)
    exact_p = float(success_probability(sg).exact)
    exact_sw = (float(success_probability(sg).exact) + float(success_probability(sh).exact)) / 2
    dev = max(
        abs(2 * swap - 1 - bh * bh),
        abs(2 * switch - 1 - shk),
        abs(ra.probability - exact_p),
        abs(rs.probability - exact_sw),
    )
    return PairVerification(
        n=g.num_vertices,
        n_prime=h.num_vertices,
        kind=kind.name,
        p_postselect=ra.probability,
        p_bound=1 / sg.distinct_keys,
        p_switch=rs.probability,
        p_switch_bound=(1 / sg.distinct_keys + 1 / sh.distinct_keys) / 2,
        swap_pr0=swap,
        switch_pr0=switch,
        bh_closed=bh,
        sh_closed=shk,
        max_abs_dev=dev,
    )
