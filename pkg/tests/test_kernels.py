import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graphs
from subgraph_qkernel.features import EncodingKind
from subgraph_qkernel.graph import Graph, random_graph
from subgraph_qkernel.kernels import (
    GramMatrix,
    KernelKind,
    bh_kernel,
    classical_normalized_inner,
    dot_spectra,
    gram,
    naive_indexed_overlap,
    sh_coefficient_matrix,
    sh_factor,
    sh_kernel,
)
from subgraph_qkernel.spectrum import FeatureSpectrum, enumerate_spectrum

VE, VED = EncodingKind.VE, EncodingKind.VED


@pytest.fixture(scope="module")
def toy_spectra(toy):
    return enumerate_spectrum(toy[0], VED), enumerate_spectrum(toy[1], VED)


def test_dot(toy_spectra):
    s, t = toy_spectra
    assert dot_spectra(s, t) == 1 * 1 + 3 * 3 + 3 * 2
    assert dot_spectra(s, s) == 20
    a = FeatureSpectrum(1, VE, {(0, 0): 1, (1, 0): 1})
    b = FeatureSpectrum(1, VE, {(0, 1): 1, (1, 1): 1})
    assert dot_spectra(a, b) == 0


def test_encoding_mismatch(toy):
    with pytest.raises(ValueError, match="mismatch"):
        bh_kernel(enumerate_spectrum(toy[0], VE), enumerate_spectrum(toy[0], VED))


def test_toy_values(toy, toy_spectra):
    s, t = toy_spectra
    assert bh_kernel(s, t) == pytest.approx(16 / math.sqrt(20 * 16))
    assert abs(bh_kernel(s, t) - 0.8944) < 5e-4
    assert sh_kernel(s, t) == pytest.approx(32 / 36)
    assert abs(sh_kernel(s, t) - 0.8889) < 5e-4
    assert sh_kernel(s, t) <= bh_kernel(s, t)
    assert naive_indexed_overlap(*toy, VED) == 0.75
    assert classical_normalized_inner(s, t) == 0.25


def test_self_similarity():
    for g in random_graphs(20, 10, seed=1):
        for kind in (VE, VED):
            s = enumerate_spectrum(g, kind)
            assert bh_kernel(s, s) == 1.0
            assert sh_kernel(s, s) == 1.0
            assert naive_indexed_overlap(g, g, kind) == 1.0


def test_edge_vs_edgeless():
    # brute-force spectra {(0,0):1,(1,0):2,(2,1):1} and {(0,0):1,(1,0):2,(2,0):1}
    a = enumerate_spectrum(Graph.from_edges(2, [(0, 1)]), VE)
    b = enumerate_spectrum(Graph.from_edges(2, []), VE)
    assert a.counts == {(0, 0): 1, (1, 0): 2, (2, 1): 1}
    assert b.counts == {(0, 0): 1, (1, 0): 2, (2, 0): 1}
    assert bh_kernel(a, b) == pytest.approx(5 / 6)


def test_naive_triangle_vs_empty():
    k3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    empty = Graph.from_edges(3, [])
    assert naive_indexed_overlap(k3, empty, VE) == 0.5
    with pytest.raises(ValueError):
        naive_indexed_overlap(k3, Graph(2, (0, 0)), VE)


def test_classical_single_vertex():
    s = enumerate_spectrum(Graph(1, (0,)), VE)
    assert classical_normalized_inner(s, s) == 0.5


def dense_vector(s, keys):
    return np.array([s.counts.get(k, 0) for k in keys], dtype=float)


def test_bh_is_cosine_of_dense_vectors():
    graphs = random_graphs(15, 10, seed=31)
    for kind in (VE, VED):
        spectra = [enumerate_spectrum(g, kind) for g in graphs]
        keys = sorted(set().union(*(s.counts for s in spectra)))
        for s in spectra:
            for t in spectra:
                u, v = dense_vector(s, keys), dense_vector(t, keys)
                cos = u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
                assert bh_kernel(s, t) == pytest.approx(cos, rel=1e-12)


def sh_from_definition(s, t):
    coef = Fraction(2) / (Fraction(2**t.n, 2**s.n) * s.sum_sq_counts + Fraction(2**s.n, 2**t.n) * t.sum_sq_counts)
    return float(coef * dot_spectra(s, t))


def test_sh_matches_rational_definition_unequal_n():
    graphs = random_graphs(20, 10, seed=17)
    spectra = [enumerate_spectrum(g, VED) for g in graphs]
    for s in spectra:
        for t in spectra:
            assert sh_kernel(s, t) == sh_from_definition(s, t)
            assert sh_kernel(s, t) == sh_kernel(t, s)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ordering_sh_le_bh_le_1(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(1, 10)), float(rng.random()), rng)
    h = random_graph(int(rng.integers(1, 10)), float(rng.random()), rng)
    for kind in (VE, VED):
        s, t = enumerate_spectrum(g, kind), enumerate_spectrum(h, kind)
        sh, bh = sh_kernel(s, t), bh_kernel(s, t)
        assert 0 <= sh <= bh <= 1
        assert classical_normalized_inner(s, t) <= bh


def test_gram_toy(toy_spectra):
    G = gram(list(toy_spectra), "bh")
    assert G.entries[0, 0] == G.entries[1, 1] == 1.0
    assert abs(G.entries[0, 1] - 0.8944) < 5e-4
    G = gram(list(toy_spectra), KernelKind.SH)
    assert abs(G.entries[1, 0] - 0.8889) < 5e-4
    assert gram([toy_spectra[0]], "bh").entries.tolist() == [[1.0]]
    with pytest.raises(ValueError):
        gram(list(toy_spectra), "naive")


def test_gram_matches_elementwise_and_permutes():
    graphs = random_graphs(25, 10, seed=41)
    spectra = [enumerate_spectrum(g, VED) for g in graphs]
    fns = {"bh": bh_kernel, "sh": sh_kernel, "classical": classical_normalized_inner}
    perm = np.random.default_rng(0).permutation(len(spectra))
    for name, fn in fns.items():
        G = gram(spectra, name).entries
        assert np.array_equal(G, G.T)
        expect = np.array([[fn(s, t) for t in spectra] for s in spectra])
        assert np.array_equal(G, expect)
        Gp = gram([spectra[i] for i in perm], name).entries
        assert np.array_equal(Gp, G[np.ix_(perm, perm)])


def test_gram_psd():
    for seed in range(5):
        graphs = random_graphs(40, 10, seed=100 + seed)
        for kind in (VE, VED):
            spectra = [enumerate_spectrum(g, kind) for g in graphs]
            for name in ("bh", "sh"):
                G = gram(spectra, name).entries
                assert np.linalg.eigvalsh(G).min() >= -1e-8 * np.trace(G)


def test_gram_csv_roundtrip(toy_spectra, tmp_path):
    G = gram(list(toy_spectra), "sh", dataset="toy")
    text = G.to_csv(tmp_path / "g.csv")
    assert text.splitlines()[0] == "# dataset=toy kernel=SH encoding=VED"
    back = GramMatrix.from_csv(tmp_path / "g.csv")
    assert np.array_equal(back.entries, G.entries)
    assert back.kind is KernelKind.SH and back.encoding is VED


def test_sh_factor_n1(toy_spectra):
    s = toy_spectra[0]
    F = sh_factor([s])
    assert F.L[0, 0] == pytest.approx(1 / math.sqrt(2 * 20))
    assert F.coefficient_matrix()[0, 0] == pytest.approx(1 / 20)


def test_sh_factor_toy_pair(toy_spectra):
    F = sh_factor(list(toy_spectra))
    assert F.L[0, 1] == 0.0
    assert F.coefficient_matrix()[1, 0] == pytest.approx(2 / 36, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_sh_factor_random(seed):
    spectra = [enumerate_spectrum(g, VED) for g in random_graphs(20, 10, seed=seed)]
    F = sh_factor(spectra)
    C = sh_coefficient_matrix(spectra)
    assert np.all(np.triu(F.L, 1) == 0)
    assert np.max(np.abs(F.coefficient_matrix() - C) / np.abs(C)) < 1e-9


def test_sh_factor_with_duplicate_graph():
    g = random_graph(6, 0.5, np.random.default_rng(2))
    spectra = [enumerate_spectrum(x, VE) for x in (g, g, random_graph(5, 0.5, np.random.default_rng(3)))]
    F = sh_factor(spectra)
    C = sh_coefficient_matrix(spectra)
    assert np.max(np.abs(F.coefficient_matrix() - C) / np.abs(C)) < 1e-9
