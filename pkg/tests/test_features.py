import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graphs
from subgraph_qkernel.features import (
    EncodingKind,
    encode_masks,
    encode_subgraph,
    index_string,
    key_from_text,
    key_pack,
    key_to_text,
    key_unpack,
    mask_from_index_string,
)
from subgraph_qkernel.graph import Graph

VE, VED = EncodingKind.VE, EncodingKind.VED


def naive_encode(g, x):
    """Pairwise double loop, no bitset arithmetic."""
    members = [i for i in range(g.num_vertices) if (x >> i) & 1]
    adj = lambda i, j: (g.adjacency[i] >> j) & 1  # noqa: E731
    e = sum(adj(i, j) for i, j in itertools.combinations(members, 2))
    deg = [sum(adj(i, j) for j in members if j != i) for i in members]
    return (len(members), e, deg.count(1), deg.count(2), deg.count(3)), deg


def test_toy_encodings(toy):
    g, star = toy
    assert encode_subgraph(g, 0b111, VED) == (3, 3, 0, 3, 0)
    # index strings list vertex 0 first: "011" is vertices 1 and 2
    assert mask_from_index_string("011") == 0b110
    assert index_string(0b110, 3) == "011"
    assert encode_subgraph(star, mask_from_index_string("011"), VED) == (2, 0, 0, 0, 0)
    assert encode_subgraph(star, mask_from_index_string("110"), VED) == (2, 1, 2, 0, 0)
    assert encode_subgraph(g, 0, VED) == (0, 0, 0, 0, 0)
    assert encode_subgraph(g, 0, VE) == (0, 0)


def test_mask_out_of_range(toy):
    with pytest.raises(ValueError):
        encode_subgraph(toy[0], 0b1000, VE)


def test_popcount_encoding_matches_double_loop():
    for g in random_graphs(25, 12, seed=11, density=0.45):
        n = g.num_vertices
        for x in range(1 << n) if n <= 8 else np.random.default_rng(n).integers(0, 1 << n, 300).tolist():
            ref, deg = naive_encode(g, x)
            assert encode_subgraph(g, x, VED) == ref
            assert encode_subgraph(g, x, VE) == ref[:2]
            # every member has some induced degree in 0..n-1
            assert sum(deg.count(d) for d in range(n)) == ref[0]


def test_full_mask_gives_vertices_and_edges():
    for g in random_graphs(20, 12, seed=5):
        k = encode_subgraph(g, (1 << g.num_vertices) - 1, VED)
        assert k[:2] == (g.num_vertices, g.num_edges)


def test_vectorised_encoder_agrees():
    for g in random_graphs(10, 10, seed=2):
        masks = np.arange(1 << g.num_vertices)
        for kind in (VE, VED):
            got = [tuple(r) for r in encode_masks(g, masks, kind).tolist()]
            assert got == [encode_subgraph(g, int(x), kind) for x in masks]


def test_key_invariants():
    for g in random_graphs(10, 9, seed=8):
        for x in range(1 << g.num_vertices):
            v, e, d1, d2, d3 = encode_subgraph(g, x, VED)
            assert e <= v * (v - 1) // 2 and d1 + d2 + d3 <= v
            if v == 0:
                assert (e, d1, d2, d3) == (0, 0, 0, 0)


def all_keys(n):
    for v in range(n + 1):
        for e in range(n * (n - 1) // 2 + 1):
            for d in itertools.product(range(n + 1), repeat=3):
                yield (v, e) + d


@pytest.mark.parametrize("n", range(1, 7))
def test_key_pack_roundtrip_and_order(n):
    keys = list(all_keys(n))  # generated in lexicographic order
    packed = [key_pack(k, n) for k in keys]
    assert all(a < b for a, b in zip(packed, packed[1:]))
    assert all(key_unpack(p, n, VED) == k for p, k in zip(packed, keys))
    ve_keys = sorted({k[:2] for k in keys})
    ve_packed = [key_pack(k, n) for k in ve_keys]
    assert ve_packed == sorted(ve_packed) and len(set(ve_packed)) == len(ve_packed)
    assert all(key_unpack(p, n, VE) == k for p, k in zip(ve_packed, ve_keys))


def test_key_pack_errors():
    assert key_pack((0, 0, 0, 0, 0), 5) == 0
    with pytest.raises(ValueError):
        key_pack((7, 0), 5)
    with pytest.raises(ValueError):
        key_pack((1, 2, 3), 5)


@settings(max_examples=100)
@given(st.lists(st.integers(0, 40), min_size=2, max_size=2) | st.lists(st.integers(0, 40), min_size=5, max_size=5))
def test_key_text_roundtrip(comps):
    k = tuple(comps)
    assert key_from_text(key_to_text(k)) == k


def test_single_vertex_keys():
    g = Graph(1, (0,))
    assert [encode_subgraph(g, x, VE) for x in (0, 1)] == [(0, 0), (1, 0)]
