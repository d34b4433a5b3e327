"""Encoding functions mapping an induced subgraph to a small integer tuple.

A subgraph is an ``n``-bit mask ``x``; vertex ``i`` belongs to it iff bit ``i``
is set. ``VE`` yields ``(#v, #e)``; ``VED`` appends the number of vertices of
induced degree exactly 1, 2 and 3.
"""

from __future__ import annotations

import enum

import numpy as np

from .graph import Graph


class EncodingKind(enum.Enum):
    VE = "ve"
    VED = "ved"

    @property
    def width(self) -> int:
        return 2 if self is EncodingKind.VE else 5

    @classmethod
    def parse(cls, value) -> EncodingKind:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


FeatureKey = tuple  # (v, e) or (v, e, d1, d2, d3)


def encode_subgraph(g: Graph, x: int, kind: EncodingKind) -> FeatureKey:
    if x < 0 or x >> g.num_vertices:
        raise ValueError(f"mask {x:#x} has bits outside the {g.num_vertices} vertices")
    v = e2 = d1 = d2 = d3 = 0
    rest = x
    while rest:
        low = rest & -rest
        i = low.bit_length() - 1
        rest ^= low
        deg = (g.adjacency[i] & x).bit_count()
        v += 1
        e2 += deg
        if deg == 1:
            d1 += 1
        elif deg == 2:
            d2 += 1
        elif deg == 3:
            d3 += 1
    if EncodingKind.parse(kind) is EncodingKind.VE:
        return (v, e2 // 2)
    return (v, e2 // 2, d1, d2, d3)


def encode_masks(g: Graph, masks: np.ndarray, kind: EncodingKind) -> np.ndarray:
    """Vectorised :func:`encode_subgraph` over an array of masks; returns (len, width) int64."""
    kind = EncodingKind.parse(kind)
    masks = np.asarray(masks, dtype=np.uint64)
    out = np.zeros((masks.size, kind.width), dtype=np.int64)
    one = np.uint64(1)
    for i, row in enumerate(g.adjacency):
        member = ((masks >> np.uint64(i)) & one).astype(bool)
        deg = np.bitwise_count(masks & np.uint64(row)).astype(np.int64)
        deg[~member] = 0
        out[:, 0] += member
        out[:, 1] += deg
        if kind is EncodingKind.VED:
            out[:, 2] += member & (deg == 1)
            out[:, 3] += member & (deg == 2)
            out[:, 4] += member & (deg == 3)
    out[:, 1] //= 2
    return out


def radices(n: int, kind: EncodingKind) -> tuple[int, ...]:
    r = (n + 1, n * (n - 1) // 2 + 1, n + 1, n + 1, n + 1)
    return r[: EncodingKind.parse(kind).width]


def key_pack(k: FeatureKey, n: int) -> int:
    """Mixed-radix packing, most significant component first."""
    kind = EncodingKind.VE if len(k) == 2 else EncodingKind.VED
    if len(k) not in (2, 5):
        raise ValueError(f"feature key must have 2 or 5 components, got {k!r}")
    out = 0
    for comp, radix in zip(k, radices(n, kind)):
        if not 0 <= comp < radix:
            raise ValueError(f"component {comp} out of range for n={n} in {k!r}")
        out = out * radix + comp
    return out


def key_unpack(packed: int, n: int, kind: EncodingKind) -> FeatureKey:
    comps = []
    for radix in reversed(radices(n, kind)):
        packed, c = divmod(packed, radix)
        comps.append(c)
    if packed:
        raise ValueError("packed key out of range")
    return tuple(reversed(comps))


def key_to_text(k: FeatureKey) -> str:
    return ":".join(str(c) for c in k)


def key_from_text(text: str) -> FeatureKey:
    parts = text.strip().split(":")
    if len(parts) not in (2, 5):
        raise ValueError(f"bad feature key {text!r}")
    return tuple(int(p) for p in parts)


def mask_from_index_string(bits: str) -> int:
    """``"110"`` -> vertices 0 and 1; the leftmost character is vertex 0."""
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


def index_string(x: int, n: int) -> str:
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))
