"""Addresses in the rooted d-regular tree and hash-based per-object randomness.

A vertex is a tuple of child indices read from the root: the root is ``()``,
its children are ``(0,) .. (d-1,)``, and every other vertex ``v`` has the
``d - 1`` children ``v + (i,)`` for ``0 <= i < d - 1``.  An edge is named by
its child endpoint, so edges and non-root vertices are in bijection.

Uniforms are produced by a counter-based hash so that any edge of the
infinite tree can be sampled lazily and independently of evaluation order.
The algorithm is pinned bit-for-bit (``_kernels`` carries a compiled twin):

* chain:    ``h = fmix(seed + GOLDEN)``; for each index ``i``:
  ``h = fmix(h ^ ((i + 1) * GOLDEN))``
* key:      ``fmix((tag << 56) ^ stream ^ KEY_SALT)``
* finalize: ``fmix(fmix(h ^ (length * GOLDEN)) ^ key)``
* uniform:  top 53 bits of the result times ``2**-53``
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
KEY_SALT = 0xD1B54A32D192ED03

TAG_EDGE = 1
TAG_VERTEX = 2
TAG_GLOBAL = 3

MAX_DEGREE = 255
INT64_MAX = (1 << 63) - 1

VertexId = tuple[int, ...]
EdgeId = tuple[int, ...]


class AddressError(ValueError):
    """Raised for vertex/edge addresses that do not exist in the tree."""


@dataclass(frozen=True)
class TreeParams:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 3 or self.d > MAX_DEGREE:
            raise ValueError(f"degree must be an integer in [3, {MAX_DEGREE}], got {self.d!r}")


@dataclass(frozen=True)
class Seed:
    """A 64-bit seed plus a stream label separating independent copies."""

    value: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.value <= MASK64:
            raise ValueError(f"seed value out of 64-bit range: {self.value}")
        if not 0 <= self.stream < (1 << 56):
            raise ValueError(f"stream label out of range: {self.stream}")

    def with_stream(self, stream: int) -> "Seed":
        return Seed(self.value, stream)


def _degree(params: TreeParams | int) -> int:
    return params.d if isinstance(params, TreeParams) else TreeParams(params).d


def check_vertex(v: Sequence[int], params: TreeParams | int) -> VertexId:
    d = _degree(params)
    v = tuple(v)
    for depth, i in enumerate(v):
        bound = d if depth == 0 else d - 1
        if not isinstance(i, int) or not 0 <= i < bound:
            raise AddressError(f"index {i!r} at depth {depth} outside [0, {bound}) for d={d}")
    return v


def check_edge(e: Sequence[int], params: TreeParams | int) -> EdgeId:
    e = check_vertex(e, params)
    if not e:
        raise AddressError("the root is not the child endpoint of any edge")
    return e


def children(v: Sequence[int], params: TreeParams | int) -> list[VertexId]:
    d = _degree(params)
    v = check_vertex(v, d)
    count = d if not v else d - 1
    return [v + (i,) for i in range(count)]


def parent(v: Sequence[int]) -> VertexId:
    v = tuple(v)
    if not v:
        raise AddressError("the root has no parent")
    return v[:-1]


def path_count(params: TreeParams | int, n: int) -> int:
    """Number of self-avoiding paths of length ``n`` leaving the root."""
    d = _degree(params)
    if n < 1:
        raise ValueError(f"path length must be >= 1, got {n}")
    count = d * (d - 1) ** (n - 1)
    if count > INT64_MAX:
        raise OverflowError(f"path_count(d={d}, n={n}) exceeds 64-bit range")
    return count


def fmix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def chain_root(seed_value: int) -> int:
    return fmix(seed_value + GOLDEN)


def chain_step(h: int, index: int) -> int:
    return fmix(h ^ (((index + 1) * GOLDEN) & MASK64))


def chain(seed_value: int, path: Sequence[int]) -> int:
    h = chain_root(seed_value)
    for i in path:
        h = chain_step(h, i)
    return h


def stream_key(tag: int, stream: int) -> int:
    return fmix((tag << 56) ^ stream ^ KEY_SALT)


def finalize(h: int, length: int, key: int) -> int:
    return fmix(fmix(h ^ ((length * GOLDEN) & MASK64)) ^ key)


def to_unit(x: int) -> float:
    return (x >> 11) * 2.0**-53


def edge_uniform(seed: Seed, e: Sequence[int]) -> float:
    e = tuple(e)
    if not e:
        raise AddressError("the root is not the child endpoint of any edge")
    return to_unit(finalize(chain(seed.value, e), len(e), stream_key(TAG_EDGE, seed.stream)))


def vertex_uniform(seed: Seed, v: Sequence[int]) -> float:
    v = tuple(v)
    return to_unit(finalize(chain(seed.value, v), len(v), stream_key(TAG_VERTEX, seed.stream)))


def global_uniform(seed: Seed) -> float:
    """One uniform per seed, independent of every vertex and edge."""
    return to_unit(finalize(chain_root(seed.value), 0, stream_key(TAG_GLOBAL, seed.stream)))


def level_uniforms(seed: Seed, d: int, depth: int, kind: str = "edge"):
    """All uniforms at one depth of the tree, in lexicographic address order.

    ``kind`` is ``"edge"`` (edges whose child sits at ``depth``) or
    ``"vertex"``.  Returns a float64 numpy array of length
    ``d * (d-1)**(depth-1)`` (1 for the root vertex).
    """
    from . import _kernels

    d = _degree(d)
    if kind == "edge":
        tag = TAG_EDGE
        if depth < 1:
            raise AddressError("edges start at depth 1")
    elif kind == "vertex":
        tag = TAG_VERTEX
        if depth < 0:
            raise AddressError("negative depth")
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if depth > 0:
        path_count(d, depth)
    return _kernels.level_uniforms(np.uint64(chain_root(seed.value)), d, depth,
                                   np.uint64(stream_key(tag, seed.stream)))
