"""Invariant percolation laws on the edges (and sites) of the d-regular tree.

Laws are small frozen dataclasses that compose: ``MaxOfK(Bernoulli(p), 2)``
is the maximum of two independent Bernoulli percolations.  They are
evaluated lazily per edge from a :class:`~treedense.tree.Seed`, so the same
(spec, seed, edge) always gives the same state.

Stream allocation: a law evaluated under stream ``s`` hands copy ``i`` of a
``MaxOfK`` the stream ``s * STREAM_FANOUT + i``.  At the top level (``s=0``)
copy ``i`` therefore uses stream ``i``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from . import _kernels
from .stats import wilson_interval
from .tree import (
    TAG_EDGE,
    TAG_VERTEX,
    Seed,
    check_edge,
    check_vertex,
    edge_uniform,
    global_uniform,
    stream_key,
    vertex_uniform,
)

STREAM_FANOUT = 1024


class ModeError(TypeError):
    """A law was used in the wrong mode (edge law as site law or vice versa)."""


class SamplerParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"Bernoulli probability outside [0, 1]: {self.p}")


@dataclass(frozen=True)
class MaxOfK:
    base: "EdgeSpec"
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or not 1 <= self.k <= STREAM_FANOUT:
            raise ValueError(f"k must be an integer in [1, {STREAM_FANOUT}], got {self.k!r}")
        if not is_edge_process(self.base):
            raise ModeError("MaxOfK wraps edge processes only")


@dataclass(frozen=True)
class Complement:
    base: "EdgeSpec"

    def __post_init__(self):
        if not is_edge_process(self.base):
            raise ModeError("Complement wraps edge processes only")


@dataclass(frozen=True)
class MutualChoiceMatching:
    """Every vertex picks one incident edge uniformly; an edge is open when both ends pick it.

    Incident edges are ordered parent edge first, then children; the root
    picks among its d children.
    """


@dataclass(frozen=True)
class BipartiteSite:
    """Site process: one side of the bipartition, chosen by a global fair bit, is open."""


EdgeSpec = Union[Bernoulli, MaxOfK, Complement, MutualChoiceMatching]
SamplerSpec = Union[EdgeSpec, BipartiteSite]

_EDGE_TYPES = (Bernoulli, MaxOfK, Complement, MutualChoiceMatching)


def is_edge_process(spec) -> bool:
    return isinstance(spec, _EDGE_TYPES)


def _needs_degree(spec) -> bool:
    if isinstance(spec, MutualChoiceMatching):
        return True
    if isinstance(spec, (MaxOfK, Complement)):
        return _needs_degree(spec.base)
    return False


def _require_edge(spec):
    if not is_edge_process(spec):
        raise ModeError(f"{render(spec)} is not an edge process")


def _require_degree(spec, d):
    if d is None and _needs_degree(spec):
        raise ValueError(f"{render(spec)} needs the tree degree d")


# -- reference evaluation ----------------------------------------------------

def _choice(u: float, d: int) -> int:
    return min(int(d * u), d - 1)


def _edge_state(spec, seed_value: int, stream: int, e: tuple, d) -> int:
    if isinstance(spec, Bernoulli):
        return int(edge_uniform(Seed(seed_value, stream), e) < spec.p)
    if isinstance(spec, MaxOfK):
        return max(_edge_state(spec.base, seed_value, stream * STREAM_FANOUT + i, e, d)
                   for i in range(spec.k))
    if isinstance(spec, Complement):
        return 1 - _edge_state(spec.base, seed_value, stream, e, d)
    if isinstance(spec, MutualChoiceMatching):
        seed = Seed(seed_value, stream)
        pos = e[-1] if len(e) == 1 else e[-1] + 1
        parent_pick = _choice(vertex_uniform(seed, e[:-1]), d)
        child_pick = _choice(vertex_uniform(seed, e), d)
        return int(parent_pick == pos and child_pick == 0)
    raise ModeError(f"{spec!r} is not an edge process")


def edge_state(spec: EdgeSpec, seed: Seed, e: Sequence[int], d: int | None = None) -> int:
    """0/1 state of edge ``e`` (named by its child endpoint).

    ``d`` is needed for laws containing :class:`MutualChoiceMatching`; when
    given, the address is validated against it.
    """
    _require_edge(spec)
    _require_degree(spec, d)
    e = check_edge(e, d if d is not None else 255)
    return _edge_state(spec, seed.value, seed.stream, e, d)


def copy_states(spec: MaxOfK, seed: Seed, e: Sequence[int], d: int | None = None) -> tuple[int, ...]:
    """States of the k underlying copies of a MaxOfK law at edge ``e``."""
    if not isinstance(spec, MaxOfK):
        raise ModeError("copy_states needs a MaxOfK law")
    _require_degree(spec, d)
    e = check_edge(e, d if d is not None else 255)
    return tuple(
        _edge_state(spec.base, seed.value, seed.stream * STREAM_FANOUT + i, e, d)
        for i in range(spec.k)
    )


def side_bit(seed: Seed) -> int:
    """The global fair bit of :class:`BipartiteSite`: the parity of the open side."""
    return int(global_uniform(seed) < 0.5)


def site_state(spec: BipartiteSite, seed: Seed, v: Sequence[int]) -> int:
    if not isinstance(spec, BipartiteSite):
        raise ModeError(f"{render(spec)} is not a site process")
    return int(len(tuple(v)) % 2 == side_bit(seed))


def exact_marginal(spec: SamplerSpec, d: int | None = None) -> float:
    """Closed-form probability that a fixed edge (or site) is open."""
    if isinstance(spec, Bernoulli):
        return spec.p
    if isinstance(spec, MaxOfK):
        return 1.0 - (1.0 - exact_marginal(spec.base, d)) ** spec.k
    if isinstance(spec, Complement):
        return 1.0 - exact_marginal(spec.base, d)
    if isinstance(spec, MutualChoiceMatching):
        if d is None:
            raise ValueError("matching marginal depends on d")
        return 1.0 / d**2
    if isinstance(spec, BipartiteSite):
        return 0.5
    raise TypeError(f"unknown sampler {spec!r}")


# -- compiled programs ---------------------------------------------------------

@dataclass(frozen=True)
class Program:
    """Postfix form of an edge law for the compiled kernels."""

    ops: np.ndarray
    fvals: np.ndarray
    keys: np.ndarray
    ivals: np.ndarray

    @property
    def arrays(self):
        return self.ops, self.fvals, self.keys, self.ivals


def _emit(spec, stream, out):
    if isinstance(spec, Bernoulli):
        out.append((_kernels.OP_BERNOULLI, spec.p, stream_key(TAG_EDGE, stream), 0))
    elif isinstance(spec, MutualChoiceMatching):
        out.append((_kernels.OP_MATCHING, 0.0, stream_key(TAG_VERTEX, stream), 0))
    elif isinstance(spec, MaxOfK):
        for i in range(spec.k):
            _emit(spec.base, stream * STREAM_FANOUT + i, out)
        out.append((_kernels.OP_MAX, 0.0, 0, spec.k))
    elif isinstance(spec, Complement):
        _emit(spec.base, stream, out)
        out.append((_kernels.OP_COMPLEMENT, 0.0, 0, 0))
    else:
        raise ModeError(f"{spec!r} is not an edge process")


@lru_cache(maxsize=256)
def compile_program(spec: EdgeSpec, stream: int = 0) -> Program:
    _require_edge(spec)
    if (stream + 1) * STREAM_FANOUT**_nesting(spec) > 1 << 56:
        raise ValueError("stream labels overflow for this nesting depth")
    instrs = []
    _emit(spec, stream, instrs)
    ops, fvals, keys, ivals = zip(*instrs)
    program = Program(
        np.array(ops, np.int64),
        np.array(fvals, np.float64),
        np.array(keys, np.uint64),
        np.array(ivals, np.int64),
    )
    for arr in program.arrays:
        arr.setflags(write=False)
    return program


def _nesting(spec) -> int:
    if isinstance(spec, MaxOfK):
        return 1 + _nesting(spec.base)
    if isinstance(spec, Complement):
        return _nesting(spec.base)
    return 0


def path_edge_states(spec: EdgeSpec, seed: Seed, path: Sequence[int], d: int) -> np.ndarray:
    """States of every edge along a descending path from the root (compiled)."""
    path = check_vertex(path, d)
    prog = compile_program(spec, seed.stream)
    return _kernels.eval_path_edges(*prog.arrays, np.uint64(seed.value),
                                    np.asarray(path, np.int64), d)


def ball_states(spec: EdgeSpec, seed: Seed, d: int, n: int) -> list[np.ndarray]:
    """Edge states of the radius-``n`` ball, one uint8 array per depth in lex order."""
    check_vertex((), d)
    prog = compile_program(spec, seed.stream)
    states, offsets = _kernels.ball_edge_states(*prog.arrays, np.uint64(seed.value), d, n)
    return [states[offsets[j]:offsets[j + 1]] for j in range(n)]


# -- empirical marginals -------------------------------------------------------

@dataclass(frozen=True)
class MarginalEstimate:
    mean: float
    ci: tuple[float, float]
    trials: int
    per_depth: dict[int, tuple[float, float, float]]  # depth -> (mean, lo, hi)


def _seed_array(seed_range) -> np.ndarray:
    if isinstance(seed_range, range):
        return np.arange(seed_range.start, seed_range.stop, seed_range.step, dtype=np.uint64)
    return np.asarray(list(seed_range), dtype=np.uint64)


def empirical_marginal(spec: SamplerSpec, seed_range, d: int = 3,
                       edge: Sequence[int] = (0,), stream: int = 0,
                       depths: Sequence[int] = (1, 2, 3, 4)) -> MarginalEstimate:
    """Monte Carlo marginal at a fixed edge (or site) over the seeds in ``seed_range``.

    Per-depth marginals are taken at the all-zero address of each depth.
    """
    seeds = _seed_array(seed_range)
    if seeds.size < 1:
        raise ValueError("need at least one seed")

    if isinstance(spec, BipartiteSite):
        def states_at(path):
            return np.array([site_state(spec, Seed(int(s), stream), path) for s in seeds],
                            dtype=np.uint8)
    else:
        prog = compile_program(spec, stream)

        def states_at(path):
            path = np.asarray(check_edge(path, d), np.int64)
            return _kernels.eval_over_seeds(*prog.arrays, seeds, path, d)

    def summary(path):
        hits = int(states_at(path).sum())
        lo, hi = wilson_interval(hits, seeds.size)
        return hits / seeds.size, lo, hi

    mean, lo, hi = summary(tuple(edge))
    per_depth = {j: summary((0,) * j) for j in depths}
    return MarginalEstimate(mean, (lo, hi), int(seeds.size), per_depth)


# -- canonical text form -------------------------------------------------------

def render(spec: SamplerSpec) -> str:
    if isinstance(spec, Bernoulli):
        return f"bernoulli({float(spec.p)!r})"
    if isinstance(spec, MaxOfK):
        return f"max({render(spec.base)},k={spec.k})"
    if isinstance(spec, Complement):
        return f"complement({render(spec.base)})"
    if isinstance(spec, MutualChoiceMatching):
        return "matching"
    if isinstance(spec, BipartiteSite):
        return "bipartite-site"
    raise TypeError(f"unknown sampler {spec!r}")


_TOKEN = re.compile(r"\s*(?:(?P<name>[a-z][a-z-]*)|(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(?P<punct>[(),=]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise SamplerParseError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise SamplerParseError(f"expected {want!r}, found {got!r}", tok[2])
        self.i += 1
        return tok

    def prob(self):
        _, text, pos = self.take("num")
        p = float(text)
        if not 0.0 <= p <= 1.0:
            raise SamplerParseError(f"probability {text} outside [0, 1]", pos)
        return p

    def spec(self):
        _, name, pos = self.take("name")
        if name == "bernoulli":
            self.take("punct", "(")
            p = self.prob()
            self.take("punct", ")")
            return Bernoulli(p)
        if name == "max":
            self.take("punct", "(")
            base_pos = self.peek()[2]
            base = self.spec()
            if not is_edge_process(base):
                raise SamplerParseError("max() needs an edge process", base_pos)
            self.take("punct", ",")
            self.take("name", "k")
            self.take("punct", "=")
            _, ktext, kpos = self.take("num")
            if not ktext.isdigit() or not 1 <= int(ktext) <= STREAM_FANOUT:
                raise SamplerParseError(f"k must be an integer in [1, {STREAM_FANOUT}]", kpos)
            self.take("punct", ")")
            return MaxOfK(base, int(ktext))
        if name == "complement":
            self.take("punct", "(")
            base_pos = self.peek()[2]
            base = self.spec()
            if not is_edge_process(base):
                raise SamplerParseError("complement() needs an edge process", base_pos)
            self.take("punct", ")")
            return Complement(base)
        if name == "matching":
            return MutualChoiceMatching()
        if name == "bipartite-site":
            return BipartiteSite()
        raise SamplerParseError(f"unknown sampler {name!r}", pos)


def parse_sampler(text: str) -> SamplerSpec:
    """Parse the canonical text form, e.g. ``max(bernoulli(0.4226),k=2)``."""
    parser = _Parser(text)
    spec = parser.spec()
    parser.take("end")
    return spec


def marginal_for_k_copies(target: float, k: int) -> float:
    """Base probability whose max over k iid copies has marginal ``target``."""
    return 1.0 - (1.0 - target) ** (1.0 / k)


__all__ = [
    "Bernoulli", "MaxOfK", "Complement", "MutualChoiceMatching", "BipartiteSite",
    "ModeError", "SamplerParseError", "edge_state", "copy_states", "site_state",
    "side_bit", "exact_marginal", "empirical_marginal", "parse_sampler", "render",
    "compile_program", "ball_states", "path_edge_states", "is_edge_process",
    "MarginalEstimate", "marginal_for_k_copies",
]

