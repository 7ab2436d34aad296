"""Compiled hot loops: hashing, sampler-program evaluation, tree searches.

Everything here mirrors the pure-Python reference in ``tree`` and
``samplers`` bit for bit; the test-suite checks the two against each other.
Sampler programs are postfix arrays produced by ``samplers.compile_program``.
"""
import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S11 = np.uint64(11)
S27 = np.uint64(27)
S30 = np.uint64(30)
S31 = np.uint64(31)
INV53 = 2.0**-53

OP_BERNOULLI = 0
OP_MATCHING = 1
OP_MAX = 2
OP_COMPLEMENT = 3


@njit(cache=True, inline="always")
def fmix(z):
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(cache=True, inline="always")
def chain_root(seed):
    return fmix(seed + GOLDEN)


@njit(cache=True, inline="always")
def chain_step(h, index):
    return fmix(h ^ (np.uint64(index + 1) * GOLDEN))


@njit(cache=True, inline="always")
def finalize(h, length, key):
    return fmix(fmix(h ^ (np.uint64(length) * GOLDEN)) ^ key)


@njit(cache=True, inline="always")
def to_unit(x):
    return np.float64(x >> S11) * INV53


@njit(cache=True, inline="always")
def _choice(u, d):
    c = np.int64(d * u)
    return d - 1 if c >= d else c


@njit(cache=True, nogil=True)
def eval_edge(ops, fvals, keys, ivals, scratch, hp, hc, depth, index, d):
    """State of the edge from the vertex with chain ``hp`` to child ``index``.

    ``hc`` is the child's chain and ``depth`` the child's depth.
    """
    sp = 0
    for t in range(ops.shape[0]):
        op = ops[t]
        if op == OP_BERNOULLI:
            u = to_unit(finalize(hc, depth, keys[t]))
            scratch[sp] = 1 if u < fvals[t] else 0
            sp += 1
        elif op == OP_MATCHING:
            pos = index if depth == 1 else index + 1
            up = to_unit(finalize(hp, depth - 1, keys[t]))
            uc = to_unit(finalize(hc, depth, keys[t]))
            hit = _choice(up, d) == pos and _choice(uc, d) == 0
            scratch[sp] = 1 if hit else 0
            sp += 1
        elif op == OP_MAX:
            m = 0
            for _ in range(ivals[t]):
                sp -= 1
                if scratch[sp] > m:
                    m = scratch[sp]
            scratch[sp] = m
            sp += 1
        else:
            scratch[sp - 1] = 1 - scratch[sp - 1]
    return scratch[0]


@njit(cache=True, nogil=True)
def eval_path_edges(ops, fvals, keys, ivals, seed, path, d):
    """States of the consecutive edges along a descending path from the root."""
    scratch = np.empty(ops.shape[0], np.int64)
    out = np.empty(path.shape[0], np.int64)
    hp = chain_root(seed)
    for j in range(path.shape[0]):
        hc = chain_step(hp, path[j])
        out[j] = eval_edge(ops, fvals, keys, ivals, scratch, hp, hc, j + 1, path[j], d)
        hp = hc
    return out


@njit(cache=True, nogil=True)
def eval_over_seeds(ops, fvals, keys, ivals, seeds, path, d):
    """State of the single edge ``path`` under each seed in ``seeds``."""
    scratch = np.empty(ops.shape[0], np.int64)
    out = np.empty(seeds.shape[0], np.uint8)
    depth = path.shape[0]
    for s in range(seeds.shape[0]):
        hp = chain_root(seeds[s])
        for j in range(depth - 1):
            hp = chain_step(hp, path[j])
        hc = chain_step(hp, path[depth - 1])
        out[s] = eval_edge(ops, fvals, keys, ivals, scratch, hp, hc, depth, path[depth - 1], d)
    return out


@njit(cache=True, nogil=True)
def level_uniforms(h0, d, depth, key):
    prev = np.empty(1, np.uint64)
    prev[0] = h0
    for j in range(1, depth + 1):
        fan = d if j == 1 else d - 1
        cur = np.empty(prev.shape[0] * fan, np.uint64)
        for q in range(prev.shape[0]):
            for i in range(fan):
                cur[q * fan + i] = chain_step(prev[q], i)
        prev = cur
    out = np.empty(prev.shape[0], np.float64)
    for q in range(prev.shape[0]):
        out[q] = to_unit(finalize(prev[q], depth, key))
    return out


@njit(cache=True, nogil=True)
def ball_edge_states(ops, fvals, keys, ivals, seed, d, n):
    """Edge states of the radius-``n`` ball, levels concatenated in lex order."""
    scratch = np.empty(ops.shape[0], np.int64)
    offsets = np.zeros(n + 1, np.int64)
    size = d
    for j in range(1, n + 1):
        offsets[j] = offsets[j - 1] + size
        size *= d - 1
    states = np.empty(offsets[n], np.uint8)
    h0 = chain_root(seed)
    prev = np.empty(1, np.uint64)
    prev[0] = h0
    for j in range(1, n + 1):
        fan = d if j == 1 else d - 1
        cur = np.empty(prev.shape[0] * fan, np.uint64)
        base = offsets[j - 1]
        for q in range(prev.shape[0]):
            hp = prev[q]
            for i in range(fan):
                hc = chain_step(hp, i)
                cur[q * fan + i] = hc
                states[base + q * fan + i] = eval_edge(
                    ops, fvals, keys, ivals, scratch, hp, hc, j, i, d)
        prev = cur
    return states, offsets


@njit(cache=True, nogil=True)
def dfs_max(ops, fvals, keys, ivals, seed, d, n, requested, prune):
    """Depth-first maximum open count over descending paths.

    ``requested[j]`` marks the horizons whose maxima are wanted (``n`` must be
    one of them).  Returns ``(best, path, visited)``: ``best[j]`` is the
    maximum over length-``j`` paths (-1 where not requested), ``path`` the
    lexicographically smallest argmax at horizon ``n``.
    """
    scratch = np.empty(ops.shape[0], np.int64)
    chains = np.empty(n + 1, np.uint64)
    counts = np.zeros(n + 1, np.int64)
    idx = np.full(n + 1, -1, np.int64)
    best = np.full(n + 1, -1, np.int64)
    best_path = np.zeros(n, np.int64)
    chains[0] = chain_root(seed)
    visited = 0
    depth = 1
    while depth >= 1:
        idx[depth] += 1
        fan = d if depth == 1 else d - 1
        if idx[depth] >= fan:
            depth -= 1
            continue
        i = idx[depth]
        hc = chain_step(chains[depth - 1], i)
        chains[depth] = hc
        c = counts[depth - 1] + eval_edge(
            ops, fvals, keys, ivals, scratch, chains[depth - 1], hc, depth, i, d)
        counts[depth] = c
        visited += 1
        if requested[depth] and c > best[depth]:
            best[depth] = c
            if depth == n:
                for j in range(n):
                    best_path[j] = idx[j + 1]
        if depth < n:
            expand = True
            if prune:
                expand = False
                for h in range(depth + 1, n + 1):
                    if requested[h] and c + (h - depth) > best[h]:
                        expand = True
                        break
            if expand:
                depth += 1
                idx[depth] = -1
    return best, best_path, visited


@njit(cache=True, nogil=True)
def barrier_count(ops, fvals, keys, ivals, seed, d, n, a, slack, cap):
    """Count length-``n`` paths whose every prefix of length j has >= a*j - slack open edges.

    Returns ``(count, capped, first_path, first_open)``; ``first_open`` is -1
    when no path survives.
    """
    scratch = np.empty(ops.shape[0], np.int64)
    chains = np.empty(n + 1, np.uint64)
    counts = np.zeros(n + 1, np.int64)
    idx = np.full(n + 1, -1, np.int64)
    first_path = np.zeros(n, np.int64)
    first_open = -1
    chains[0] = chain_root(seed)
    count = 0
    depth = 1
    while depth >= 1:
        idx[depth] += 1
        fan = d if depth == 1 else d - 1
        if idx[depth] >= fan:
            depth -= 1
            continue
        i = idx[depth]
        hc = chain_step(chains[depth - 1], i)
        chains[depth] = hc
        c = counts[depth - 1] + eval_edge(
            ops, fvals, keys, ivals, scratch, chains[depth - 1], hc, depth, i, d)
        counts[depth] = c
        if c < a * depth - slack:
            continue
        if depth == n:
            if count == 0:
                for j in range(n):
                    first_path[j] = idx[j + 1]
                first_open = c
            count += 1
            if count >= cap:
                return count, True, first_path, first_open
        else:
            depth += 1
            idx[depth] = -1
    return count, False, first_path, first_open
