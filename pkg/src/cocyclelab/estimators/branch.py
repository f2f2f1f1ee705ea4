"""Exhaustive averages over all N**n branches.

The tree engine walks the word tree depth-first in vectorized blocks. A node
at depth k carries the orbit point x_k of its prefix and the running payload
(a cocycle product or an ergodic sum) over that prefix, so every prefix is
computed exactly once. Because L_w(x) and S_(n, w) phi(x) for a word of length
n only involve x_0..x_{n-1}, the value for all N children of a depth-(n-1)
node is the same, and level totals are N times the node sums.

The naive engine recomputes every word from scratch; it is the cross-check
for the tree and is exposed through the CLI's --naive flag.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..cocycle import (CocycleGenerator, _renormalize_batch, eval_generator_array,
                       norms_batch)
from ..dynamics import MapFamily, _check_point, apply_map_array
from ..words import check_budget, word_array
from .observables import ObservableSequence
from .report import EstimatorReport

NORMALIZATIONS = ("per_word", "per_word_per_time")

# nodes per vectorized block before the walk splits depth-first
CHUNK = 1 << 15


@dataclass
class Counter:
    """Counts cocycle steps (matrix multiplications) or scalar updates."""

    steps: int = 0


# -- payloads -----------------------------------------------------------------


class _CocyclePayload:
    def __init__(self, L: CocycleGenerator):
        self.L = L

    def root(self, count: int):
        d = self.L.d
        eye = np.broadcast_to(np.eye(d), (count, d, d)).copy()
        z = np.zeros(count)
        return (eye, z, eye.copy(), z.copy(), z.copy())

    def extend(self, state, xs):
        cores, scales, inv, iscales, logdet = state
        m, minv, ld = eval_generator_array(self.L, xs)
        cores, scales = _renormalize_batch(np.matmul(m, cores), scales)
        inv, iscales = _renormalize_batch(np.matmul(inv, minv), iscales)
        return (cores, scales, inv, iscales, logdet + ld)

    def measure(self, state):
        cores, scales, inv, iscales, logdet = state
        smax, smin = norms_batch(cores, scales, inv, iscales)
        return {"log_smax": smax, "log_smin": smin, "log_abs_det": logdet}

    def repeat(self, state, N):
        return tuple(np.repeat(a, N, axis=0) for a in state)

    def take(self, state, sl):
        return tuple(a[sl] for a in state)


class _ErgodicPayload:
    def __init__(self, phi):
        self.phi = phi

    def root(self, count: int):
        return np.zeros(count)

    def extend(self, state, xs):
        return state + np.asarray(self.phi(xs), dtype=float)

    def measure(self, state):
        return {"sum": state}

    def repeat(self, state, N):
        return np.repeat(state, N)

    def take(self, state, sl):
        return state[sl]


# -- engines ------------------------------------------------------------------


def _children(family: MapFamily, xs: np.ndarray) -> np.ndarray:
    # child index = parent * N + (j - 1), keeps lexicographic order
    N = family.N
    out = np.empty((xs.shape[0], N))
    for j in range(1, N + 1):
        out[:, j - 1] = family.map(j)(xs)
    return out.ravel()


def _walk(family, payload, xs, state, depth, n_max, sums, counter):
    """Accumulate node sums for words of length depth+1 .. n_max."""
    state = payload.extend(state, xs)
    counter.steps += xs.shape[0]
    measured = payload.measure(state)
    for key in sums:
        sums[key][depth] += float(np.sum(measured[key]))
    if depth + 1 >= n_max:
        return
    kids = _children(family, xs)
    kid_state = payload.repeat(state, family.N)
    if kids.shape[0] <= CHUNK:
        _walk(family, payload, kids, kid_state, depth + 1, n_max, sums, counter)
        return
    for lo in range(0, kids.shape[0], CHUNK):
        sl = slice(lo, lo + CHUNK)
        _walk(family, payload, kids[sl], payload.take(kid_state, sl), depth + 1, n_max, sums, counter)


def _tree_sums(family, payload, x, n_max, keys, threads=1):
    """Per-length node sums, split at the first level so the reduction order
    (symbol 1, 2, ..., N) does not depend on the worker count."""
    counter = Counter()
    root_state = payload.root(1)
    xs = np.array([x])
    state = payload.extend(root_state, xs)
    counter.steps += 1
    sums = {k: np.zeros(n_max) for k in keys}
    measured = payload.measure(state)
    for key in keys:
        sums[key][0] = float(np.sum(measured[key]))
    if n_max == 1:
        return sums, counter

    kids = _children(family, xs)
    kid_state = payload.repeat(state, family.N)

    def sub(j):
        c = Counter()
        s = {k: np.zeros(n_max) for k in keys}
        _walk(family, payload, kids[j:j + 1], payload.take(kid_state, slice(j, j + 1)), 1, n_max, s, c)
        return s, c

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(sub, range(family.N)))
    else:
        parts = [sub(j) for j in range(family.N)]
    for s, c in parts:
        counter.steps += c.steps
        for k in keys:
            sums[k][1:] += s[k][1:]
    return sums, counter


def _naive_sums(family, payload, x, n_max, keys):
    counter = Counter()
    sums = {k: np.zeros(n_max) for k in keys}
    for n in range(1, n_max + 1):
        words = word_array(family.N, n)
        xs = np.full(words.shape[0], x)
        state = payload.root(words.shape[0])
        for i in range(n):
            state = payload.extend(state, xs)
            counter.steps += words.shape[0]
            if i + 1 < n:
                xs = apply_map_array(family, words[:, i], xs)
        measured = payload.measure(state)
        for key in keys:
            # every word counted once; node sums are word sums / N
            sums[key][n - 1] = float(np.sum(measured[key])) / family.N
    return sums, counter


def _sums(family, payload, x, n_max, keys, naive, threads):
    _check_point(x)
    if n_max < 1:
        raise ValueError("n_max >= 1 required")
    check_budget(family.N, n_max)
    if naive:
        return _naive_sums(family, payload, x, n_max, keys)
    return _tree_sums(family, payload, x, n_max, keys, threads)


def _normalize(node_sums, N, normalization):
    n = np.arange(1, len(node_sums) + 1)
    # mean over all N**n words equals mean over the N**(n-1) depth-(n-1) nodes
    means = node_sums / float(N) ** (n - 1)
    if normalization == "per_word":
        return means
    if normalization == "per_word_per_time":
        return means / n
    raise ValueError(f"unknown normalization {normalization!r}")


def branch_average_exact(family: MapFamily, L: CocycleGenerator, x: float, n_max: int,
                         normalization: str = "per_word_per_time", naive: bool = False,
                         threads: int = 1, tol: float = 1e-3) -> EstimatorReport:
    """(1/N^n) sum_w log s_max(L_w(x)) and the s_min analogue, n = 1..n_max.

    per_word_per_time additionally divides by n.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    keys = ("log_smax", "log_smin", "log_abs_det")
    sums, counter = _sums(family, _CocyclePayload(L), x, n_max, keys, naive, threads)
    rep = EstimatorReport(
        quantity="Lambda",
        index=np.arange(1, n_max + 1),
        estimates={
            "Lambda_plus": _normalize(sums["log_smax"], family.N, normalization),
            "Lambda_minus": _normalize(sums["log_smin"], family.N, normalization),
        },
        aux={"mean_log_abs_det": _normalize(sums["log_abs_det"], family.N, normalization)},
        normalization=normalization,
        meta={"multiplications": counter.steps, "engine": "naive" if naive else "tree"},
    )
    return rep.judge_all(tol)


def birkhoff_random_average(family: MapFamily, phi, x: float, n_max: int, naive: bool = False,
                            threads: int = 1, tol: float = 1e-3) -> EstimatorReport:
    """(1/n)(1/N^n) sum_w S_(n, w) phi(x) for n = 1..n_max."""
    sums, counter = _sums(family, _ErgodicPayload(phi), x, n_max, ("sum",), naive, threads)
    rep = EstimatorReport(
        quantity="birkhoff",
        index=np.arange(1, n_max + 1),
        estimates={"birkhoff_average": _normalize(sums["sum"], family.N, "per_word_per_time")},
        normalization="per_word_per_time",
        meta={"updates": counter.steps, "engine": "naive" if naive else "tree"},
    )
    return rep.judge_all(tol)


def branch_totals(obs: ObservableSequence, family: MapFamily, x: float, n_max: int,
                  naive: bool = False) -> np.ndarray:
    """Phi_n(x) = sum over all N**n words of Phi_(n, w)(x), for n = 1..n_max."""
    inner = obs.fixed_word
    if inner.kind == "user_tabulated":
        return _tabulated_totals(inner, family, x, n_max)
    if inner.kind == "ergodic_sum":
        sums, _ = _sums(family, _ErgodicPayload(inner.phi), x, n_max, ("sum",), naive, 1)
        node = sums["sum"]
    else:
        key = "log_smax" if inner.kind == "log_norm_cocycle" else "log_smin"
        sums, _ = _sums(family, _CocyclePayload(inner.cocycle), x, n_max, (key,), naive, 1)
        node = sums[key]
    return node * family.N


def _tabulated_totals(obs, family, x, n_max):
    from ..words import Word

    _check_point(x)
    check_budget(family.N, n_max)
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        out[n - 1] = sum(float(obs.table(Word(tuple(w), family.N), x))
                         for w in word_array(family.N, n).tolist())
    return out
