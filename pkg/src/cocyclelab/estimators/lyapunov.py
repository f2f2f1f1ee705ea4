"""Lyapunov exponents along a fixed word, and the Monte Carlo estimate of the
branch average."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..cocycle import CocycleAccumulator, CocycleGenerator, eval_generator_array, norms_batch
from ..dynamics import MapFamily, _check_point, apply_map_array, orbit_points
from ..words import WordSource, check_budget, sample_words, word_array
from .branch import NORMALIZATIONS, _CocyclePayload
from .report import EstimatorReport

MC_CHUNK = 1024


def lambda_fixed(family: MapFamily, L: CocycleGenerator, source: WordSource, x: float,
                 m_max: int, stride: int = 1, tol: float = 1e-3) -> EstimatorReport:
    """(1/m) log s_max and (1/m) log s_min of L_{w^m}(x) for m = stride, 2*stride, ..., m_max.

    One left multiplication per step; singular values are taken in a single
    vectorized pass over the recorded snapshots.
    """
    if m_max < 2 or stride < 1:
        raise ValueError("need m_max >= 2 and stride >= 1")
    _check_point(x)
    syms = source.symbols(1, m_max).tolist()
    pts = orbit_points(family, syms, x)[:m_max]  # x_0..x_{m_max-1}
    mats, invs, logdets = eval_generator_array(L, pts)
    recorded = np.arange(stride, m_max + 1, stride)
    d = L.d
    cores = np.empty((len(recorded), d, d))
    inv_cores = np.empty_like(cores)
    scales = np.empty(len(recorded))
    inv_scales = np.empty(len(recorded))
    acc = CocycleAccumulator(d)
    r = 0
    for k in range(m_max):
        acc.push(mats[k], invs[k], 0.0)
        if r < len(recorded) and k + 1 == recorded[r]:
            cores[r], scales[r] = acc.core, acc.log_scale
            inv_cores[r], inv_scales[r] = acc.inv_core, acc.inv_log_scale
            r += 1
    smax, smin = norms_batch(cores, scales, inv_cores, inv_scales)
    log_det = np.cumsum(logdets)[recorded - 1]
    rep = EstimatorReport(
        quantity="lambda",
        index=recorded,
        estimates={"lambda_plus": smax / recorded, "lambda_minus": smin / recorded},
        aux={"log_smax": smax, "log_smin": smin, "log_abs_det": log_det},
        normalization="per_time",
        meta={"source": source.tag(), "x": x, "multiplications": m_max},
    )
    return rep.judge_all(tol)


def ergodic_average_path(family: MapFamily, phi, source: WordSource, x: float, m_max: int) -> np.ndarray:
    """(1/m) sum_{k<m} phi(x_k) for m = 1..m_max, by plain scalar iteration.

    For d = 1 and L = exp(phi) this is the same number as lambda_fixed; kept as
    a separate code path so the two can be checked against each other.
    """
    _check_point(x)
    total = 0.0
    out = np.empty(m_max)
    for m in range(1, m_max + 1):
        total += float(phi(x))
        out[m - 1] = total / m
        if m < m_max:
            x = float(family.map(source.symbol(m))(x))
    return out


def _mc_chunk(family, L, x, n, words):
    payload = _CocyclePayload(L)
    count = words.shape[0]
    state = payload.root(count)
    xs = np.full(count, x)
    smax = np.empty((n, count))
    smin = np.empty((n, count))
    for i in range(n):
        state = payload.extend(state, xs)
        smax[i], smin[i] = norms_batch(*state[:4])
        if i + 1 < n:
            xs = apply_map_array(family, words[:, i], xs)
    return smax, smin


def branch_average_mc(family: MapFamily, L: CocycleGenerator, x: float, n: int, samples: int,
                      seed: int, normalization: str = "per_word", threads: int = 1,
                      exhaustive: bool = False) -> EstimatorReport:
    """Sample mean and standard error of log s_max(L_w(x)) over uniform words.

    Words are drawn in chunks of MC_CHUNK, chunk c from its own substream
    (seed, c), so the result does not depend on ``threads``. Prefixes of
    uniform words are uniform, so every length k <= n is reported from the
    same draws. ``exhaustive`` replaces sampling by the full list of N**n
    words (``samples`` is then ignored).
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    _check_point(x)
    if exhaustive:
        check_budget(family.N, n)
        all_words = word_array(family.N, n)
        blocks = [all_words[lo:lo + MC_CHUNK] for lo in range(0, len(all_words), MC_CHUNK)]
    else:
        if samples < 2:
            raise ValueError("samples >= 2 required")
        blocks = []
        for c, lo in enumerate(range(0, samples, MC_CHUNK)):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
            blocks.append(sample_words(family.N, n, min(MC_CHUNK, samples - lo), rng))

    def work(words):
        return _mc_chunk(family, L, x, n, words)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    smax = np.concatenate([p[0] for p in parts], axis=1)
    smin = np.concatenate([p[1] for p in parts], axis=1)
    count = smax.shape[1]
    idx = np.arange(1, n + 1)
    scale = 1.0 if normalization == "per_word" else 1.0 / idx

    def mean_se(vals):
        mean = vals.mean(axis=1)
        se = vals.std(axis=1, ddof=1) / math.sqrt(count) if count > 1 else np.zeros(n)
        return mean * scale, se * scale

    mp, sp = mean_se(smax)
    mm, sm = mean_se(smin)
    rep = EstimatorReport(
        quantity="Lambda_mc",
        index=idx,
        estimates={"Lambda_plus": mp, "Lambda_minus": mm},
        aux={"stderr_plus": sp, "stderr_minus": sm},
        normalization=normalization,
        meta={"samples": count, "seed": seed, "exhaustive": exhaustive},
    )
    return rep.judge_all()
