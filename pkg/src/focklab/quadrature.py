"""Numerical integration over C^m: tensor Gauss-Hermite, radial Gauss-Legendre
and seeded block Monte Carlo.

All integrators work with log-integrands and return log-integrals, because the
integrands here routinely span hundreds of orders of magnitude.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

#: sample block size for Monte Carlo; sample i always lives in block i // MC_BLOCK
MC_BLOCK = 1 << 15
#: maximum number of points evaluated at once
CHUNK = 1 << 16


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get("FOCKLAB_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map, threaded up to ``FOCKLAB_THREADS`` workers."""
    items = list(items)
    workers = min(max_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=None)
def hermgauss(m: int):
    x, w = np.polynomial.hermite.hermgauss(m)
    return x, np.log(w)


@lru_cache(maxsize=None)
def leggauss01(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1) / 2, w / 2


def _tensor_points(nodes_1d, logw_1d, d):
    """Yield chunks of (points (N, d), log-weights (N,)) of a d-fold tensor grid."""
    m = len(nodes_1d)
    total = m ** d
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK))
        digits = np.empty((idx.size, d), dtype=np.int64)
        rem = idx
        for k in range(d - 1, -1, -1):
            digits[:, k] = rem % m
            rem = rem // m
        yield nodes_1d[digits], logw_1d[digits].sum(axis=1)


def gauss_hermite_log_integral(logf, nc: int, nodes: int, center=None, var=None) -> float:
    """``log int_{C^nc} exp(logf(z)) dA(z)`` by tensor Gauss-Hermite.

    The substitution ``z = center + sqrt(2 var) (u + i v)`` is used, so the
    Gaussian weight ``exp(-|u|^2 - |v|^2)`` matches a complex Gaussian with
    per-real-component variance ``var`` around ``center``.
    """
    center = np.zeros(nc, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    var = np.ones(nc) if var is None else np.broadcast_to(np.asarray(var, dtype=float), (nc,))
    x, logw = hermgauss(nodes)
    scale = np.sqrt(2 * var)
    log_jac = float(np.sum(np.log(2 * var)))
    parts = []
    for pts, lw in _tensor_points(x, logw, 2 * nc):
        u, v = pts[:, :nc], pts[:, nc:]
        z = center + scale * (u + 1j * v)
        vals = logf(z) + lw + np.sum(u * u + v * v, axis=1)
        parts.append(logsumexp(vals))
    return float(logsumexp(parts)) + log_jac


def radial_log_integral(logh, s: int, cutoff: float, nodes: int) -> float:
    """``log int_{C^s} h(|z_1|, ..., |z_s|) dA(z)`` for integrands depending only
    on the moduli, as ``(2 pi)^s int_{[0, cutoff]^s} h(r) prod r_i dr``."""
    x, w = leggauss01(nodes)
    r1 = x * cutoff
    lw1 = np.log(w * cutoff) + np.log(r1)
    parts = []
    for r, lw in _tensor_points(r1, lw1, s):
        parts.append(logsumexp(logh(r) + lw))
    return float(logsumexp(parts)) + s * np.log(2 * np.pi)


def block_generators(seed: int, total: int, block: int = MC_BLOCK):
    """Deterministic per-block generators and block sizes for ``total`` samples."""
    nblocks = (total + block - 1) // block
    children = np.random.SeedSequence(int(seed)).spawn(nblocks)
    sizes = [min(block, total - b * block) for b in range(nblocks)]
    return [(np.random.Generator(np.random.PCG64(c)), sz) for c, sz in zip(children, sizes)]


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normal: real and imaginary parts each N(0, 1)."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def mean_and_se(log_terms_blocks) -> tuple[float, float, int]:
    """Mean and standard error of ``exp(x)`` over concatenated blocks of logs."""
    logs = np.concatenate(log_terms_blocks)
    N = logs.size
    shift = np.max(logs) if N and np.isfinite(np.max(logs)) else 0.0
    vals = np.exp(logs - shift)
    mean = vals.mean()
    se = vals.std(ddof=1) / np.sqrt(N) if N > 1 else np.inf
    return float(mean * np.exp(shift)), float(se * np.exp(shift)), N


def radius_cutoff(log_envelope, start: float = 1.0, drop: float = 60.0) -> float:
    """Smallest radius beyond the envelope's peak where it has fallen by ``drop``.

    ``log_envelope`` must be a scalar function of the radius that eventually
    decreases (Gaussian-type tails).
    """
    rs = np.concatenate([np.linspace(0, start, 32), start * 2.0 ** np.arange(1, 40)])
    vals = np.array([log_envelope(r) for r in rs])
    peak = np.max(vals)
    ipeak = int(np.argmax(vals))
    for k in range(ipeak, len(rs)):
        if vals[k] < peak - drop:
            lo, hi = rs[k - 1], rs[k]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if log_envelope(mid) < peak - drop:
                    hi = mid
                else:
                    lo = mid
            return float(hi)
    raise ValueError("integrand envelope does not decay")
