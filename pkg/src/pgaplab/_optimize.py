"""Shared multistart machinery for scale-invariant objectives on sphere domains.

All objectives handled here are 0-homogeneous, so trajectories renormalize
freely.  Multistart runs are seeded per trajectory and reduced in seed
order, which makes every estimate reproducible; PGAP_THREADS > 1 runs
trajectories on a thread pool without changing the result.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lpspace import power_norm


def resolve_threads(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("PGAP_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _normalize(domain, p, values):
    vals = domain.project(values)
    n = power_norm(vals, p)
    if n == 0.0:
        return None
    return vals / n


def sphere_minimize(value_grad, domain, p, v0, iters, *, armijo=1e-4, stall_limit=3):
    """Projected gradient descent with backtracking on a unit-sphere domain.

    value_grad(values) -> (value, euclidean_gradient).  Returns the best
    (value, values) pair seen.  Stops early after `stall_limit` rounds in
    which no backtracked step improves the value.
    """
    v = _normalize(domain, p, v0)
    if v is None:
        raise ValueError("start vector projects to zero")
    val, _ = value_grad(v)
    t = 1.0
    stalls = 0
    for _ in range(iters):
        _, g = value_grad(v)
        g = domain.project(g)
        gn2 = float(np.dot(g, g))
        if gn2 == 0.0:
            break
        improved = False
        step = t
        for _ in range(40):
            w = _normalize(domain, p, v - step * g)
            if w is not None:
                wval, _ = value_grad(w)
                if wval < val - armijo * step * gn2:
                    v, val = w, wval
                    t = step * 2.0
                    improved = True
                    break
            step *= 0.5
        if not improved:
            stalls += 1
            if stalls >= stall_limit:
                break
        else:
            stalls = 0
    return val, v


@dataclass
class MultistartResult:
    value: float
    vector: np.ndarray
    pool: list  # (tag, value, vector) per trajectory, in deterministic order


def multistart_minimize(
    value_grad,
    domain,
    p,
    *,
    starts=32,
    iters=10_000,
    seed=0,
    extra_starts=(),
    threads=None,
) -> MultistartResult:
    """Run seeded trajectories plus user starts; reduce deterministically."""
    rng_seeds = np.random.SeedSequence(seed).spawn(max(0, starts))
    jobs = []
    for i, ss in enumerate(rng_seeds):
        rng = np.random.default_rng(ss)
        jobs.append((f"seed{i}", domain.project(rng.standard_normal(domain.rep.ball.size))))
    for i, vec in enumerate(extra_starts):
        arr = vec.values if hasattr(vec, "values") else np.asarray(vec, dtype=float)
        jobs.append((f"start{i}", domain.project(arr.copy())))

    def run(job):
        tag, v0 = job
        if power_norm(v0, p) == 0.0:
            return (tag, np.inf, v0)
        val, vec = sphere_minimize(value_grad, domain, p, v0, iters)
        return (tag, val, vec)

    n_threads = resolve_threads(threads)
    if n_threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    finite = [r for r in results if np.isfinite(r[1])]
    if not finite:
        raise ValueError("no multistart trajectory produced a usable point")
    best = min(finite, key=lambda r: (r[1], r[0]))
    return MultistartResult(value=best[1], vector=best[2], pool=results)
