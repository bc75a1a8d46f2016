"""Monte Carlo estimates of graph weights.

W_Γ = ∏ k_ℓ! · ∏ 1/#Star(ℓ)! · (2π)^{-(2n+m-2)} ∫ ∧_e dφ_e over the
gauge-fixed configuration space.  The integrand is the determinant of the
matrix of angle derivatives, divided by the sampling density.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..algebra import Rational
from .configuration import angle_jacobian, orientation_sign, sample_configurations
from .graphs import AdmissibleGraph, permutation_sign

CHUNK = 200_000


@dataclass(frozen=True)
class WeightEstimate:
    value: float
    std_error: float
    samples: int
    seed: int

    def consistent_with(self, target: float, n_sigma: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= n_sigma * self.std_error + floor

    def to_json(self) -> dict:
        return {"value": self.value, "std_error": self.std_error,
                "samples": self.samples, "seed": self.seed}


def prefactor(graph: AdmissibleGraph) -> float:
    out = 1.0
    for k in graph.dashed_counts():
        out *= math.factorial(k)
    for s in graph.star_sizes():
        out /= math.factorial(s)
    return out / (2 * math.pi) ** graph.dimension()


def _sums(graph: AdmissibleGraph, seed_seq: np.random.SeedSequence, samples: int):
    rng = np.random.default_rng(seed_seq)
    edges = graph.wedge_edges()
    sign = orientation_sign(graph.n, graph.m)
    total = total_sq = 0.0
    left = samples
    while left > 0:
        size = min(CHUNK, left)
        batch = sample_configurations(graph.n, graph.m, rng, size)
        if edges:
            jac = angle_jacobian(batch, edges)
            vals = np.linalg.det(jac)
        else:
            vals = np.ones(size)
        vals = sign * vals / batch.density
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        left -= size
    return total, total_sq


def _worker(args):
    graph_json, entropy, spawn_key, samples = args
    g = AdmissibleGraph.from_json(graph_json)
    return _sums(g, np.random.SeedSequence(entropy, spawn_key=spawn_key), samples)


def weight_mc(graph: AdmissibleGraph, samples: int, seed: int, workers: int = 1) -> WeightEstimate:
    """Estimate W_Γ; deterministic for a fixed (graph, samples, seed, workers)."""
    if graph.form_degree() != graph.dimension():
        raise ValueError(
            f"form degree {graph.form_degree()} differs from dimension {graph.dimension()}")
    if samples < 2:
        raise ValueError("need at least two samples")
    if graph.dimension() == 0:
        return WeightEstimate(prefactor(graph), 0.0, samples, seed)
    root = np.random.SeedSequence(seed, spawn_key=(graph.stable_hash(),))
    children = root.spawn(workers)
    shares = [samples // workers + (1 if i < samples % workers else 0) for i in range(workers)]
    jobs = [(graph.to_json(), c.entropy, c.spawn_key, s) for c, s in zip(children, shares) if s]
    if workers == 1:
        results = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, jobs))
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    c = prefactor(graph)
    return WeightEstimate(c * mean, abs(c) * math.sqrt(var / samples), samples, seed)


class WeightCache:
    """Memoises canonical weights; relabelled graphs reuse them with a sign."""

    def __init__(self, samples: int, seed: int, workers: int = 1):
        self.samples = samples
        self.seed = seed
        self.workers = workers
        self._store: Dict[str, WeightEstimate] = {}

    def get(self, graph: AdmissibleGraph) -> Tuple[WeightEstimate, int]:
        canon, sign = graph.canonical()
        key = canon.key()
        if key not in self._store:
            self._store[key] = weight_mc(canon, self.samples, self.seed, self.workers)
        return self._store[key], sign

    def __len__(self):
        return len(self._store)


def exact_line_weight(graph: AdmissibleGraph) -> Rational:
    """Closed form for one aerial vertex: ±∏k!/(#Star! · m!), or 0.

    The angles of the edges towards q_1 < ... < q_m increase along the line,
    so the angle map is a diffeomorphism onto a simplex of volume (2π)^m/m!.
    """
    if graph.n != 1:
        raise ValueError("closed form only for one aerial vertex")
    targets = [t for _, t in graph.wedge_edges()]
    if sorted(targets) != list(range(-graph.m, 0)):
        return Rational(0)
    sign = permutation_sign([-t for t in targets])
    w = Rational(math.prod(math.factorial(k) for k in graph.dashed_counts()),
                 math.prod(math.factorial(s) for s in graph.star_sizes()) * math.factorial(graph.m))
    return sign * w


