"""Configuration spaces of points in the upper half-plane and on the line.

The action of z ↦ az + b is fixed by a gauge:

* m >= 2: q_1 = 0 and q_m = 1; free coordinates are (Re p_i, Im p_i) for
  every aerial point followed by q_2 < ... < q_{m-1};
* m = 1: q_1 = 0 and p_1 = e^{it}, t ∈ (0, π); free coordinates t, then
  the remaining aerial points;
* m = 0: p_1 = i; free coordinates are the remaining aerial points.

Aerial points are drawn from a mixture of heavy-tailed half-plane
distributions centred at the line points and at earlier aerial points; the
gaps between line points follow a Dirichlet(1/2) law.  Both densities blow up
faster than the integrand near collisions, so the estimator has finite
variance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np


def harmonic_angle(p: complex, q: complex) -> float:
    """arg((q - p) / (q - p̄)) in (-π, π]; the angle of the edge p → q."""
    if p.imag <= 0:
        raise ValueError("the source must lie in the open upper half-plane")
    if q == p:
        raise ValueError("coincident points have no angle")
    return cmath.phase((q - p) / (q - p.conjugate()))


@dataclass
class ConfigBatch:
    """A batch of gauge-fixed configurations and their sampling density."""

    n: int
    m: int
    p: np.ndarray        # (N, n) complex
    q: np.ndarray        # (N, m) real
    t: np.ndarray | None  # (N,) for m == 1, else None
    density: np.ndarray  # (N,) probability density in the free coordinates

    @property
    def size(self) -> int:
        return self.p.shape[0]


@dataclass
class ConfigPoint:
    p: Tuple[complex, ...]
    q: Tuple[float, ...]


def coordinates(n: int, m: int) -> List[Tuple[str, int]]:
    """Free coordinates in order: ('x'|'y', i), ('t', 0) or ('q', j); 0-based."""
    coords: List[Tuple[str, int]] = []
    first_free = 0
    if m == 1:
        coords.append(("t", 0))
        first_free = 1
    elif m == 0:
        first_free = 1
    for i in range(first_free, n):
        coords.extend([("x", i), ("y", i)])
    if m >= 2:
        coords.extend(("q", j) for j in range(1, m - 1))
    if len(coords) != 2 * n + m - 2:
        raise ValueError(f"no gauge for n={n}, m={m}")
    return coords


def orientation_sign(n: int, m: int) -> int:
    """Sign of the gauge coordinates relative to the quotient orientation.

    The ambient orientation is dRe p_1 ∧ dIm p_1 ∧ ... ∧ dq_1 ∧ ... ∧ dq_m;
    the frame (translation, dilation, gauge coordinates) is declared positive.
    """
    rng = np.random.default_rng(0)
    batch = sample_configurations(n, m, rng, 1)
    p, q = batch.p[0], batch.q[0]
    size = 2 * n + m
    rows = []
    trans = np.zeros(size)
    dil = np.zeros(size)
    for i in range(n):
        trans[2 * i] = 1.0
        dil[2 * i], dil[2 * i + 1] = p[i].real, p[i].imag
    for j in range(m):
        trans[2 * n + j] = 1.0
        dil[2 * n + j] = q[j]
    rows.extend([trans, dil])
    for kind, idx in coordinates(n, m):
        v = np.zeros(size)
        if kind == "x":
            v[2 * idx] = 1.0
        elif kind == "y":
            v[2 * idx + 1] = 1.0
        elif kind == "t":
            t = batch.t[0]
            v[0], v[1] = -math.sin(t), math.cos(t)
        else:
            v[2 * n + idx] = 1.0
        rows.append(v)
    det = np.linalg.det(np.array(rows)) if rows else 1.0
    return 1 if det > 0 else -1


# radii live in [1e-10, 1e10]; the excluded tails carry a negligible share
# of every weight integral and keep points resolvable in double precision
_U_CUT = 1e-5


def _radial(rng: np.random.Generator, size: int) -> np.ndarray:
    u = _U_CUT + (1.0 - 2 * _U_CUT) * rng.random(size)
    return (u / (1.0 - u)) ** 2


def _radial_pdf(r: np.ndarray) -> np.ndarray:
    s = np.sqrt(r)
    lo, hi = (_U_CUT / (1 - _U_CUT)) ** 2, ((1 - _U_CUT) / _U_CUT) ** 2
    inside = (r >= lo) & (r <= hi)
    return np.where(inside, 1.0 / (2.0 * s * (1.0 + s) ** 2 * (1.0 - 2 * _U_CUT)), 0.0)


def _component_pdf(z: np.ndarray, centre: np.ndarray, real_centre: bool) -> np.ndarray:
    r = np.maximum(np.abs(z - centre), 1e-300)
    if real_centre:
        return _radial_pdf(r) / (math.pi * r)
    rr = np.maximum(np.abs(np.conj(z) - centre), 1e-300)
    return _radial_pdf(r) / (2 * math.pi * r) + _radial_pdf(rr) / (2 * math.pi * rr)


def sample_configurations(n: int, m: int, rng: np.random.Generator, size: int) -> ConfigBatch:
    coordinates(n, m)  # validates (n, m)
    p = np.zeros((size, n), dtype=complex)
    q = np.zeros((size, m))
    density = np.ones(size)
    t = None
    if m >= 2:
        q[:, -1] = 1.0
        if m > 2:
            # gaps ~ Dirichlet(1/2): dense near collisions of line points
            alpha = np.full(m - 1, 0.5)
            gaps = rng.dirichlet(alpha, size)
            q[:, 1:-1] = np.cumsum(gaps, axis=1)[:, :-1]
            log_norm = math.lgamma(alpha.sum()) - sum(math.lgamma(a) for a in alpha)
            density *= np.exp(log_norm + ((alpha - 1) * np.log(gaps)).sum(axis=1))
        first_free = 0
    elif m == 1:
        t = rng.random(size) * math.pi
        p[:, 0] = np.exp(1j * t)
        density /= math.pi
        first_free = 1
    else:
        if n >= 1:
            p[:, 0] = 1j
        first_free = 1
    for i in range(first_free, n):
        centres = [(q[:, j].astype(complex), True) for j in range(m)]
        centres += [(p[:, j], False) for j in range(i)]
        k = len(centres)
        choice = rng.integers(0, k, size)
        r = _radial(rng, size)
        z = np.empty(size, dtype=complex)
        for c, (centre, is_real) in enumerate(centres):
            mask = choice == c
            cnt = int(mask.sum())
            if not cnt:
                continue
            if is_real:
                theta = rng.random(cnt) * math.pi
                z[mask] = centre[mask] + r[mask] * np.exp(1j * theta)
            else:
                theta = rng.random(cnt) * 2 * math.pi
                w = centre[mask] + r[mask] * np.exp(1j * theta)
                z[mask] = np.where(w.imag < 0, np.conj(w), w)
        # keep strictly inside the half-plane
        z = np.where(z.imag <= 0, z.real + 1e-300j, z)
        p[:, i] = z
        pdf = np.zeros(size)
        for centre, is_real in centres:
            pdf += _component_pdf(z, centre, is_real)
        density *= pdf / k
    return ConfigBatch(n, m, p, q, t, density)


def sample_configuration(n: int, m: int, rng: np.random.Generator) -> Tuple[ConfigPoint, float]:
    """One configuration and its importance factor 1/density."""
    b = sample_configurations(n, m, rng, 1)
    point = ConfigPoint(tuple(complex(z) for z in b.p[0]), tuple(float(x) for x in b.q[0]))
    return point, float(1.0 / b.density[0])


def angle_jacobian(batch: ConfigBatch, edges) -> np.ndarray:
    """(N, E, D) array of ∂φ_e/∂(free coordinate) for the given edges.

    Edges use the graph encoding: sources 1..n, targets 1..n or -1..-m.
    """
    n, m = batch.n, batch.m
    coords = coordinates(n, m)
    col = {c: k for k, c in enumerate(coords)}
    N = batch.size
    out = np.zeros((N, len(edges), len(coords)))
    for e, (s, tgt) in enumerate(edges):
        ps = batch.p[:, s - 1]
        z = batch.p[:, tgt - 1] if tgt > 0 else batch.q[:, -tgt - 1].astype(complex)
        a = 1.0 / (z - ps)
        b = 1.0 / (z - np.conj(ps))
        dxs = (-a + b).imag
        dys = -a.real - b.real
        _accumulate_point(out, e, col, s - 1, dxs, dys, batch)
        if tgt > 0:
            dxt = (a - b).imag
            dyt = a.real - b.real
            _accumulate_point(out, e, col, tgt - 1, dxt, dyt, batch)
        else:
            key = ("q", -tgt - 1)
            if key in col:
                out[:, e, col[key]] += (a - b).imag
    return out


def _accumulate_point(out, e, col, i, dx, dy, batch):
    if ("x", i) in col:
        out[:, e, col[("x", i)]] += dx
        out[:, e, col[("y", i)]] += dy
    elif ("t", 0) in col and i == 0:
        t = batch.t
        out[:, e, col[("t", 0)]] += -np.sin(t) * dx + np.cos(t) * dy
