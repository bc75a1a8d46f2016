"""Line graphs and the cyclic HKR map.

A line graph of type (ℓ, k) has one aerial vertex whose ℓ edges land on
distinct points among ``ℓ + 2k`` points of the line.  The admissible
placements are those where the free points split into runs of even length
(the edges cut the line into blocks that can be tiled by adjacent pairs).
The operator of a graph feeds the j-th wedge factor to the j-th endpoint
from the left and alternates over the factors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Sequence, Tuple

from .algebra import DimensionError, Rational
from .cyclic import density_normal_form, pairing, sigma_defect, sigma_projector
from .dpoly import PolyDiffOp, alternated_operator, hochschild_d
from .tpoly import PolyVector, UPolyElement, VolumeForm, divergence


@dataclass(frozen=True, order=True)
class LineGraph:
    ell: int
    k: int
    endpoints: Tuple[int, ...]  # 1-based, strictly increasing

    @property
    def size(self) -> int:
        return self.ell + 2 * self.k

    def free_vertices(self) -> List[int]:
        ends = set(self.endpoints)
        return [i for i in range(1, self.size + 1) if i not in ends]

    def free_runs(self) -> List[Tuple[int, int]]:
        """Maximal runs of consecutive free vertices as (start, length)."""
        runs, start, length = [], None, 0
        ends = set(self.endpoints)
        for i in range(1, self.size + 1):
            if i in ends:
                if length:
                    runs.append((start, length))
                start, length = None, 0
            else:
                if start is None:
                    start = i
                length += 1
        if length:
            runs.append((start, length))
        return runs

    def to_json(self) -> dict:
        return {"ell": self.ell, "k": self.k, "endpoints": list(self.endpoints)}

    @classmethod
    def from_json(cls, data: dict) -> "LineGraph":
        return cls(int(data["ell"]), int(data["k"]), tuple(int(e) for e in data["endpoints"]))


def _tiled(ends: Sequence[int], size: int) -> bool:
    cuts = [0, *ends, size + 1]
    return all((b - a - 1) % 2 == 0 for a, b in zip(cuts, cuts[1:]))


def _gaps_even(ends: Sequence[int], size: int) -> bool:
    return all((b - a - 1) % 2 == 0 for a, b in zip(ends, ends[1:]))


def enumerate_line_graphs(ell: int, k: int, reading: str = "tiling") -> List[LineGraph]:
    """All admissible endpoint placements in lexicographic order.

    ``reading="tiling"`` (default) asks every maximal free run to be even,
    ``reading="gaps"`` only constrains runs between consecutive endpoints.
    """
    if ell < 0 or k < 0:
        raise ValueError("ell and k must be non-negative")
    test = {"tiling": _tiled, "gaps": _gaps_even}[reading]
    size = ell + 2 * k
    return [LineGraph(ell, k, ends)
            for ends in itertools.combinations(range(1, size + 1), ell)
            if test(ends, size)]


def endpoint_operator(gamma: PolyVector, positions: Sequence[int], arity: int) -> PolyDiffOp:
    """Σ over components of Alt ∏ ξ_{j}(f_{positions[j]}); positions are 1-based."""
    ell = len(positions)
    if gamma.components and gamma.degree != ell:
        raise ValueError(f"polyvector of degree {gamma.degree} on {ell} endpoints")
    out = PolyDiffOp.zero(gamma.dim, arity)
    zero_based = [p - 1 for p in positions]
    for coeff, idx in gamma.decomposable_factors():
        out = out + alternated_operator(coeff, idx, zero_based, arity)
    return out


def line_graph_operator(g: LineGraph, gamma: PolyVector) -> PolyDiffOp:
    if gamma.components and gamma.degree != g.ell:
        raise ValueError(f"graph has {g.ell} edges but γ has degree {gamma.degree}")
    return endpoint_operator(gamma, g.endpoints, g.size)


def graph_sum(gamma: PolyVector, k: int) -> PolyDiffOp:
    ell = gamma.degree
    out = PolyDiffOp.zero(gamma.dim, ell + 2 * k)
    for g in enumerate_line_graphs(ell, k):
        out = out + line_graph_operator(g, gamma)
    return out


def tilde_hkr(gamma: PolyVector, k: int) -> PolyDiffOp:
    ell = gamma.degree
    return graph_sum(gamma, k).scale(Rational(factorial(k), factorial(ell + 2 * k)))


def cyclic_hkr_term(gamma: PolyVector, k: int, vol: VolumeForm) -> PolyDiffOp:
    if gamma.dim != vol.dim:
        raise DimensionError("volume form dimension does not match")
    return sigma_projector(tilde_hkr(gamma, k), vol)


def cyclic_hkr(e: UPolyElement, vol: VolumeForm) -> Dict[int, PolyDiffOp]:
    """Image of a u-polyvector, one operator per arity ``ℓ + 2k``."""
    if e.dim != vol.dim:
        raise DimensionError("volume form dimension does not match")
    out: Dict[int, PolyDiffOp] = {}
    for k, gamma in e.homogeneous_terms():
        op = cyclic_hkr_term(gamma, k, vol)
        out[op.arity] = out[op.arity] + op if op.arity in out else op
    return {a: op for a, op in sorted(out.items()) if not op.is_zero()}


# -- coboundary structure ----------------------------------------------------------

@dataclass(frozen=True)
class ShortenedGraph:
    graph: LineGraph
    endpoints: Tuple[int, ...]  # endpoints of the shortened graph (1-based)
    size: int
    sign: int

    def operator(self, gamma: PolyVector) -> PolyDiffOp:
        """Operator whose Hochschild differential is the operator of ``graph``."""
        return endpoint_operator(gamma, self.endpoints, self.size).scale(self.sign)


def shorten_graph(g: LineGraph) -> ShortenedGraph:
    """Contract the first maximal free run by one vertex.

    If that run starts at position p then d(φ_short) = (-1)^{p-1} φ_Γ, so the
    returned ``sign`` is (-1)^{p-1}.
    """
    if g.k == 0:
        raise ValueError("nothing to shorten: the graph has no free vertices")
    start, _length = g.free_runs()[0]
    ends = tuple(e if e < start else e - 1 for e in g.endpoints)
    sign = -1 if (start - 1) % 2 else 1
    return ShortenedGraph(g, ends, g.size - 1, sign)


# -- the φ̄ machinery -----------------------------------------------------------

def phi_bar(gamma: PolyVector, k: int) -> PolyDiffOp:
    """Σ over Γ ∈ Γ(ℓ-1, k+1) and marked slots j of the operator with ξ_ℓ at j."""
    ell = gamma.degree
    if ell < 1:
        raise ValueError("φ̄ needs a polyvector of degree >= 1")
    arity = ell + 2 * k + 2
    out = PolyDiffOp.zero(gamma.dim, arity)
    for g in enumerate_line_graphs(ell - 1, k + 1):
        for j in g.free_vertices() + [arity]:
            out = out + endpoint_operator(gamma, list(g.endpoints) + [j], arity)
    return out


def divergence_phi_bar_sides(gamma: PolyVector, k: int, vol: VolumeForm):
    """Normal forms of ∫φ̄ and of ∫ Σ_{Γ(ℓ-1,k+1)} φ_Γ(div γ) · f_last."""
    left = density_normal_form(phi_bar(gamma, k), vol)
    right = pairing(graph_sum(divergence(gamma, vol), k + 1), vol)
    return left, right


def defect_phi_bar_sides(gamma: PolyVector, k: int, vol: VolumeForm):
    """Normal forms of ∫φ (the Σ-defect of Σ_Γ φ_Γ) and of ∫φ̄."""
    phi = sigma_defect(graph_sum(gamma, k))
    return density_normal_form(phi, vol), density_normal_form(phi_bar(gamma, k), vol)


def proportionality(a: PolyDiffOp, b: PolyDiffOp):
    """The rational c with a = c·b, None if no such c exists; (0 if both vanish)."""
    if b.is_zero():
        return Rational(0) if a.is_zero() else None
    key = next(iter(b.terms))
    c = Rational(a.terms.get(key, 0)) / b.terms[key]
    return c if a == b.scale(c) else None


def chain_map_residual(gamma: PolyVector, k: int, vol: VolumeForm) -> PolyDiffOp:
    """φ^cycl(div γ ⊗ u^{k+1}) - d_Hoch φ^cycl(γ ⊗ u^k)."""
    lhs = cyclic_hkr_term(divergence(gamma, vol), k + 1, vol) if gamma.degree >= 1 else None
    rhs = hochschild_d(cyclic_hkr_term(gamma, k, vol))
    if lhs is None:
        return rhs.scale(-1)
    return lhs - rhs


def graph_sum_literal_counts(max_size: int) -> Dict[Tuple[int, int], Tuple[int, int]]:
    """(ℓ, k) ↦ (count under the tiling reading, count under the gaps reading)."""
    out = {}
    for ell in range(max_size + 1):
        for k in range((max_size - ell) // 2 + 1):
            out[(ell, k)] = (len(enumerate_line_graphs(ell, k)),
                             len(enumerate_line_graphs(ell, k, reading="gaps")))
    return out
