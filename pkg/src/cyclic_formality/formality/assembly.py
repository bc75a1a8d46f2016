"""Graph operators, Taylor components and the L∞ residual.

Operators with Monte Carlo weights are carried as :class:`MCOperator`: an
exact part plus a list of (independent weight estimate, exact operator)
pairs.  Linear maps act on every piece separately, so the final coefficient
of each term comes with a standard error obtained by adding the independent
contributions in quadrature.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from ..algebra import Polynomial, Rational, add_index, zero_index
from ..cyclic import sigma_projector
from ..dpoly import PolyDiffOp, gerstenhaber, hkr, hochschild_d
from ..hkr_cyclic import cyclic_hkr
from ..tpoly import PolyVector, UPolyElement, VolumeForm, d_div, schouten_bracket, u_bracket
from .graphs import AdmissibleGraph, enumerate_admissible, permutation_sign
from .weights import WeightCache, WeightEstimate, exact_line_weight


def skew_component(gamma: PolyVector, indices: Sequence[int]) -> Polynomial | None:
    """⟨γ, dx^{i_1} ⊗ ... ⊗ dx^{i_s}⟩ for γ seen as a skew tensor."""
    if len(set(indices)) != len(indices):
        return None
    key = tuple(sorted(indices))
    coeff = gamma.components.get(key)
    if coeff is None:
        return None
    return coeff if permutation_sign(indices) > 0 else coeff.scale(-1)


def graph_operator(graph: AdmissibleGraph, gammas: Sequence[PolyVector]) -> PolyDiffOp:
    """The polydifferential operator of ``graph`` with γ_v placed at vertex v.

    Every usual edge carries a summation index: it contracts the matching
    slot of its source's polyvector and differentiates its target.  Dashed
    edges carry no index.
    """
    if len(gammas) != graph.n:
        raise ValueError(f"graph has {graph.n} aerial vertices, got {len(gammas)} polyvectors")
    dim = gammas[0].dim
    for v, g in enumerate(gammas, start=1):
        if g.components and g.degree != len(graph.star(v)):
            raise ValueError(f"vertex {v}: polyvector degree {g.degree} vs star {len(graph.star(v))}")
    edges = list(graph.usual_edges)
    stars = {v: [e for e, (s, _) in enumerate(edges) if s == v] for v in range(1, graph.n + 1)}
    grouped = []
    for assignment in itertools.product(range(dim), repeat=len(edges)):
        coeff = Polynomial.constant(dim, 1)
        alphas = {t: zero_index(dim) for t in list(range(1, graph.n + 1)) + list(range(-graph.m, 0))}
        for e, (_, t) in enumerate(edges):
            unit = tuple(1 if j == assignment[e] else 0 for j in range(dim))
            alphas[t] = add_index(alphas[t], unit)
        for v in range(1, graph.n + 1):
            comp = skew_component(gammas[v - 1], [assignment[e] for e in stars[v]])
            if comp is None:
                coeff = None
                break
            comp = comp.diff_multi(alphas[v])
            if not comp:
                coeff = None
                break
            coeff = coeff * comp
        if coeff is None:
            continue
        grouped.append((coeff, [alphas[-j] for j in range(1, graph.m + 1)]))
    return PolyDiffOp.from_grouped(dim, graph.m, grouped)


# -- operators with Monte Carlo weights -------------------------------------------

@dataclass
class MCOperator:
    dim: int
    arity: int
    exact: PolyDiffOp
    pieces: List[Tuple[WeightEstimate, PolyDiffOp]] = field(default_factory=list)

    @classmethod
    def from_exact(cls, op: PolyDiffOp) -> "MCOperator":
        return cls(op.dim, op.arity, op, [])

    @classmethod
    def zero(cls, dim: int, arity: int) -> "MCOperator":
        return cls.from_exact(PolyDiffOp.zero(dim, arity))

    def __add__(self, other: "MCOperator") -> "MCOperator":
        if (self.dim, self.arity) != (other.dim, other.arity):
            raise ValueError("operators live in different spaces")
        return MCOperator(self.dim, self.arity, self.exact + other.exact,
                          self.pieces + other.pieces)

    def __sub__(self, other: "MCOperator") -> "MCOperator":
        return self + other.scale(-1)

    def scale(self, c) -> "MCOperator":
        return self.map(lambda op: op.scale(c))

    def map(self, f: Callable[[PolyDiffOp], PolyDiffOp]) -> "MCOperator":
        """Apply a linear map to every piece."""
        exact = f(self.exact)
        pieces = [(w, f(op)) for w, op in self.pieces]
        return MCOperator(exact.dim, exact.arity, exact, [(w, op) for w, op in pieces if not op.is_zero()])

    def value(self) -> Dict[tuple, Tuple[float, float]]:
        """term key ↦ (estimate, standard error)."""
        keys = set(self.exact.terms)
        for _, op in self.pieces:
            keys.update(op.terms)
        # pieces sharing one estimate are perfectly correlated: add them first
        merged: Dict[WeightEstimate, PolyDiffOp] = {}
        for w, op in self.pieces:
            merged[w] = merged[w] + op if w in merged else op
        out = {}
        for key in keys:
            v = float(self.exact.terms.get(key, 0))
            var = 0.0
            for w, op in merged.items():
                c = float(op.terms.get(key, 0))
                v += w.value * c
                var += (w.std_error * c) ** 2
            out[key] = (v, math.sqrt(var))
        return out

    def consistent_with_zero(self, n_sigma: float = 3.0, atol: float = 1e-12) -> bool:
        return all(abs(v) <= n_sigma * s + atol for v, s in self.value().values())

    def max_z(self) -> float:
        """Largest |value| / std_error over terms (inf for an exact nonzero term)."""
        worst = 0.0
        for v, s in self.value().values():
            if abs(v) <= 1e-12:
                continue
            worst = max(worst, abs(v) / s if s > 0 else math.inf)
        return worst


# -- Taylor components ---------------------------------------------------------------

def _profiles(etas: Sequence[UPolyElement]):
    """Multilinear expansion into homogeneous (γ_v, k_v) tuples."""
    per = [list(e.homogeneous_terms()) for e in etas]
    for combo in itertools.product(*per):
        yield [(gamma, k) for k, gamma in combo]


def taylor_component(etas: Sequence[UPolyElement], m: int, samples: int = 200_000,
                     seed: int = 0, workers: int = 1, cache: WeightCache | None = None,
                     exact_single: bool = False) -> MCOperator:
    """C̃_n(η_1, ..., η_n) restricted to arity ``m``.

    With ``exact_single`` the one-vertex weights use their closed form
    instead of sampling.
    """
    n = len(etas)
    if n == 0:
        raise ValueError("need at least one argument")
    dim = etas[0].dim
    if cache is None:
        cache = WeightCache(samples, seed, workers)
    exact = PolyDiffOp.zero(dim, m)
    by_weight: Dict[str, Tuple[WeightEstimate, PolyDiffOp]] = {}
    for profile in _profiles(etas):
        gammas = [g for g, _ in profile]
        stars = [g.degree for g in gammas]
        ks = [k for _, k in profile]
        if 2 * n + m - 2 != sum(stars) + 2 * sum(ks):
            continue
        multiplicity = math.prod(math.factorial(s) for s in stars)
        for graph in enumerate_admissible(n, m, sum(ks), star_sizes=stars, dashed_counts=ks,
                                          canonical_only=True):
            op = graph_operator(graph, gammas)
            if op.is_zero():
                continue
            op = op.scale(multiplicity)
            if exact_single and n == 1:
                exact = exact + op.scale(exact_line_weight(graph))
                continue
            w, sign = cache.get(graph)
            key = graph.canonical()[0].key()
            if key in by_weight:
                by_weight[key] = (w, by_weight[key][1] + op.scale(sign))
            else:
                by_weight[key] = (w, op.scale(sign))
    return MCOperator(dim, m, exact, [(w, op) for w, op in by_weight.values() if not op.is_zero()])


def cyclic_component(etas: Sequence[UPolyElement], m: int, vol: VolumeForm, **kwargs) -> MCOperator:
    """C_n = [Σ] ∘ C̃_n."""
    return taylor_component(etas, m, **kwargs).map(lambda op: sigma_projector(op, vol))


# -- the L∞ relation -------------------------------------------------------------------

def _hkr_arity(e: UPolyElement, vol: VolumeForm, arity: int) -> PolyDiffOp:
    return cyclic_hkr(e, vol).get(arity, PolyDiffOp.zero(e.dim, arity))


def _block_degrees(e: UPolyElement):
    return {g.degree + 2 * k for k, g in e.homogeneous_terms()}


def _classical_residual(etas, m, cache):
    eta1, eta2 = etas
    dim = eta1.dim
    for e in etas:
        if set(e.terms) - {0}:
            raise ValueError("the classical relation takes polyvectors without u-powers")
    g1, g2 = eta1.terms.get(0), eta2.terms.get(0)
    out = taylor_component([eta1, eta2], m - 1, cache=cache).map(hochschild_d)
    exact = PolyDiffOp.zero(dim, m)
    for a, b in ((g1, g2), (g2, g1)):
        for pa in a.homogeneous_parts().values():
            for pb in b.homogeneous_parts().values():
                if pa.degree + pb.degree - 1 == m:
                    exact = exact + gerstenhaber(hkr(pa), hkr(pb)).scale(Rational(1, 2))
                    exact = exact - hkr(schouten_bracket(pa, pb)).scale(Rational(1, 2))
    return out + MCOperator.from_exact(exact)


def linf_residual(etas: Sequence[UPolyElement], m: int, vol: VolumeForm | None = None,
                  mode: str = "cyclic", samples: int = 1_000_000, seed: int = 0,
                  workers: int = 1, cache: WeightCache | None = None) -> MCOperator:
    """Arity-``m`` component of the L∞ relation for n = len(etas).

    ``mode="cyclic"`` uses C_n = [Σ]C̃_n and C_1 = cyclic HKR:

    * n = 1: d C_1(η) - C_1(d_div η), exact;
    * n = 2 (arguments of even form degree, so C_2 is symmetric):
      d C_2(η_1, η_2) + ½([C_1η_1, C_1η_2] + [C_1η_2, C_1η_1])
      - ½ C_1([η_1, η_2] + [η_2, η_1]) - C_2(dη_1, η_2) - C_2(η_1, dη_2).

    ``mode="classical"`` drops the projection and the divergence: for two
    polyvectors it evaluates d C̃_2(γ_1, γ_2) + ½([hkr γ_1, hkr γ_2] + [hkr γ_2, hkr γ_1])
    - ½ hkr([γ_1, γ_2] + [γ_2, γ_1]) on dashless graphs.
    """
    n = len(etas)
    dim = etas[0].dim
    if mode not in ("cyclic", "classical"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "classical":
        if n != 2:
            raise NotImplementedError("the classical relation is implemented for n = 2")
        if cache is None:
            cache = WeightCache(samples, seed, workers)
        return _classical_residual(etas, m, cache)
    if vol is None:
        raise ValueError("the cyclic relation needs a volume form")
    if n == 1:
        (eta,) = etas
        res = hochschild_d(_hkr_arity(eta, vol, m - 1)) - _hkr_arity(d_div(eta, vol), vol, m)
        return MCOperator.from_exact(res)
    if n != 2:
        raise NotImplementedError("the L∞ relation is implemented for n <= 2")
    for e in etas:
        if any(b % 2 for b in _block_degrees(e)):
            raise ValueError("n = 2 residual needs arguments with even ℓ + 2k")
    if cache is None:
        cache = WeightCache(samples, seed, workers)
    eta1, eta2 = etas
    out = taylor_component([eta1, eta2], m - 1, cache=cache).map(
        lambda op: hochschild_d(sigma_projector(op, vol)))
    exact = PolyDiffOp.zero(dim, m)
    c1 = {0: cyclic_hkr(eta1, vol), 1: cyclic_hkr(eta2, vol)}
    for a, b in ((0, 1), (1, 0)):
        for ar1, op1 in c1[a].items():
            for ar2, op2 in c1[b].items():
                if ar1 + ar2 - 1 == m:
                    exact = exact + gerstenhaber(op1, op2).scale(Rational(1, 2))
    bracket = u_bracket(eta1, eta2) + u_bracket(eta2, eta1)
    exact = exact - _hkr_arity(bracket, vol, m).scale(Rational(1, 2))
    out = out + MCOperator.from_exact(exact)
    for pair in ([d_div(eta1, vol), eta2], [eta1, d_div(eta2, vol)]):
        if not pair[0].is_zero() and not pair[1].is_zero():
            term = taylor_component(pair, m, cache=cache).map(lambda op: sigma_projector(op, vol))
            out = out - term
    return out
