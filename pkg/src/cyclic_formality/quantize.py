"""Star products from the formality map, their residuals and gauge action.

``f * g = fg + Σ_n ħ^n B_n(f, g)``; ħ is only a grading, so a star product
is the list of its corrections.  Corrections built by Monte Carlo are
:class:`MCOperator` values; exact ones are wrapped with no sampled pieces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import factorial
from typing import List

from .algebra import Rational
from .cyclic import density_normal_form, pairing
from .dpoly import PolyDiffOp, compose_at, insert_unit_slots, mult_op, op_to_json, random_op
from .formality.assembly import MCOperator, cyclic_component
from .formality.weights import WeightCache
from .hkr_cyclic import cyclic_hkr
from .tpoly import PolyVector, UPolyElement, VolumeForm, check_poisson


def _mc(op) -> MCOperator:
    return op if isinstance(op, MCOperator) else MCOperator.from_exact(op)


@dataclass
class StarProduct:
    dim: int
    corrections: List[MCOperator] = field(default_factory=list)

    def __post_init__(self):
        self.corrections = [_mc(b) for b in self.corrections]
        for b in self.corrections:
            if b.arity != 2 or b.dim != self.dim:
                raise ValueError("star product corrections must be arity-2 operators of the same dimension")

    @property
    def order(self) -> int:
        return len(self.corrections)

    def term(self, n: int) -> MCOperator:
        """B_n with B_0 the pointwise product."""
        if n == 0:
            return MCOperator.from_exact(mult_op(self.dim))
        return self.corrections[n - 1]

    def is_exact(self) -> bool:
        return all(not b.pieces for b in self.corrections)

    def exact_terms(self) -> List[PolyDiffOp]:
        if not self.is_exact():
            raise ValueError("star product carries Monte Carlo terms")
        return [b.exact for b in self.corrections]

    def to_json(self) -> dict:
        out = {"dim": self.dim, "order": self.order, "corrections": {}}
        for n, b in enumerate(self.corrections, start=1):
            if not b.pieces:
                out["corrections"][str(n)] = op_to_json(b.exact)
            else:
                out["corrections"][str(n)] = {
                    "estimate": [{"key": [list(k) for k in key], "value": v, "std_error": s}
                                 for key, (v, s) in sorted(b.value().items())]
                }
        return out


@dataclass
class GaugeTransform:
    dim: int
    corrections: List[PolyDiffOp] = field(default_factory=list)

    def __post_init__(self):
        for t in self.corrections:
            if t.arity != 1 or t.dim != self.dim:
                raise ValueError("gauge corrections must be arity-1 operators of the same dimension")

    @property
    def order(self) -> int:
        return len(self.corrections)

    def term(self, n: int) -> PolyDiffOp:
        if n == 0:
            return PolyDiffOp.identity(self.dim)
        if n > self.order:
            return PolyDiffOp.zero(self.dim, 1)
        return self.corrections[n - 1]

    def inverse(self, order: int | None = None) -> "GaugeTransform":
        """Formal inverse S with S_n = -Σ_{i=1..n} T_i ∘ S_{n-i}."""
        order = self.order if order is None else order
        inv: List[PolyDiffOp] = []
        for n in range(1, order + 1):
            acc = PolyDiffOp.zero(self.dim, 1)
            for i in range(1, n + 1):
                prev = PolyDiffOp.identity(self.dim) if n == i else inv[n - i - 1]
                acc = acc + compose_at(self.term(i), 0, prev)
            inv.append(acc.scale(-1))
        return GaugeTransform(self.dim, inv)

    def is_adjoint_pair(self, vol: VolumeForm) -> bool:
        """∫T(f)·g·Ω = ∫f·T⁻¹(g)·Ω order by order."""
        inv = self.inverse()
        for n in range(1, self.order + 1):
            left = pairing(self.term(n), vol).rest
            right = density_normal_form(insert_unit_slots(inv.term(n), [1], 2), vol).rest
            if left != right:
                return False
        return True


# -- composition helpers for operators carrying MC pieces -----------------------------

def _bilinear(a: MCOperator, b: MCOperator, f) -> MCOperator:
    if not a.pieces:
        return b.map(lambda op: f(a.exact, op))
    if not b.pieces:
        return a.map(lambda op: f(op, b.exact))
    raise NotImplementedError("products of two sampled operators are not supported")


# -- construction --------------------------------------------------------------------

def moyal_order(gamma: PolyVector, n: int) -> PolyDiffOp:
    """(1/n!)(½)^n π^{a_1 b_1}...π^{a_n b_n} ∂_{a_1..a_n} f ∂_{b_1..b_n} g."""
    if gamma.components and gamma.degree != 2:
        raise ValueError("Moyal product needs a bivector")
    if any(c.degree() > 0 for c in gamma.components.values()):
        raise ValueError("Moyal product needs constant coefficients")
    dim = gamma.dim
    if n == 0:
        return mult_op(dim)
    pi = {}
    for (a, b), c in gamma.components.items():
        pi[(a, b)] = c.constant_term()
        pi[(b, a)] = -c.constant_term()
    # B_n = (B_1)^n / n! as a power of the bidifferential symbol
    terms = {((0,) * dim, (0,) * dim): Rational(1)}
    for _ in range(n):
        new = {}
        for (al, be), c in terms.items():
            for (a, b), p in pi.items():
                al2 = tuple(x + (1 if j == a else 0) for j, x in enumerate(al))
                be2 = tuple(x + (1 if j == b else 0) for j, x in enumerate(be))
                new[(al2, be2)] = new.get((al2, be2), 0) + c * p / 2
        terms = {k: v for k, v in new.items() if v}
    z = (0,) * dim
    scale = Rational(1, factorial(n))
    return PolyDiffOp(dim, 2, {(z, al, be): c * scale for (al, be), c in terms.items()})


def moyal_product(gamma: PolyVector, order: int) -> StarProduct:
    return StarProduct(gamma.dim, [moyal_order(gamma, n) for n in range(1, order + 1)])


def mc_series(gamma: PolyVector, vol: VolumeForm, order: int = 2, samples: int = 1_000_000,
              seed: int = 0, workers: int = 1, cache: WeightCache | None = None) -> StarProduct:
    """B_n = C_n(γ, ..., γ)/n! with C_1 exact and C_2 sampled."""
    if order > 2:
        raise NotImplementedError("orders above 2 need three-vertex weights")
    status = check_poisson(gamma, vol)
    if not status["jacobi_ok"]:
        raise ValueError("γ is not Poisson: [γ, γ] ≠ 0")
    if not status["div_free"]:
        raise ValueError("γ is not divergence free for this volume form")
    if gamma.components and gamma.degree != 2:
        raise ValueError("γ must be a bivector")
    eta = UPolyElement.single(gamma, 0)
    out: List[MCOperator] = []
    if order >= 1:
        b1 = cyclic_hkr(eta, vol).get(2, PolyDiffOp.zero(gamma.dim, 2))
        out.append(MCOperator.from_exact(b1))
    if order >= 2:
        if cache is None:
            cache = WeightCache(samples, seed, workers)
        c2 = cyclic_component([eta, eta], 2, vol, cache=cache)
        out.append(c2.scale(Rational(1, 2)))
    return StarProduct(gamma.dim, out)


# -- residuals -------------------------------------------------------------------------

def associativity_residual(s: StarProduct, order: int | None = None) -> List[MCOperator]:
    """ħ^n coefficients of (f*g)*h - f*(g*h), n = 0..order."""
    order = s.order if order is None else order
    if order > s.order:
        raise ValueError("order exceeds the star product's order")
    out = []
    for n in range(order + 1):
        acc = MCOperator.zero(s.dim, 3)
        for i in range(n + 1):
            bi, bj = s.term(i), s.term(n - i)
            acc = acc + _bilinear(bi, bj, lambda a, b: compose_at(a, 0, b))
            acc = acc - _bilinear(bi, bj, lambda a, b: compose_at(a, 1, b))
        out.append(acc)
    return out


def cyclicity_residual(s: StarProduct, vol: VolumeForm) -> List[MCOperator]:
    """Normal forms of ∫B_n(f,g)·h·Ω - ∫B_n(g,h)·f·Ω, one per ħ-power.

    Each entry is the arity-2 operator ``rest`` of a density normal form
    ``∫ f · rest(g, h) · Ω``.
    """
    out = []
    for n in range(s.order + 1):
        b = s.term(n)
        out.append(b.map(lambda op: pairing(op, vol).rest
                         - density_normal_form(insert_unit_slots(op, [1, 2], 3), vol).rest))
    return out


def trace_residual(s: StarProduct, vol: VolumeForm) -> List[MCOperator]:
    """Normal forms of ∫(f*g)Ω - ∫fgΩ per ħ-power (arity-1 ``rest``)."""
    out = [MCOperator.zero(s.dim, 1)]
    for n in range(1, s.order + 1):
        out.append(s.term(n).map(lambda op: density_normal_form(op, vol).rest))
    return out


def specialize_last(op: PolyDiffOp) -> PolyDiffOp:
    """Put the last argument equal to the constant 1."""
    z = (0,) * op.dim
    return PolyDiffOp(op.dim, op.arity - 1,
                      {k[:-1]: c for k, c in op.terms.items() if k[-1] == z}, _trusted=True)


def gauge_transform(s: StarProduct, t: GaugeTransform) -> StarProduct:
    """f *' g = T(T⁻¹f * T⁻¹g), truncated at the star product's order."""
    if s.dim != t.dim:
        raise ValueError("dimension mismatch")
    n_max = s.order
    inv = t.inverse(n_max)
    out = []
    for n in range(1, n_max + 1):
        acc = MCOperator.zero(s.dim, 2)
        for a in range(n + 1):
            for b in range(n + 1 - a):
                for c in range(n + 1 - a - b):
                    e = n - a - b - c
                    ta, sc, se = t.term(a), inv.term(c), inv.term(e)

                    def conj(op, ta=ta, sc=sc, se=se):
                        inner = compose_at(compose_at(op, 0, sc), 1, se)
                        return compose_at(ta, 0, inner)

                    acc = acc + s.term(b).map(conj)
        out.append(acc)
    return StarProduct(s.dim, out)


def random_gauge(dim: int, order: int, seed, max_order: int = 2,
                 max_poly_degree: int = 2) -> GaugeTransform:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return GaugeTransform(dim, [random_op(dim, 1, rng, max_order=max_order,
                                          max_poly_degree=max_poly_degree)
                                for _ in range(order)])
