"""Randomised verification suites shared by the command line and the tests.

Every suite takes a :class:`SuiteConfig` and returns check records
``{"name", "ok", ...}``.  Failing exact checks carry a JSON counterexample;
statistical checks carry their estimate and standard error.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List

from .algebra import Polynomial, Rational, parity_sign, polynomial_to_json, random_polynomial
from .cyclic import (
    bicomplex_square_check,
    cyclic_power,
    cyclic_shift,
    is_cyclic,
    sigma,
    sigma_defect_holds,
)
from .dpoly import (
    PolyDiffOp,
    d_K,
    gerstenhaber,
    hkr,
    hochschild_d,
    homotopy_h,
    mult_op,
    op_to_json,
    random_op,
)
from .formality.assembly import linf_residual
from .formality.graphs import enumerate_admissible
from .formality.weights import WeightCache, exact_line_weight
from .hkr_cyclic import chain_map_residual, cyclic_hkr
from .quantize import (
    associativity_residual,
    cyclicity_residual,
    mc_series,
    moyal_product,
    trace_residual,
)
from .tpoly import (
    PolyVector,
    UPolyElement,
    VolumeForm,
    d_div,
    divergence,
    polyvector_to_json,
    random_polyvector,
    schouten_bracket,
    u_bracket,
)

SUITES = ("algebra", "hochschild", "cyclic", "bicomplex", "hkr", "chainmap",
          "weights-n1", "linf-n2", "star")


@dataclass
class SuiteConfig:
    suite: str
    dim: int = 2
    max_poly_degree: int = 2
    max_arity: int = 3
    trials: int = 10
    seed: int = 0
    vol: VolumeForm | None = None
    samples: int = 200_000
    workers: int = 1
    extra: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if min(self.dim, self.trials, self.samples, self.workers) < 1 or self.max_poly_degree < 0:
            raise ValueError("bounds must be positive")
        if self.vol is None:
            self.vol = VolumeForm.standard(self.dim)
        if self.vol.dim != self.dim:
            raise ValueError("volume form dimension does not match --dim")

    def echo(self) -> dict:
        return {"suite": self.suite, "dim": self.dim, "max_poly_degree": self.max_poly_degree,
                "max_arity": self.max_arity, "trials": self.trials, "seed": self.seed,
                "log_density": polynomial_to_json(self.vol.log_density),
                "samples": self.samples, "workers": self.workers}


def _record(name: str, ok: bool, counterexample=None, **extra) -> dict:
    rec = {"name": name, "ok": bool(ok)}
    if counterexample is not None and not ok:
        rec["counterexample"] = counterexample
    rec.update(extra)
    return rec


def _trial_check(name: str, cfg: SuiteConfig, body: Callable[[random.Random], object]) -> dict:
    """Run ``body`` for every trial; it returns None on success or a counterexample."""
    rng = random.Random(f"{cfg.seed}:{name}")
    for t in range(cfg.trials):
        bad = body(rng)
        if bad is not None:
            return _record(name, False, {"trial": t, **bad})
    return _record(name, True, trials=cfg.trials)


def _rop(cfg, rng, arity=None):
    arity = rng.randint(0, cfg.max_arity) if arity is None else arity
    return random_op(cfg.dim, arity, rng, max_order=2, max_poly_degree=cfg.max_poly_degree)


def _rpv(cfg, rng, degree=None):
    degree = rng.randint(0, cfg.dim) if degree is None else degree
    return random_polyvector(cfg.dim, degree, cfg.max_poly_degree, rng)


# -- suites -----------------------------------------------------------------------

def suite_algebra(cfg: SuiteConfig) -> List[dict]:
    def ring(rng):
        p, q, r = (random_polynomial(cfg.dim, cfg.max_poly_degree, rng) for _ in range(3))
        i = rng.randrange(cfg.dim)
        if (p * q) * r != p * (q * r) or p * (q + r) != p * q + p * r:
            return {"p": polynomial_to_json(p)}
        if (p * q).diff(i) != p.diff(i) * q + p * q.diff(i):
            return {"p": polynomial_to_json(p), "q": polynomial_to_json(q)}
        return None

    def schouten(rng):
        a, b, c = _rpv(cfg, rng), _rpv(cfg, rng), _rpv(cfg, rng)
        ka, kb = a.degree - 1, b.degree - 1
        if schouten_bracket(a, b) != schouten_bracket(b, a).scale(-parity_sign(ka * kb)):
            return {"a": polyvector_to_json(a), "b": polyvector_to_json(b)}
        jac = (schouten_bracket(a, schouten_bracket(b, c))
               - schouten_bracket(schouten_bracket(a, b), c)
               - schouten_bracket(b, schouten_bracket(a, c)).scale(parity_sign(ka * kb)))
        if not jac.is_zero():
            return {"a": polyvector_to_json(a), "b": polyvector_to_json(b), "c": polyvector_to_json(c)}
        return None

    def ddiv(rng):
        e = UPolyElement(cfg.dim, {rng.randint(0, 2): _rpv(cfg, rng)})
        return None if d_div(d_div(e, cfg.vol), cfg.vol).is_zero() else {"degree": rng.random()}

    def derivation(rng):
        a, b = _rpv(cfg, rng, rng.randint(1, cfg.dim)), _rpv(cfg, rng, rng.randint(1, cfg.dim))
        ka = a.degree - 1
        lhs = divergence(schouten_bracket(a, b), cfg.vol)
        rhs = (schouten_bracket(divergence(a, cfg.vol), b)
               + schouten_bracket(a, divergence(b, cfg.vol)).scale(parity_sign(ka)))
        if lhs != rhs:
            return {"a": polyvector_to_json(a), "b": polyvector_to_json(b)}
        return None

    def u_derivation(rng):
        deg = rng.randint(1, cfg.dim)
        e1 = UPolyElement(cfg.dim, {rng.randint(0, 1): _rpv(cfg, rng, deg)})
        e2 = UPolyElement(cfg.dim, {rng.randint(0, 1): _rpv(cfg, rng, rng.randint(1, cfg.dim))})
        ka = deg - 1
        lhs = d_div(u_bracket(e1, e2), cfg.vol)
        rhs = u_bracket(d_div(e1, cfg.vol), e2) + u_bracket(e1, d_div(e2, cfg.vol)).scale(parity_sign(ka))
        return None if lhs == rhs else {"seed": cfg.seed}

    return [
        _trial_check("polynomial ring and Leibniz", cfg, ring),
        _trial_check("Schouten antisymmetry and Jacobi", cfg, schouten),
        _trial_check("d_div squares to zero", cfg, ddiv),
        _trial_check("div is a derivation of the Schouten bracket", cfg, derivation),
        _trial_check("d_div is a derivation of the u-bracket", cfg, u_derivation),
    ]


def suite_hochschild(cfg: SuiteConfig) -> List[dict]:
    m = mult_op(cfg.dim)

    def d_squared(rng):
        op = _rop(cfg, rng)
        return None if hochschild_d(hochschild_d(op)).is_zero() else {"op": op_to_json(op)}

    def d_is_bracket(rng):
        op = _rop(cfg, rng, rng.randint(1, cfg.max_arity))
        return None if hochschild_d(op) == gerstenhaber(m, op) else {"op": op_to_json(op)}

    def jacobi(rng):
        a, b, c = (_rop(cfg, rng, rng.randint(1, 2)) for _ in range(3))
        ka, kb = a.arity - 1, b.arity - 1
        lhs = gerstenhaber(a, gerstenhaber(b, c))
        rhs = (gerstenhaber(gerstenhaber(a, b), c)
               + gerstenhaber(b, gerstenhaber(a, c)).scale(parity_sign(ka * kb)))
        return None if lhs == rhs else {"a": op_to_json(a), "b": op_to_json(b), "c": op_to_json(c)}

    return [
        _record("[m, m] = 0", gerstenhaber(m, m).is_zero()),
        _trial_check("d_Hoch squares to zero", cfg, d_squared),
        _trial_check("d_Hoch equals [m, -]", cfg, d_is_bracket),
        _trial_check("Gerstenhaber Jacobi identity", cfg, jacobi),
    ]


def suite_cyclic(cfg: SuiteConfig) -> List[dict]:
    def period(rng):
        op = _rop(cfg, rng, rng.randint(1, cfg.max_arity))
        ok = cyclic_power(op, cfg.vol, op.arity + 1) == op
        return None if ok else {"op": op_to_json(op)}

    def sigma_kills(rng):
        op = _rop(cfg, rng, rng.randint(1, cfg.max_arity))
        s = sigma(op, cfg.vol)
        ok = (s - cyclic_shift(s, cfg.vol)).is_zero()
        ok = ok and sigma(op - cyclic_shift(op, cfg.vol), cfg.vol).is_zero()
        return None if ok else {"op": op_to_json(op)}

    def closure(rng):
        a = sigma(_rop(cfg, rng, rng.randint(1, 2)), cfg.vol)
        b = sigma(_rop(cfg, rng, rng.randint(1, 2)), cfg.vol)
        ok = is_cyclic(hochschild_d(a), cfg.vol) and is_cyclic(gerstenhaber(a, b), cfg.vol)
        return None if ok else {"a": op_to_json(a), "b": op_to_json(b)}

    def defect(rng):
        op = _rop(cfg, rng, rng.randint(1, cfg.max_arity - 1 or 1))
        return None if sigma_defect_holds(op, cfg.vol) else {"op": op_to_json(op)}

    return [
        _trial_check("C^(n+1) = 1", cfg, period),
        _trial_check("(1 - C) Sigma = Sigma (1 - C) = 0", cfg, sigma_kills),
        _trial_check("cyclic cochains closed under d and bracket", cfg, closure),
        _trial_check("Sigma-defect identity", cfg, defect),
    ]


def suite_bicomplex(cfg: SuiteConfig) -> List[dict]:
    def squares(rng):
        op = _rop(cfg, rng, rng.randint(1, cfg.max_arity))
        res = bicomplex_square_check(op, cfg.vol)
        return None if all(res.values()) else {"op": op_to_json(op), **res}

    def dk(rng):
        op = _rop(cfg, rng)
        return None if d_K(d_K(op)).is_zero() else {"op": op_to_json(op)}

    def homotopy(rng):
        op = _rop(cfg, rng)
        lhs = homotopy_h(d_K(op)) - (d_K(homotopy_h(op)) if op.arity else PolyDiffOp.zero(op.dim, 0))
        rhs = op.scale(parity_sign(op.arity)) if op.arity else op
        return None if lhs == rhs else {"op": op_to_json(op)}

    return [
        _trial_check("squares 1 and 2 commute", cfg, squares),
        _trial_check("d_K squares to zero", cfg, dk),
        _trial_check("h d_K - d_K h = (-1)^n", cfg, homotopy),
    ]


def suite_hkr(cfg: SuiteConfig) -> List[dict]:
    def cyclic_image(rng):
        g = _rpv(cfg, rng, rng.randint(0, min(cfg.dim, 2)))
        k = rng.randint(0, 1)
        ops = cyclic_hkr(UPolyElement.single(g, k), cfg.vol)
        ok = all(is_cyclic(op, cfg.vol) for op in ops.values() if op.arity > 0)
        return None if ok else {"gamma": polyvector_to_json(g), "k": k}

    def vector_field(rng):
        xi = _rpv(cfg, rng, 1)
        op = cyclic_hkr(UPolyElement.single(xi), cfg.vol)[1]
        expect = hkr(xi) + PolyDiffOp.from_grouped(
            cfg.dim, 1, [(c, [(0,) * cfg.dim]) for c in divergence(xi, cfg.vol).components.values()]
        ).scale(Rational(1, 2))
        return None if op == expect else {"xi": polyvector_to_json(xi)}

    return [
        _trial_check("cyclic HKR lands in cyclic cochains", cfg, cyclic_image),
        _trial_check("vector fields map to xi + div(xi)/2", cfg, vector_field),
    ]


def suite_chainmap(cfg: SuiteConfig) -> List[dict]:
    def body(rng):
        g = _rpv(cfg, rng, rng.randint(0, min(cfg.dim, 3)))
        k = rng.randint(0, 2)
        if g.degree + 2 * k == 0:
            k = 1
        res = chain_map_residual(g, k, cfg.vol)
        return None if res.is_zero() else {"gamma": polyvector_to_json(g), "k": k}

    return [_trial_check("chain map residual vanishes", cfg, body)]


def suite_weights_n1(cfg: SuiteConfig) -> List[dict]:
    out = []
    cache = WeightCache(cfg.samples, cfg.seed, cfg.workers)
    for ell, k in ((1, 0), (2, 0), (1, 1), (0, 1), (3, 0), (2, 1)):
        for g in enumerate_admissible(1, ell + 2 * k, k, canonical_only=True):
            w, _ = cache.get(g)
            target = float(exact_line_weight(g))
            out.append(_record(f"weight {g.key()}", w.consistent_with(target, floor=1e-9),
                               estimate=w.value, std_error=w.std_error, target=target))
    return out


def suite_linf_n2(cfg: SuiteConfig) -> List[dict]:
    vol = VolumeForm.standard(2)
    gamma = PolyVector.basis(2, (0, 1), Polynomial.constant(2, cfg.extra.get("scale", 1)))
    eta = UPolyElement.single(gamma)
    cache = WeightCache(cfg.samples, cfg.seed, cfg.workers)
    out = [_record("n = 1 residual vanishes",
                   all(linf_residual([eta], m, vol).exact.is_zero() for m in (1, 2, 3)))]
    for m in (2, 3):
        res = linf_residual([eta, eta], m, vol, cache=cache)
        out.append(_record(f"n = 2 residual, arity {m}", res.consistent_with_zero(),
                           max_z=res.max_z(), terms=len(res.value())))
    return out


def suite_star(cfg: SuiteConfig) -> List[dict]:
    gamma = PolyVector.basis(2, (0, 1))
    vol = VolumeForm.standard(2)
    moyal = moyal_product(gamma, 3)
    out = [
        _record("Moyal associativity", all(r.exact.is_zero() for r in associativity_residual(moyal))),
        _record("Moyal cyclicity", all(r.exact.is_zero() for r in cyclicity_residual(moyal, vol))),
        _record("Moyal trace", all(r.exact.is_zero() for r in trace_residual(moyal, vol))),
    ]
    s = mc_series(gamma, vol, 2, cfg.samples, cfg.seed, cfg.workers)
    out.append(_record("B1 equals Moyal", s.corrections[0].exact == moyal.exact_terms()[0]))
    diff = s.corrections[1] - moyal.corrections[1]
    out.append(_record("B2 matches Moyal within error", diff.consistent_with_zero(), max_z=diff.max_z()))
    res = associativity_residual(s)
    out.append(_record("order-2 associativity within error", res[2].consistent_with_zero(),
                       max_z=res[2].max_z()))
    return out


SUITE_FUNCS = {
    "algebra": suite_algebra,
    "hochschild": suite_hochschild,
    "cyclic": suite_cyclic,
    "bicomplex": suite_bicomplex,
    "hkr": suite_hkr,
    "chainmap": suite_chainmap,
    "weights-n1": suite_weights_n1,
    "linf-n2": suite_linf_n2,
    "star": suite_star,
}


def run_suite(cfg: SuiteConfig) -> List[dict]:
    return SUITE_FUNCS[cfg.suite](cfg)
