"""Independent reference implementations used by the tests.

Operators are applied to sympy expressions by literal differentiation and
integrals over R^d are computed by Gauss-Hermite quadrature on test
functions of the form p(x)·exp(-|x|²/N).  Nothing here calls the package's
own application, integration-by-parts or bracket code.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy as sp

from cyclic_formality.algebra import Polynomial
from cyclic_formality.dpoly import PolyDiffOp
from cyclic_formality.tpoly import PolyVector


def symbols(dim):
    return sp.symbols(f"x0:{dim}", real=True)


def poly_expr(p: Polynomial, xs):
    return sum((sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x**k for x, k in zip(xs, e)])
                for e, c in p.terms.items()), sp.Integer(0))


def apply_op(op: PolyDiffOp, fs, xs):
    """Σ c x^e ∏_j ∂^{α_j} f_j, straight from the stored terms."""
    total = sp.Integer(0)
    for key, c in op.terms.items():
        term = sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x**k for x, k in zip(xs, key[0])])
        for f, alpha in zip(fs, key[1:]):
            d = f
            for x, k in zip(xs, alpha):
                if k:
                    d = sp.diff(d, x, k)
            term = term * d
        total += term
    return total


def vector_apply(coeffs, f, xs):
    return sum(c * sp.diff(f, x) for c, x in zip(coeffs, xs))


def components_matrix(pv: PolyVector, xs):
    """Full skew array π[i1..ik] of a homogeneous polyvector."""
    k = pv.degree
    dim = pv.dim
    arr = {}
    for idx in itertools.product(range(dim), repeat=k):
        if len(set(idx)) < k:
            continue
        key = tuple(sorted(idx))
        if key not in pv.components:
            continue
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if idx[a] > idx[b])
        arr[idx] = (-1) ** inv * poly_expr(pv.components[key], xs)
    return arr


def hkr_apply(pv: PolyVector, fs, xs):
    """(1/k!) π^{i1..ik} ∂_{i1}f_1 ... ∂_{ik}f_k."""
    k = pv.degree
    total = sp.Integer(0)
    for idx, c in components_matrix(pv, xs).items():
        total += c * sp.Mul(*[sp.diff(f, xs[i]) for f, i in zip(fs, idx)])
    return total / math.factorial(k)


def divergence_vector(pv: PolyVector, phi, xs):
    """Coefficients of div π for a bivector: Σ_i e^{-φ}∂_i(e^φ π^{ij})."""
    arr = components_matrix(pv, xs)
    out = []
    for j in range(pv.dim):
        s = sum(sp.diff(arr.get((i, j), 0), xs[i]) + sp.diff(phi, xs[i]) * arr.get((i, j), 0)
                for i in range(pv.dim))
        out.append(sp.expand(s))
    return out


def vector_divergence(coeffs, phi, xs):
    return sp.expand(sum(sp.diff(c, x) + sp.diff(phi, x) * c for c, x in zip(coeffs, xs)))


def random_test_polys(dim, count, rng, max_degree=2):
    xs = symbols(dim)
    out = []
    for _ in range(count):
        p = sp.Integer(0)
        for e in itertools.product(range(max_degree + 1), repeat=dim):
            if sum(e) <= max_degree and rng.random() < 0.6:
                p += rng.randint(-3, 3) * sp.Mul(*[x**k for x, k in zip(xs, e)])
        out.append(p if p != 0 else sp.Integer(1))
    return out


class Quadrature:
    """∫_{R^d} F(x) e^{φ(x)} dx for F = P(x)·exp(-|x|²)."""

    def __init__(self, dim, nodes=40):
        self.dim = dim
        self.xs = symbols(dim)
        t, w = np.polynomial.hermite.hermgauss(nodes)
        grids = np.meshgrid(*([t] * dim), indexing="ij")
        self.points = [g.ravel() for g in grids]
        weights = np.ones_like(self.points[0])
        for g in np.meshgrid(*([w] * dim), indexing="ij"):
            weights = weights * g.ravel()
        self.weights = weights * np.exp(sum(p * p for p in self.points))

    def gaussian(self, n_functions):
        return sp.exp(-sum(x**2 for x in self.xs) / n_functions)

    def integrate(self, expr, phi=0):
        f = sp.lambdify(self.xs, expr * sp.exp(phi), "numpy")
        vals = np.broadcast_to(f(*self.points), self.weights.shape)
        return float(np.sum(vals * self.weights))


def frac_close(a, b, tol=1e-8):
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(a)), abs(float(b)))


def to_fraction(x) -> Fraction:
    return Fraction(x).limit_denominator(10**6)
