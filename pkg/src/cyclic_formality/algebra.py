"""Exact sparse polynomials over the rationals.

A polynomial in ``dim`` variables is stored as a mapping from exponent
tuples to exact rational coefficients (``gmpy2.mpq``).  Zero coefficients are
never stored, so two polynomials are equal exactly when their term maps are.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from gmpy2 import mpq

Rational = mpq
MultiIndex = Tuple[int, ...]


class DimensionError(ValueError):
    """Raised when objects living in different ambient dimensions are mixed."""


def as_rational(value) -> Rational:
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, str, Fraction)):
        return Rational(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def zero_index(dim: int) -> MultiIndex:
    return (0,) * dim


def unit_index(dim: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(dim))


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def index_order(a: MultiIndex) -> int:
    return sum(a)


class Polynomial:
    """Sparse multivariate polynomial with rational (or, for Monte Carlo
    layers, float) coefficients.  Instances are treated as immutable."""

    __slots__ = ("dim", "terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[MultiIndex, object] | None = None):
        self.dim = dim
        clean: Dict[MultiIndex, object] = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != dim:
                    raise DimensionError(f"exponent {exps} does not have length {dim}")
                if c != 0:
                    clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def _raw(cls, dim: int, terms: Dict[MultiIndex, object]) -> "Polynomial":
        # caller guarantees normalized keys and non-zero values
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {})

    @classmethod
    def constant(cls, dim: int, c) -> "Polynomial":
        c = as_rational(c) if not isinstance(c, float) else c
        return cls._raw(dim, {zero_index(dim): c} if c != 0 else {})

    @classmethod
    def monomial(cls, exps: Iterable[int], c=1) -> "Polynomial":
        exps = tuple(exps)
        return cls(len(exps), {exps: as_rational(c)})

    @classmethod
    def variable(cls, dim: int, i: int) -> "Polynomial":
        if not 0 <= i < dim:
            raise IndexError(f"axis {i} out of range for dim {dim}")
        return cls._raw(dim, {unit_index(dim, i): Rational(1)})

    # -- basic protocol -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.dim == other.dim and self.terms == other.terms
        if isinstance(other, (int, Fraction, Rational)):
            if other == 0:
                return not self.terms
            return self.terms == {zero_index(self.dim): other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self.terms.items())))
        return self._hash

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get(zero_index(self.dim), 0)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def _check(self, other: "Polynomial"):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.dim, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        if c == 0:
            return Polynomial.zero(self.dim)
        if c == 1:
            return self
        return Polynomial._raw(self.dim, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out: Dict[MultiIndex, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.dim, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        result = Polynomial.constant(self.dim, 1)
        for _ in range(n):
            result = result * self
        return result

    # -- calculus ---------------------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        if not 0 <= i < self.dim:
            raise IndexError(f"axis {i} out of range for dim {self.dim}")
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(self.dim, out)

    def diff_multi(self, alpha: MultiIndex) -> "Polynomial":
        p = self
        for i, k in enumerate(alpha):
            for _ in range(k):
                p = p.diff(i)
                if not p.terms:
                    return p
        return p

    def evaluate(self, point) -> object:
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    # -- display ----------------------------------------------------------
    def __repr__(self):
        return f"Polynomial({self.dim}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = variable_names(self.dim)
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def parity_sign(n: int) -> int:
    """(-1)^n as an int, also for negative n."""
    return -1 if n % 2 else 1


def variable_names(dim: int):
    if dim <= 3:
        return ["x", "y", "z"][:dim]
    return [f"x{i + 1}" for i in range(dim)]


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def partial_derivative(p: Polynomial, i: int) -> Polynomial:
    return p.diff(i)


def monomials_up_to(dim: int, max_degree: int):
    """All exponent tuples of total degree <= max_degree, graded-lex order."""
    every = itertools.product(range(max_degree + 1), repeat=dim)
    kept = [e for e in every if sum(e) <= max_degree]
    return sorted(kept, key=lambda e: (sum(e), tuple(-k for k in e)))


def random_polynomial(dim: int, max_degree: int, seed, density: float = 0.5,
                      max_coeff: int = 5) -> Polynomial:
    """Deterministic pseudo-random polynomial of total degree <= max_degree.

    Each monomial is kept with probability ``density``; coefficients are
    small rationals p/q with |p| <= max_coeff and q in {1, 2, 3}.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    terms = {}
    for e in monomials_up_to(dim, max_degree):
        if rng.random() < density:
            num = rng.randint(-max_coeff, max_coeff)
            den = rng.choice((1, 1, 2, 3))
            if num:
                terms[e] = Rational(num, den)
    return Polynomial(dim, terms)


# -- JSON ------------------------------------------------------------------

def rational_to_str(c: Rational) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def polynomial_to_json(p: Polynomial) -> dict:
    terms = [
        {"exps": list(e), "coeff": rational_to_str(p.terms[e])}
        for e in sorted(p.terms)
    ]
    return {"dim": p.dim, "terms": terms}


def polynomial_from_json(data: dict) -> Polynomial:
    try:
        dim = int(data["dim"])
        terms = {}
        for t in data["terms"]:
            exps = tuple(int(k) for k in t["exps"])
            if any(k < 0 for k in exps):
                raise ValueError(f"negative exponent in {exps}")
            terms[exps] = terms.get(exps, 0) + Rational(str(t["coeff"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed polynomial JSON: {exc}") from exc
    return Polynomial(dim, terms)
