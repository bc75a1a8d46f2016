"""Polydifferential operators and the Hochschild calculus on A = Q[x_1..x_d].

An operator of arity n is a finite sum of terms

    (f_1, ..., f_n) ↦ c · x^e · ∂^{α_1} f_1 ··· ∂^{α_n} f_n,

stored flat as ``{(e, α_1, ..., α_n): c}``.  The grading is n - 1.

Sign conventions:

* ``d ψ(a_0..a_n) = a_0 ψ(a_1..) + Σ_i (-1)^i ψ(.., a_{i-1} a_i, ..)
  + (-1)^{n+1} ψ(a_0..a_{n-1}) a_n``.
* Insertion ``ψ_1 ∘_i ψ_2`` carries ``(-1)^{(k_1 - i) k_2}`` with ``k = arity - 1``
  and the bracket is ``ψ_1 ∘ ψ_2 - (-1)^{k_1 k_2} ψ_2 ∘ ψ_1``.  With these,
  ``d ψ = [m, ψ]`` holds on the nose.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, Sequence, Tuple

from .algebra import (
    DimensionError,
    MultiIndex,
    Polynomial,
    Rational,
    polynomial_from_json,
    polynomial_to_json,
    random_polynomial,
)
from .tpoly import PolyVector

Key = Tuple[MultiIndex, ...]


@lru_cache(maxsize=None)
def index_splittings(alpha: MultiIndex):
    """All (β, α-β, multinomial coefficient) with β ≤ α componentwise."""
    ranges = [range(a + 1) for a in alpha]
    out = []
    for beta in itertools.product(*ranges):
        c = 1
        for a, b in zip(alpha, beta):
            c *= comb(a, b)
        out.append((tuple(beta), tuple(a - b for a, b in zip(alpha, beta)), c))
    return tuple(out)


def _add_into(acc: dict, key, value):
    v = acc.get(key, 0) + value
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


class PolyDiffOp:
    """Multilinear polydifferential operator of fixed arity."""

    __slots__ = ("dim", "arity", "terms", "_hash")

    def __init__(self, dim: int, arity: int, terms: Dict[Key, object] | None = None,
                 _trusted: bool = False):
        self.dim = dim
        self.arity = arity
        if _trusted:
            self.terms = terms if terms is not None else {}
        else:
            clean: Dict[Key, object] = {}
            for key, c in (terms or {}).items():
                if len(key) != arity + 1 or any(len(a) != dim for a in key):
                    raise ValueError(f"malformed operator key {key} for arity {arity}, dim {dim}")
                key = tuple(tuple(a) for a in key)
                _add_into(clean, key, c)
            self.terms = clean
        self._hash = None

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, dim: int, arity: int) -> "PolyDiffOp":
        return cls(dim, arity, {}, _trusted=True)

    @classmethod
    def from_grouped(cls, dim: int, arity: int,
                     grouped: Iterable[Tuple[Polynomial, Sequence[MultiIndex]]]) -> "PolyDiffOp":
        """Build from (coefficient polynomial, slot multi-indices) pairs."""
        acc: Dict[Key, object] = {}
        for coeff, slots in grouped:
            if coeff.dim != dim:
                raise DimensionError("coefficient dimension does not match")
            if len(slots) != arity:
                raise ValueError(f"expected {arity} slots, got {len(slots)}")
            slots = tuple(tuple(s) for s in slots)
            for e, c in coeff.terms.items():
                _add_into(acc, (e,) + slots, c)
        return cls(dim, arity, acc, _trusted=True)

    @classmethod
    def function(cls, f: Polynomial) -> "PolyDiffOp":
        """The arity-0 operator given by the function ``f``."""
        return cls(f.dim, 0, {(e,): c for e, c in f.terms.items()}, _trusted=True)

    @classmethod
    def identity(cls, dim: int) -> "PolyDiffOp":
        z = (0,) * dim
        return cls(dim, 1, {(z, z): Rational(1)}, _trusted=True)

    @classmethod
    def vector_field(cls, coeffs: Sequence[Polynomial]) -> "PolyDiffOp":
        dim = coeffs[0].dim
        grouped = []
        for i, c in enumerate(coeffs):
            grouped.append((c, [tuple(1 if j == i else 0 for j in range(dim))]))
        return cls.from_grouped(dim, 1, grouped)

    # -- protocol ----------------------------------------------------------
    @property
    def grading(self) -> int:
        return self.arity - 1

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.dim == other.dim and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.arity, frozenset(self.terms.items())))
        return self._hash

    def _check(self, other: "PolyDiffOp", same_arity: bool = True):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if same_arity and self.arity != other.arity:
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            _add_into(acc, k, c)
        return PolyDiffOp(self.dim, self.arity, acc, _trusted=True)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "PolyDiffOp":
        if c == 0:
            return PolyDiffOp.zero(self.dim, self.arity)
        if c == 1:
            return self
        return PolyDiffOp(self.dim, self.arity, {k: v * c for k, v in self.terms.items()},
                          _trusted=True)

    __mul__ = scale
    __rmul__ = scale

    def grouped(self) -> Dict[Tuple[MultiIndex, ...], Polynomial]:
        """View as {slot multi-indices: coefficient polynomial}."""
        groups: Dict[Tuple[MultiIndex, ...], Dict[MultiIndex, object]] = {}
        for key, c in self.terms.items():
            groups.setdefault(key[1:], {})[key[0]] = c
        return {s: Polynomial(self.dim, t) for s, t in groups.items()}

    def max_order(self) -> int:
        return max((sum(sum(a) for a in k[1:]) for k in self.terms), default=0)

    def coefficient_degree(self) -> int:
        return max((sum(k[0]) for k in self.terms), default=-1)

    def __repr__(self):
        if not self.terms:
            return f"PolyDiffOp(dim={self.dim}, arity={self.arity}, 0)"
        parts = []
        for slots, coeff in sorted(self.grouped().items()):
            fs = "·".join(
                (f"∂{list(a)}f{j + 1}" if any(a) else f"f{j + 1}") for j, a in enumerate(slots)
            )
            parts.append(f"({coeff})" + ("·" + fs if fs else ""))
        return f"PolyDiffOp(dim={self.dim}, arity={self.arity}, " + " + ".join(parts) + ")"

    def permute_slots(self, perm: Sequence[int]) -> "PolyDiffOp":
        """Operator (g_1..g_n) ↦ self(g_{perm[0]}, ..., g_{perm[n-1]}) (0-based)."""
        n = self.arity
        inv = [0] * n
        for pos, src in enumerate(perm):
            inv[src] = pos
        acc: Dict[Key, object] = {}
        for key, c in self.terms.items():
            slots = key[1:]
            new = [None] * n
            for pos, src in enumerate(perm):
                new[src] = slots[pos]
            _add_into(acc, (key[0],) + tuple(new), c)
        return PolyDiffOp(self.dim, n, acc, _trusted=True)


def _check_dim(*ops: PolyDiffOp):
    dims = {op.dim for op in ops}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


# -- evaluation ----------------------------------------------------------------

def apply(op: PolyDiffOp, args: Sequence[Polynomial]) -> Polynomial:
    if len(args) != op.arity:
        raise ValueError(f"operator has arity {op.arity}, got {len(args)} arguments")
    for a in args:
        if a.dim != op.dim:
            raise DimensionError("argument dimension does not match")
    cache: Dict[Tuple[int, MultiIndex], Polynomial] = {}

    def deriv(j, alpha):
        key = (j, alpha)
        if key not in cache:
            cache[key] = args[j].diff_multi(alpha)
        return cache[key]

    total = Polynomial.zero(op.dim)
    for slots, coeff in op.grouped().items():
        prod = coeff
        for j, alpha in enumerate(slots):
            if not prod:
                break
            prod = prod * deriv(j, alpha)
        total = total + prod
    return total


def mult_op(dim: int) -> PolyDiffOp:
    z = (0,) * dim
    return PolyDiffOp(dim, 2, {(z, z, z): Rational(1)}, _trusted=True)


# -- structural pieces --------------------------------------------------------------

def _shift_in(x: MultiIndex, i: int, k: int = 1) -> MultiIndex:
    return x[:i] + (x[i] + k,) + x[i + 1:]


def total_derivative(op: PolyDiffOp, i: int) -> PolyDiffOp:
    """The operator (f_1..f_n) ↦ ∂_i (op(f_1..f_n)), by Leibniz."""
    acc: Dict[Key, object] = {}
    for key, c in op.terms.items():
        e = key[0]
        if e[i]:
            _add_into(acc, (e[:i] + (e[i] - 1,) + e[i + 1:],) + key[1:], c * e[i])
        for j in range(1, len(key)):
            new = key[:j] + (_shift_in(key[j], i),) + key[j + 1:]
            _add_into(acc, new, c)
    return PolyDiffOp(op.dim, op.arity, acc, _trusted=True)


def total_derivative_multi(op: PolyDiffOp, alpha: MultiIndex) -> PolyDiffOp:
    for i, k in enumerate(alpha):
        for _ in range(k):
            op = total_derivative(op, i)
    return op


def multiply_by(op: PolyDiffOp, f: Polynomial) -> PolyDiffOp:
    """The operator f · op(...)."""
    acc: Dict[Key, object] = {}
    for key, c in op.terms.items():
        e = key[0]
        for fe, fc in f.terms.items():
            _add_into(acc, (tuple(a + b for a, b in zip(e, fe)),) + key[1:], c * fc)
    return PolyDiffOp(op.dim, op.arity, acc, _trusted=True)


def insert_unit_slots(op: PolyDiffOp, positions: Sequence[int], new_arity: int) -> PolyDiffOp:
    """Re-embed op's slots at ``positions`` of a larger arity; other slots get f plainly."""
    z = (0,) * op.dim
    acc: Dict[Key, object] = {}
    for key, c in op.terms.items():
        slots = [z] * new_arity
        for src, pos in enumerate(positions):
            slots[pos] = key[1 + src]
        _add_into(acc, (key[0],) + tuple(slots), c)
    return PolyDiffOp(op.dim, new_arity, acc, _trusted=True)


def merge_adjacent(op: PolyDiffOp, i: int) -> PolyDiffOp:
    """(a_0..a_n) ↦ op(a_0, .., a_{i-1}·a_i, .., a_n); arity grows by one."""
    acc: Dict[Key, object] = {}
    for key, c in op.terms.items():
        alpha = key[i]  # slot i-1 in 0-based argument terms
        for beta, gamma, mult in index_splittings(alpha):
            new = key[:i] + (beta, gamma) + key[i + 1:]
            _add_into(acc, new, c * mult)
    return PolyDiffOp(op.dim, op.arity + 1, acc, _trusted=True)


# -- Hochschild calculus -----------------------------------------------------------

def hochschild_d(op: PolyDiffOp) -> PolyDiffOp:
    n = op.arity
    out = insert_unit_slots(op, range(1, n + 1), n + 1)
    for i in range(1, n + 1):
        piece = merge_adjacent(op, i)
        out = out + (piece if i % 2 == 0 else piece.scale(-1))
    last = insert_unit_slots(op, range(n), n + 1)
    return out + (last if (n + 1) % 2 == 0 else last.scale(-1))


def d_K(op: PolyDiffOp) -> PolyDiffOp:
    """Hochschild differential without its last term."""
    n = op.arity
    out = insert_unit_slots(op, range(1, n + 1), n + 1)
    for i in range(1, n + 1):
        piece = merge_adjacent(op, i)
        out = out + (piece if i % 2 == 0 else piece.scale(-1))
    return out


def homotopy_h(op: PolyDiffOp) -> PolyDiffOp:
    """ψ ↦ ψ(a_1, ..., a_{n-1}, 1)."""
    if op.arity < 1:
        raise ValueError("homotopy needs arity >= 1")
    acc: Dict[Key, object] = {}
    for key, c in op.terms.items():
        if not any(key[-1]):
            acc[key[:-1]] = c
    return PolyDiffOp(op.dim, op.arity - 1, acc, _trusted=True)


def compose_at(outer: PolyDiffOp, i: int, inner: PolyDiffOp) -> PolyDiffOp:
    """outer(a_1, .., a_i, inner(a_{i+1}..a_{i+q}), ..) with i counted from 0, no sign."""
    _check_dim(outer, inner)
    p, q = outer.arity, inner.arity
    if not 0 <= i < p:
        raise ValueError("insertion position out of range")
    derived: Dict[MultiIndex, list] = {}
    exp_sum: Dict[Tuple[MultiIndex, MultiIndex], MultiIndex] = {}
    acc: Dict[Key, object] = {}
    get = acc.get
    for key, c in outer.terms.items():
        alpha = key[1 + i]
        if alpha not in derived:
            derived[alpha] = [(k[0], k[1:], v) for k, v in total_derivative_multi(inner, alpha).terms.items()]
        e_out = key[0]
        before, after = key[1:1 + i], key[2 + i:]
        for e_in, slots, ic in derived[alpha]:
            e = exp_sum.get((e_out, e_in))
            if e is None:
                e = exp_sum[(e_out, e_in)] = tuple(a + b for a, b in zip(e_out, e_in))
            new = (e,) + before + slots + after
            acc[new] = get(new, 0) + c * ic
    # zeros are dropped once at the end rather than on every update
    acc = {k: v for k, v in acc.items() if v}
    return PolyDiffOp(outer.dim, p + q - 1, acc, _trusted=True)


def insertion(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    """Signed pre-Lie composition a ∘ b."""
    _check_dim(a, b)
    k1, k2 = a.arity - 1, b.arity - 1
    if a.arity == 0:
        # nothing to insert into
        return PolyDiffOp.zero(a.dim, max(b.arity - 1, 0))
    out = PolyDiffOp.zero(a.dim, a.arity + b.arity - 1)
    for i in range(a.arity):
        piece = compose_at(a, i, b)
        out = out + (piece.scale(-1) if ((k1 - i) * k2) % 2 else piece)
    return out


def gerstenhaber(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    _check_dim(a, b)
    if a.arity + b.arity == 0:
        return PolyDiffOp.zero(a.dim, 0)
    k1, k2 = a.arity - 1, b.arity - 1
    left = insertion(a, b)
    right = insertion(b, a)
    arity = a.arity + b.arity - 1
    if left.arity != arity:
        left = PolyDiffOp.zero(a.dim, arity)
    if right.arity != arity:
        right = PolyDiffOp.zero(a.dim, arity)
    return left - (right.scale(-1) if (k1 * k2) % 2 else right)


def cup(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    """(a·b)(f_1..f_{p+q}) = a(f_1..f_p) · b(f_{p+1}..f_{p+q})."""
    _check_dim(a, b)
    acc: Dict[Key, object] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            e = tuple(x + y for x, y in zip(ka[0], kb[0]))
            _add_into(acc, (e,) + ka[1:] + kb[1:], ca * cb)
    return PolyDiffOp(a.dim, a.arity + b.arity, acc, _trusted=True)


# -- HKR ------------------------------------------------------------------------

def _unit(dim: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(dim))


def alternated_operator(coeff: Polynomial, indices: Sequence[int], positions: Sequence[int],
                        arity: int) -> PolyDiffOp:
    """Σ_σ sgn σ · coeff · ∏_j ∂_{indices[σ(j)]} f_{positions[j]}; other slots plain."""
    dim = coeff.dim
    z = (0,) * dim
    acc: Dict[Key, object] = {}
    k = len(indices)
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        slots = [z] * arity
        for j, pos in enumerate(positions):
            slots[pos] = _unit(dim, indices[perm[j]])
        for e, c in coeff.terms.items():
            _add_into(acc, (e,) + tuple(slots), c * sign)
    return PolyDiffOp(dim, arity, acc, _trusted=True)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def hkr(gamma: PolyVector) -> PolyDiffOp:
    """1/k! Σ_σ sgn σ ∏ ξ_{σ(j)}(f_j) extended linearly from ∂_I components."""
    k = gamma.degree
    out = PolyDiffOp.zero(gamma.dim, k)
    for coeff, idx in gamma.decomposable_factors():
        out = out + alternated_operator(coeff, idx, range(k), k)
    return out.scale(Rational(1, factorial(k)))


# -- random generation ---------------------------------------------------------------

def random_op(dim: int, arity: int, seed, max_order: int = 2, max_poly_degree: int = 2,
              n_terms: int = 3) -> PolyDiffOp:
    """Pseudo-random operator with ``n_terms`` slot patterns."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    grouped = []
    for _ in range(n_terms):
        slots = []
        for _ in range(arity):
            order = rng.randint(0, max_order)
            alpha = [0] * dim
            for _ in range(order):
                alpha[rng.randrange(dim)] += 1
            slots.append(tuple(alpha))
        coeff = random_polynomial(dim, max_poly_degree, rng, density=0.4)
        grouped.append((coeff, slots))
    return PolyDiffOp.from_grouped(dim, arity, grouped)


# -- JSON ----------------------------------------------------------------------------

def op_to_json(op: PolyDiffOp) -> dict:
    terms = []
    for slots, coeff in sorted(op.grouped().items()):
        terms.append({"coeff": polynomial_to_json(coeff), "slots": [list(a) for a in slots]})
    return {"dim": op.dim, "arity": op.arity, "terms": terms}


def op_from_json(data: dict) -> PolyDiffOp:
    try:
        dim, arity = int(data["dim"]), int(data["arity"])
        grouped = []
        for t in data["terms"]:
            slots = [tuple(int(x) for x in a) for a in t["slots"]]
            if any(len(a) != dim for a in slots):
                raise ValueError("slot multi-index has the wrong length")
            grouped.append((polynomial_from_json(t["coeff"]), slots))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed operator JSON: {exc}") from exc
    return PolyDiffOp.from_grouped(dim, arity, grouped)
