"""Polyvector fields with polynomial coefficients.

A polyvector is stored as a superfunction: the component under the index
tuple ``(i1 < ... < ik)`` multiplies the odd monomial ``θ_i1 θ_i2 ... θ_ik``,
where ``θ_i`` stands for ``∂_i``.  Wedge is the product of superfunctions,
and the Schouten bracket and divergence are written with odd derivatives.

Conventions (fixed once, asserted in the tests):

* ``[P, Q] = Σ_j (P ∂⃖/∂θ_j)(∂_j Q) - (∂_j P)(∂⃗/∂θ_j Q)``.  On vector
  fields this is the Lie bracket and ``[ξ, f] = ξ(f)``.
* ``div P = Σ_j e^{-φ} ∂_j (e^φ · ∂⃗/∂θ_j P)`` for ``Ω = e^φ dx``.  This is
  the contraction route ``ι^{-1} d ι`` with ``ι_{X∧Y} = ι_X ι_Y``, and it is a
  graded derivation of the bracket: ``div[a,b] = [div a, b] + (-1)^{|a|}[a, div b]``
  with ``|a| = deg a - 1``.
"""

from __future__ import annotations

import random
from typing import Dict, Iterable, Mapping, Tuple

from .algebra import (
    DimensionError,
    Polynomial,
    polynomial_from_json,
    polynomial_to_json,
    random_polynomial,
)

Indices = Tuple[int, ...]


def merge_sign(a: Indices, b: Indices):
    """Sign and sorted union for θ_a θ_b, or (0, None) if they share an index."""
    if set(a) & set(b):
        return 0, None
    inversions = sum(1 for x in a for y in b if x > y)
    return (-1) ** inversions, tuple(sorted(a + b))


class PolyVector:
    """Sum of ``coeff · ∂_I`` over strictly increasing index tuples ``I``.

    Components of different lengths may coexist; :attr:`degree` is the
    common length and is only defined for homogeneous polyvectors (or 0).
    """

    __slots__ = ("dim", "components", "_degree")

    def __init__(self, dim: int, components: Mapping[Indices, Polynomial] | None = None,
                 degree: int | None = None):
        self.dim = dim
        clean: Dict[Indices, Polynomial] = {}
        for idx, p in (components or {}).items():
            idx = tuple(idx)
            if list(idx) != sorted(set(idx)) or any(not 0 <= i < dim for i in idx):
                raise ValueError(f"index tuple {idx} is not strictly increasing in [0, {dim})")
            if p.dim != dim:
                raise DimensionError(f"component dim {p.dim} != {dim}")
            if p:
                clean[idx] = clean[idx] + p if idx in clean else p
        self.components = {k: v for k, v in clean.items() if v}
        self._degree = degree

    @classmethod
    def function(cls, f: Polynomial) -> "PolyVector":
        return cls(f.dim, {(): f}, degree=0)

    @classmethod
    def vector_field(cls, coeffs: Iterable[Polynomial]) -> "PolyVector":
        coeffs = list(coeffs)
        dim = coeffs[0].dim
        return cls(dim, {(i,): c for i, c in enumerate(coeffs)}, degree=1)

    @classmethod
    def basis(cls, dim: int, indices: Indices, coeff: Polynomial | None = None) -> "PolyVector":
        """``coeff · ∂_{i1}∧...∧∂_{ik}`` for arbitrary (unsorted) indices."""
        coeff = coeff if coeff is not None else Polynomial.constant(dim, 1)
        sign, idx = 1, ()
        for i in indices:
            s, idx2 = merge_sign(idx, (i,))
            if not s:
                return cls(dim, {}, degree=len(indices))
            sign, idx = sign * s, idx2
        return cls(dim, {idx: coeff.scale(sign)}, degree=len(indices))

    @classmethod
    def zero(cls, dim: int, degree: int = 0) -> "PolyVector":
        return cls(dim, {}, degree=degree)

    @property
    def degree(self) -> int:
        lengths = {len(i) for i in self.components}
        if len(lengths) > 1:
            raise ValueError("polyvector is not homogeneous")
        if lengths:
            return lengths.pop()
        return self._degree if self._degree is not None else 0

    @property
    def grading(self) -> int:
        return self.degree - 1

    def is_zero(self) -> bool:
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyVector):
            return NotImplemented
        return self.dim == other.dim and self.components == other.components

    def __hash__(self):
        return hash((self.dim, frozenset(self.components.items())))

    def _check(self, other: "PolyVector"):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "PolyVector") -> "PolyVector":
        self._check(other)
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        deg = self._degree if self._degree is not None else other._degree
        return PolyVector(self.dim, out, degree=deg)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyVector":
        return PolyVector(self.dim, {k: v.scale(c) for k, v in self.components.items()},
                          degree=self._degree)

    def mul_function(self, f: Polynomial) -> "PolyVector":
        return PolyVector(self.dim, {k: v * f for k, v in self.components.items()},
                          degree=self._degree)

    def homogeneous_parts(self) -> Dict[int, "PolyVector"]:
        parts: Dict[int, Dict[Indices, Polynomial]] = {}
        for k, v in self.components.items():
            parts.setdefault(len(k), {})[k] = v
        return {d: PolyVector(self.dim, comp, degree=d) for d, comp in parts.items()}

    def coefficient_diff(self, j: int) -> "PolyVector":
        return PolyVector(self.dim, {k: v.diff(j) for k, v in self.components.items()},
                          degree=self._degree)

    def right_theta_derivative(self, j: int) -> "PolyVector":
        out = {}
        for idx, c in self.components.items():
            if j in idx:
                p = idx.index(j)
                sign = -1 if (len(idx) - 1 - p) % 2 else 1
                out[idx[:p] + idx[p + 1:]] = c.scale(sign)
        return PolyVector(self.dim, out, degree=max(self.degree - 1, 0))

    def left_theta_derivative(self, j: int) -> "PolyVector":
        out = {}
        for idx, c in self.components.items():
            if j in idx:
                p = idx.index(j)
                out[idx[:p] + idx[p + 1:]] = c.scale(-1 if p % 2 else 1)
        return PolyVector(self.dim, out, degree=max(self.degree - 1, 0))

    def decomposable_factors(self):
        """Yield (coefficient, index tuple) pairs; each is coeff·∂_{i1}∧...∧∂_{ik}."""
        for idx in sorted(self.components):
            yield self.components[idx], idx

    def __repr__(self):
        if not self.components:
            return f"PolyVector({self.dim}, 0)"
        parts = []
        for idx in sorted(self.components):
            d = "∧".join(f"∂{i}" for i in idx) or "1"
            parts.append(f"({self.components[idx]})·{d}")
        return f"PolyVector({self.dim}, " + " + ".join(parts) + ")"


def wedge(a: PolyVector, b: PolyVector) -> PolyVector:
    a._check(b)
    out: Dict[Indices, Polynomial] = {}
    for ia, ca in a.components.items():
        for ib, cb in b.components.items():
            sign, idx = merge_sign(ia, ib)
            if sign:
                term = (ca * cb).scale(sign)
                out[idx] = out[idx] + term if idx in out else term
    deg = None
    try:
        deg = a.degree + b.degree
    except ValueError:
        pass
    return PolyVector(a.dim, out, degree=deg)


def schouten_bracket(a: PolyVector, b: PolyVector) -> PolyVector:
    a._check(b)
    total = None
    for j in range(a.dim):
        t1 = wedge(a.right_theta_derivative(j), b.coefficient_diff(j))
        t2 = wedge(a.coefficient_diff(j), b.left_theta_derivative(j))
        piece = t1 - t2
        total = piece if total is None else total + piece
    deg = None
    try:
        deg = max(a.degree + b.degree - 1, 0)
    except ValueError:
        pass
    if total is None:
        return PolyVector(a.dim, {}, degree=deg)
    return PolyVector(a.dim, total.components, degree=deg)


# -- volume forms and divergence ---------------------------------------------

class VolumeForm:
    """``Ω = e^φ dx_1∧...∧dx_d`` with a polynomial log-density ``φ``."""

    __slots__ = ("dim", "log_density", "_grad")

    def __init__(self, dim: int, log_density: Polynomial | None = None):
        self.dim = dim
        self.log_density = log_density if log_density is not None else Polynomial.zero(dim)
        if self.log_density.dim != dim:
            raise DimensionError("log-density dimension does not match")
        self._grad = tuple(self.log_density.diff(i) for i in range(dim))

    @classmethod
    def standard(cls, dim: int) -> "VolumeForm":
        return cls(dim)

    def grad(self, i: int) -> Polynomial:
        return self._grad[i]

    def is_standard(self) -> bool:
        return self.log_density.is_zero()

    def __eq__(self, other):
        return (isinstance(other, VolumeForm) and self.dim == other.dim
                and self.log_density == other.log_density)

    def __hash__(self):
        return hash((self.dim, self.log_density))

    def __repr__(self):
        return f"VolumeForm({self.dim}, φ={self.log_density})"


def divergence(a: PolyVector, vol: VolumeForm) -> PolyVector:
    """Divergence with respect to ``vol``; the divergence of a function is 0."""
    if a.dim != vol.dim:
        raise DimensionError("volume form dimension does not match")
    deg = max(a.degree - 1, 0) if a.components or a._degree is not None else 0
    out = PolyVector(a.dim, {}, degree=deg)
    for j in range(a.dim):
        r = a.left_theta_derivative(j)
        if r.is_zero():
            continue
        out = out + r.coefficient_diff(j) + r.mul_function(vol.grad(j))
    return PolyVector(a.dim, out.components, degree=deg)


def check_poisson(gamma: PolyVector, vol: VolumeForm) -> dict:
    if gamma.degree != 2:
        raise ValueError(f"expected a bivector, got degree {gamma.degree}")
    return {
        "jacobi_ok": schouten_bracket(gamma, gamma).is_zero(),
        "div_free": divergence(gamma, vol).is_zero(),
    }


# -- u-graded sums -------------------------------------------------------------

class UPolyElement:
    """Finite sum ``Σ_k γ_k ⊗ u^k`` with ``deg u = 2``."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[int, PolyVector] | None = None):
        self.dim = dim
        clean = {}
        for k, pv in (terms or {}).items():
            if k < 0:
                raise ValueError("u-power must be non-negative")
            if pv.dim != dim:
                raise DimensionError("component dimension does not match")
            if not pv.is_zero():
                clean[k] = clean[k] + pv if k in clean else pv
        self.terms = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def single(cls, gamma: PolyVector, k: int = 0) -> "UPolyElement":
        return cls(gamma.dim, {k: gamma})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, UPolyElement) and self.dim == other.dim and self.terms == other.terms

    def __add__(self, other: "UPolyElement") -> "UPolyElement":
        if self.dim != other.dim:
            raise DimensionError("dimension mismatch")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return UPolyElement(self.dim, out)

    def scale(self, c) -> "UPolyElement":
        return UPolyElement(self.dim, {k: v.scale(c) for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def homogeneous_terms(self):
        """Yield (u_power, homogeneous polyvector) pairs in a fixed order."""
        for k in sorted(self.terms):
            parts = self.terms[k].homogeneous_parts()
            for deg in sorted(parts):
                yield k, parts[deg]

    def __repr__(self):
        return "UPolyElement(" + " + ".join(f"{v}⊗u^{k}" for k, v in sorted(self.terms.items())) + ")"


def d_div(e: UPolyElement, vol: VolumeForm) -> UPolyElement:
    if e.dim != vol.dim:
        raise DimensionError("volume form dimension does not match")
    return UPolyElement(e.dim, {k + 1: divergence(pv, vol) for k, pv in e.terms.items()})


def u_bracket(e1: UPolyElement, e2: UPolyElement) -> UPolyElement:
    if e1.dim != e2.dim:
        raise DimensionError("dimension mismatch")
    out = UPolyElement(e1.dim)
    for k1, a in e1.homogeneous_terms():
        for k2, b in e2.homogeneous_terms():
            out = out + UPolyElement(e1.dim, {k1 + k2: schouten_bracket(a, b)})
    return out


# -- random generators -----------------------------------------------------------

def random_polyvector(dim: int, degree: int, max_poly_degree: int, seed,
                      density: float = 0.5) -> PolyVector:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    from itertools import combinations
    comps = {}
    for idx in combinations(range(dim), degree):
        comps[idx] = random_polynomial(dim, max_poly_degree, rng, density=density)
    return PolyVector(dim, comps, degree=degree)


def random_volume(dim: int, max_degree: int, seed) -> VolumeForm:
    return VolumeForm(dim, random_polynomial(dim, max_degree, seed, density=0.6, max_coeff=3))


def theta(dim: int, k: int = 0) -> UPolyElement:
    """``(∂_1∧...∧∂_d) ⊗ u^k``, a convenient test input."""
    return UPolyElement.single(PolyVector.basis(dim, tuple(range(dim))), k)


# -- JSON ------------------------------------------------------------------

def polyvector_to_json(pv: PolyVector) -> dict:
    return {
        "dim": pv.dim,
        "degree": pv.degree,
        "components": [
            {"indices": list(idx), "poly": polynomial_to_json(pv.components[idx])}
            for idx in sorted(pv.components)
        ],
    }


def polyvector_from_json(data: dict) -> PolyVector:
    try:
        dim = int(data["dim"])
        comps = {}
        for c in data["components"]:
            idx = tuple(int(i) for i in c["indices"])
            comps[idx] = polynomial_from_json(c["poly"])
        degree = data.get("degree")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed polyvector JSON: {exc}") from exc
    pv = PolyVector(dim, comps, degree=degree)
    if degree is not None and pv.components and pv.degree != degree:
        raise ValueError("declared degree does not match the components")
    return pv


def upoly_to_json(e: UPolyElement) -> dict:
    return {"dim": e.dim,
            "u_terms": [{"u": k, "pv": polyvector_to_json(pv)} for k, pv in e.homogeneous_terms()]}


def upoly_from_json(data: dict) -> UPolyElement:
    try:
        dim = int(data["dim"])
        out = UPolyElement(dim)
        for t in data["u_terms"]:
            out = out + UPolyElement(dim, {int(t["u"]): polyvector_from_json(t["pv"])})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed u-polyvector JSON: {exc}") from exc
    return out


def volume_to_json(vol: VolumeForm) -> dict:
    return {"dim": vol.dim, "log_density": polynomial_to_json(vol.log_density)}


def volume_from_json(data: dict) -> VolumeForm:
    return VolumeForm(int(data["dim"]), polynomial_from_json(data["log_density"]))
