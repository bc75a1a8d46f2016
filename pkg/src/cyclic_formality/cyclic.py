"""Integral pairing, cyclic shift and the cyclic symmetrizer.

Everything "under the integral" is decided by a normal form: a density
``Σ c x^e ∂^{α_1}f_1 ··· ∂^{α_N}f_N · e^φ`` is integrated by parts until
``f_1`` carries no derivatives.  Moving ``∂_i`` off ``f_1`` replaces the rest
``H`` of the density by ``-(∂_i H + (∂_i φ) H)``.  Test functions are
compactly supported, so the resulting coefficient operator is unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .algebra import DimensionError, MultiIndex, Rational
from .dpoly import (
    PolyDiffOp,
    _add_into,
    d_K,
    hochschild_d,
    insert_unit_slots,
    multiply_by,
    total_derivative,
)
from .tpoly import VolumeForm


@dataclass(frozen=True)
class DensityNormalForm:
    """``∫ f_1 · rest(f_2, ..., f_N) · Ω`` with ``rest`` of arity ``N - 1``."""

    n_slots: int
    vol: VolumeForm
    rest: PolyDiffOp

    @property
    def dim(self) -> int:
        return self.rest.dim

    def is_zero(self) -> bool:
        return self.rest.is_zero()

    def __sub__(self, other: "DensityNormalForm") -> "DensityNormalForm":
        if self.n_slots != other.n_slots:
            raise ValueError("densities have different numbers of slots")
        return DensityNormalForm(self.n_slots, self.vol, self.rest - other.rest)

    def __add__(self, other: "DensityNormalForm") -> "DensityNormalForm":
        if self.n_slots != other.n_slots:
            raise ValueError("densities have different numbers of slots")
        return DensityNormalForm(self.n_slots, self.vol, self.rest + other.rest)

    def as_operator(self) -> PolyDiffOp:
        """The same density written as an operator of arity ``n_slots`` (slot 1 plain)."""
        return insert_unit_slots(self.rest, range(1, self.n_slots), self.n_slots)


def _adjoint_step(op: PolyDiffOp, i: int, vol: VolumeForm) -> PolyDiffOp:
    # H ↦ -(∂_i H + (∂_i φ) H)
    out = total_derivative(op, i)
    g = vol.grad(i)
    if g:
        out = out + multiply_by(op, g)
    return out.scale(-1)


def density_normal_form(op: PolyDiffOp, vol: VolumeForm) -> DensityNormalForm:
    """Normal form of ``∫ op(f_1, ..., f_N) Ω`` with ``f_1`` derivative-free."""
    if op.dim != vol.dim:
        raise DimensionError("volume form dimension does not match")
    n = op.arity
    if n == 0:
        raise ValueError("a density needs at least one test function")
    by_alpha: Dict[MultiIndex, Dict] = {}
    for key, c in op.terms.items():
        bucket = by_alpha.setdefault(key[1], {})
        _add_into(bucket, (key[0],) + key[2:], c)
    result = PolyDiffOp.zero(op.dim, n - 1)
    for alpha, terms in by_alpha.items():
        rest = PolyDiffOp(op.dim, n - 1, terms, _trusted=True)
        for i, k in enumerate(alpha):
            for _ in range(k):
                rest = _adjoint_step(rest, i, vol)
        result = result + rest
    return DensityNormalForm(n, vol, result)


def pairing(op: PolyDiffOp, vol: VolumeForm) -> DensityNormalForm:
    """Normal form of ``∫ op(f_1..f_n) · f_{n+1} · Ω``."""
    n = op.arity
    return density_normal_form(insert_unit_slots(op, range(n), n + 1), vol)


def cyclic_shift(op: PolyDiffOp, vol: VolumeForm) -> PolyDiffOp:
    """``C ψ`` with ``∫ψ(f_1..f_n) f_{n+1} Ω = (-1)^n ∫ Cψ(f_2..f_{n+1}) f_1 Ω``."""
    n = op.arity
    rest = pairing(op, vol).rest
    return rest.scale(-1) if n % 2 else rest


def cyclic_power(op: PolyDiffOp, vol: VolumeForm, k: int) -> PolyDiffOp:
    for _ in range(k):
        op = cyclic_shift(op, vol)
    return op


def sigma(op: PolyDiffOp, vol: VolumeForm) -> PolyDiffOp:
    """``Σ = 1 + C + ... + C^{n}`` on arity ``n``."""
    total = op
    current = op
    for _ in range(op.arity):
        current = cyclic_shift(current, vol)
        total = total + current
    return total


def sigma_projector(op: PolyDiffOp, vol: VolumeForm) -> PolyDiffOp:
    return sigma(op, vol).scale(Rational(1, op.arity + 1))


def is_cyclic(op: PolyDiffOp, vol: VolumeForm) -> bool:
    return cyclic_shift(op, vol) == op


def bicomplex_square_check(op: PolyDiffOp, vol: VolumeForm) -> dict:
    one_minus_c = op - cyclic_shift(op, vol)
    d_op = hochschild_d(op)
    star1 = (d_op - cyclic_shift(d_op, vol)) == d_K(one_minus_c)
    star2 = hochschild_d(sigma(op, vol)) == sigma(d_K(op), vol)
    return {"star1_ok": star1, "star2_ok": star2}


# -- the Σ-defect ------------------------------------------------------------------

def window_operator(op: PolyDiffOp, start: int, total: int) -> PolyDiffOp:
    """``ψ(f_{s}, f_{s+1}, ...) · (remaining f's)`` on ``total`` slots, indices cyclic.

    ``start`` is 0-based; ψ reads ``arity`` consecutive slots from there.
    """
    positions = [(start + j) % total for j in range(op.arity)]
    return insert_unit_slots(op, positions, total)


def defect_sign(k: int, s: int) -> int:
    """Sign of the window starting at 0-based slot ``s`` in the Σ-defect sum."""
    return -1 if ((k - 1) * s) % 2 else 1


def sigma_defect(op: PolyDiffOp, vol: VolumeForm | None = None) -> PolyDiffOp:
    """The explicit arity-(n+2) density φ whose integral is the Σ-defect.

    ``φ = Σ_{s=0}^{n+1} ε^s · ψ(window starting at f_{s+1}) · (other two f's)``
    with ``ε = (-1)^{n-1}``; this pattern is pinned by exhaustive search in
    the tests.
    """
    n = op.arity
    if n < 1:
        raise ValueError("Σ-defect needs arity >= 1")
    total = n + 2
    out = PolyDiffOp.zero(op.dim, total)
    for s in range(total):
        piece = window_operator(op, s, total)
        out = out + piece.scale(defect_sign(n, s))
    return out


def sigma_defect_lhs(op: PolyDiffOp, vol: VolumeForm) -> DensityNormalForm:
    """Normal form of ``∫ f_{n+2} · (d Σψ - Σ dψ)(f_1..f_{n+1}) Ω``.

    It equals ``(-1)^n`` times the normal form of :func:`sigma_defect`.
    """
    diff = hochschild_d(sigma(op, vol)) - sigma(hochschild_d(op), vol)
    return pairing(diff, vol)


def sigma_defect_holds(op: PolyDiffOp, vol: VolumeForm) -> bool:
    n = op.arity
    lhs = sigma_defect_lhs(op, vol)
    rhs = density_normal_form(sigma_defect(op), vol)
    sign = -1 if n % 2 else 1
    return (lhs.rest - rhs.rest.scale(sign)).is_zero()
