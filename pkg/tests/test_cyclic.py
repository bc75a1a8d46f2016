import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cyclic_formality.algebra import Polynomial, parity_sign
from cyclic_formality.cyclic import (
    bicomplex_square_check,
    cyclic_power,
    cyclic_shift,
    density_normal_form,
    is_cyclic,
    pairing,
    sigma,
    sigma_defect,
    sigma_defect_holds,
    sigma_defect_lhs,
    sigma_projector,
)
from cyclic_formality.dpoly import PolyDiffOp, gerstenhaber, hochschild_d, random_op
from cyclic_formality.tpoly import VolumeForm, random_volume

from oracle import Quadrature, apply_op, poly_expr, random_test_polys

seeds = st.integers(0, 10**6)


def rop(dim, arity, rng):
    return random_op(dim, arity, rng, max_order=2, max_poly_degree=2)


def linear_volume(dim, rng):
    x = [Polynomial.variable(dim, i) for i in range(dim)]
    phi = Polynomial.zero(dim)
    for xi in x:
        phi = phi + xi.scale(Fraction(rng.choice((-1, 0, 1)) * rng.choice((1, 2)), 4))
    return VolumeForm(dim, phi)


@pytest.mark.parametrize("dim,arity,seed", [(1, 1, 0), (1, 2, 1), (1, 3, 2), (2, 1, 3), (2, 2, 4)])
def test_cyclic_shift_against_quadrature(dim, arity, seed):
    rng = random.Random(seed)
    quad = Quadrature(dim, nodes=40 if dim == 1 else 30)
    vol = linear_volume(dim, rng)
    phi = poly_expr(vol.log_density, quad.xs)
    op = rop(dim, arity, rng)
    g = quad.gaussian(arity + 1)
    fs = [p * g for p in random_test_polys(dim, arity + 1, rng)]
    lhs = quad.integrate(apply_op(op, fs[:arity], quad.xs) * fs[arity], phi)
    shifted = cyclic_shift(op, vol)
    rhs = parity_sign(arity) * quad.integrate(apply_op(shifted, fs[1:], quad.xs) * fs[0], phi)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)
    assert abs(lhs) > 1e-6


@pytest.mark.parametrize("dim,arity,seed", [(1, 2, 5), (1, 3, 6), (2, 2, 7)])
def test_density_normal_form_against_quadrature(dim, arity, seed):
    rng = random.Random(seed)
    quad = Quadrature(dim, nodes=40 if dim == 1 else 30)
    vol = linear_volume(dim, rng)
    phi = poly_expr(vol.log_density, quad.xs)
    op = rop(dim, arity, rng)
    g = quad.gaussian(arity)
    fs = [p * g for p in random_test_polys(dim, arity, rng)]
    nf = density_normal_form(op, vol)
    lhs = quad.integrate(apply_op(op, fs, quad.xs), phi)
    rhs = quad.integrate(fs[0] * apply_op(nf.rest, fs[1:], quad.xs), phi)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)
    # f_1 carries no derivative in the normal form
    assert all(not any(k[1]) for k in nf.as_operator().terms)


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_shift_has_period_arity_plus_one(dim, arity, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 2, rng)
    op = rop(dim, arity, rng)
    assert cyclic_power(op, vol, arity + 1) == op


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_sigma_is_killed_by_one_minus_shift(dim, arity, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 2, rng)
    op = rop(dim, arity, rng)
    s = sigma(op, vol)
    assert (s - cyclic_shift(s, vol)).is_zero()
    assert sigma(op - cyclic_shift(op, vol), vol).is_zero()


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_projector(dim, arity, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 1, rng)
    op = rop(dim, arity, rng)
    p = sigma_projector(op, vol)
    assert is_cyclic(p, vol)
    assert sigma_projector(p, vol) == p


@given(st.integers(1, 2), seeds)
def test_cyclic_cochains_closed_under_d_and_bracket(dim, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 1, rng)
    a = sigma(rop(dim, rng.randint(1, 2), rng), vol)
    b = sigma(rop(dim, rng.randint(1, 2), rng), vol)
    assert is_cyclic(hochschild_d(a), vol)
    assert is_cyclic(gerstenhaber(a, b), vol)


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_bicomplex_squares_commute(dim, arity, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 2, rng)
    assert bicomplex_square_check(rop(dim, arity, rng), vol) == {"star1_ok": True, "star2_ok": True}


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_sigma_defect_identity(dim, arity, seed):
    rng = random.Random(seed)
    vol = random_volume(dim, 2, rng)
    assert sigma_defect_holds(rop(dim, arity, rng), vol)


def test_sigma_defect_prefactor_is_pinned():
    # the opposite global sign fails on a generic operator
    rng = random.Random(11)
    vol = random_volume(2, 2, rng)
    op = rop(2, 2, rng)
    lhs = sigma_defect_lhs(op, vol).rest
    rhs = density_normal_form(sigma_defect(op), vol).rest
    assert lhs == rhs
    assert lhs != rhs.scale(-1)


def test_vector_field_shift():
    # ∫ξ(f)g = -∫f(ξ(g) + div(ξ)g), so C(ξ) = ξ + div ξ
    x = Polynomial.variable(1, 0)
    xi = PolyDiffOp.vector_field([x])
    shifted = cyclic_shift(xi, VolumeForm.standard(1))
    assert shifted.terms == {((1,), (1,)): 1, ((0,), (0,)): 1}


def test_errors():
    vol = VolumeForm.standard(2)
    with pytest.raises(ValueError):
        density_normal_form(PolyDiffOp.zero(2, 0), vol)
    with pytest.raises(ValueError):
        pairing(PolyDiffOp.zero(3, 1), vol)
    with pytest.raises(ValueError):
        sigma_defect(PolyDiffOp.zero(2, 0))
