import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from cyclic_formality.algebra import Polynomial, parity_sign, random_polynomial
from cyclic_formality.dpoly import (
    PolyDiffOp,
    apply,
    compose_at,
    cup,
    d_K,
    gerstenhaber,
    hkr,
    hochschild_d,
    homotopy_h,
    mult_op,
    op_from_json,
    op_to_json,
    random_op,
)
from cyclic_formality.tpoly import PolyVector, random_polyvector, schouten_bracket

from oracle import apply_op, hkr_apply, poly_expr, random_test_polys, symbols

seeds = st.integers(0, 10**6)


def rop(dim, arity, rng, order=2):
    return random_op(dim, arity, rng, max_order=order, max_poly_degree=2)


def same_action(a, b, dim, rng, n_trials=1):
    """Compare two operators on random sympy polynomials."""
    xs = symbols(dim)
    for _ in range(n_trials):
        fs = random_test_polys(dim, a.arity, rng, 3)
        if sp.expand(apply_op(a, fs, xs) - b(fs, xs)) != 0:
            return False
    return True


@given(st.integers(1, 3), st.integers(0, 3), seeds)
def test_apply_matches_reference(dim, arity, seed):
    rng = random.Random(seed)
    op = rop(dim, arity, rng)
    args = [random_polynomial(dim, 3, rng) for _ in range(arity)]
    xs = symbols(dim)
    got = poly_expr(apply(op, args), xs)
    assert sp.expand(got - apply_op(op, [poly_expr(a, xs) for a in args], xs)) == 0


@given(st.integers(1, 2), st.integers(0, 3), seeds)
def test_hochschild_differential_matches_reference(dim, arity, seed):
    rng = random.Random(seed)
    op = rop(dim, arity, rng)

    def literal(fs, xs):
        n = op.arity
        out = fs[0] * apply_op(op, fs[1:], xs)
        for i in range(1, n + 1):
            merged = fs[:i - 1] + [fs[i - 1] * fs[i]] + fs[i + 1:]
            out += parity_sign(i) * apply_op(op, merged, xs)
        out += parity_sign(n + 1) * apply_op(op, fs[:n], xs) * fs[n]
        return out

    assert same_action(hochschild_d(op), literal, dim, rng)


@given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 2), seeds)
def test_compose_at_matches_reference(dim, p, q, seed):
    rng = random.Random(seed)
    outer, inner = rop(dim, p, rng), rop(dim, q, rng)
    i = rng.randrange(p)

    def literal(fs, xs):
        inside = apply_op(inner, fs[i:i + q], xs)
        return apply_op(outer, fs[:i] + [inside] + fs[i + q:], xs)

    assert same_action(compose_at(outer, i, inner), literal, dim, rng)


@given(st.integers(1, 3), st.integers(0, 4), seeds)
def test_d_squares_to_zero(dim, arity, seed):
    op = rop(dim, arity, random.Random(seed))
    assert hochschild_d(hochschild_d(op)).is_zero()


@given(st.integers(1, 3), st.integers(0, 4), seeds)
def test_d_is_bracket_with_product(dim, arity, seed):
    op = rop(dim, arity, random.Random(seed))
    assert hochschild_d(op) == gerstenhaber(mult_op(dim), op)


def test_product_is_maurer_cartan():
    for dim in (1, 2, 3):
        assert gerstenhaber(mult_op(dim), mult_op(dim)).is_zero()


@given(st.integers(1, 2), seeds)
def test_gerstenhaber_antisymmetry_and_jacobi(dim, seed):
    rng = random.Random(seed)
    # at most one function among the arguments, so every bracket is defined
    arities = [rng.randint(0, 2), rng.randint(1, 2), rng.randint(1, 2)]
    rng.shuffle(arities)
    a, b, c = (rop(dim, n, rng, 1) for n in arities)
    ka, kb = a.arity - 1, b.arity - 1
    assert gerstenhaber(a, b) == gerstenhaber(b, a).scale(-parity_sign(ka * kb))
    lhs = gerstenhaber(a, gerstenhaber(b, c))
    rhs = gerstenhaber(gerstenhaber(a, b), c) + gerstenhaber(b, gerstenhaber(a, c)).scale(parity_sign(ka * kb))
    assert lhs == rhs


@given(st.integers(1, 2), seeds)
def test_d_is_derivation_of_bracket(dim, seed):
    rng = random.Random(seed)
    a, b = rop(dim, rng.randint(0, 3), rng), rop(dim, rng.randint(1, 3), rng)
    ka = a.arity - 1
    lhs = hochschild_d(gerstenhaber(a, b))
    rhs = gerstenhaber(hochschild_d(a), b) + gerstenhaber(a, hochschild_d(b)).scale(parity_sign(ka))
    assert lhs == rhs


@given(st.integers(1, 2), seeds)
def test_d_is_derivation_of_cup(dim, seed):
    rng = random.Random(seed)
    a, b = rop(dim, rng.randint(0, 2), rng), rop(dim, rng.randint(0, 2), rng)
    lhs = hochschild_d(cup(a, b))
    rhs = cup(hochschild_d(a), b) + cup(a, hochschild_d(b)).scale(parity_sign(a.arity))
    assert lhs == rhs


@given(st.integers(1, 3), st.integers(0, 3), seeds)
def test_hkr_matches_reference_and_is_cocycle(dim, degree, seed):
    degree = min(degree, dim)
    rng = random.Random(seed)
    gamma = random_polyvector(dim, degree, 2, rng)
    op = hkr(gamma)
    assert hochschild_d(op).is_zero()
    assert same_action(op, lambda fs, xs: hkr_apply(gamma, fs, xs), dim, rng)


@given(seeds)
def test_hkr_intertwines_brackets_on_vector_fields(seed):
    rng = random.Random(seed)
    a, b = random_polyvector(2, 1, 2, rng), random_polyvector(2, 1, 2, rng)
    assert gerstenhaber(hkr(a), hkr(b)) == hkr(schouten_bracket(a, b))


def test_hkr_of_standard_bivector():
    op = hkr(PolyVector.basis(2, (0, 1)))
    half = Fraction(1, 2)
    assert op.terms == {((0, 0), (1, 0), (0, 1)): half, ((0, 0), (0, 1), (1, 0)): -half}


@given(st.integers(1, 3), st.integers(0, 4), seeds)
def test_d_K_squares_to_zero(dim, arity, seed):
    op = rop(dim, arity, random.Random(seed))
    assert d_K(d_K(op)).is_zero()


@given(st.integers(1, 3), st.integers(0, 4), seeds)
def test_contracting_homotopy(dim, arity, seed):
    op = rop(dim, arity, random.Random(seed))
    if arity == 0:
        assert homotopy_h(d_K(op)) == op
    else:
        assert homotopy_h(d_K(op)) - d_K(homotopy_h(op)) == op.scale(parity_sign(arity))


@given(st.integers(1, 3), st.integers(0, 4), seeds)
def test_json_round_trip(dim, arity, seed):
    op = rop(dim, arity, random.Random(seed))
    assert op_from_json(op_to_json(op)) == op


def test_permute_slots():
    x = Polynomial.variable(2, 0)
    op = PolyDiffOp.from_grouped(2, 2, [(x, [(1, 0), (0, 0)])])
    swapped = op.permute_slots([1, 0])
    assert swapped.terms == {((1, 0), (0, 0), (1, 0)): 1}


def test_errors():
    with pytest.raises(ValueError):
        apply(mult_op(2), [Polynomial.variable(2, 0)])
    with pytest.raises(ValueError):
        homotopy_h(PolyDiffOp.function(Polynomial.variable(2, 0)))
    with pytest.raises(ValueError):
        op_from_json({"dim": 2, "arity": 1, "terms": [{"coeff": {"dim": 2, "terms": []}, "slots": [[1]]}]})
    with pytest.raises(ValueError):
        compose_at(mult_op(2), 2, mult_op(2))
