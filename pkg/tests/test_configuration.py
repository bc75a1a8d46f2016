import math

import numpy as np
import pytest

from cyclic_formality.formality.configuration import (
    ConfigBatch,
    angle_jacobian,
    coordinates,
    harmonic_angle,
    orientation_sign,
    sample_configuration,
    sample_configurations,
)


def test_harmonic_angle_values():
    assert harmonic_angle(1j, 1) == pytest.approx(-math.pi / 2)
    assert harmonic_angle(1j, -1) == pytest.approx(math.pi / 2)
    # directly below the source the angle is π; far away along the line it tends to 0
    assert abs(harmonic_angle(1j, 0)) == pytest.approx(math.pi)
    assert harmonic_angle(1j, 1e9) == pytest.approx(0, abs=1e-8)
    assert harmonic_angle(1j, -1e9) == pytest.approx(0, abs=1e-8)
    # the angle towards a point of the line is the hyperbolic one, so it is
    # invariant under z ↦ az + b
    p, q = 0.3 + 0.7j, -1.2
    assert harmonic_angle(3 * p + 2, 3 * q + 2) == pytest.approx(harmonic_angle(p, q))


def test_harmonic_angle_errors():
    with pytest.raises(ValueError):
        harmonic_angle(1j, 1j)
    with pytest.raises(ValueError):
        harmonic_angle(1 + 0j, 2)


@pytest.mark.parametrize("n,m", [(1, 0), (1, 1), (1, 3), (2, 0), (2, 1), (2, 2), (2, 3), (3, 1)])
def test_coordinates_dimension(n, m):
    if 2 * n + m < 2:
        pytest.skip("no configuration space")
    assert len(coordinates(n, m)) == 2 * n + m - 2
    assert orientation_sign(n, m) in (1, -1)


def test_coordinates_errors():
    with pytest.raises(ValueError):
        coordinates(0, 1)


def _perturbed(batch, coord, h):
    p, q = batch.p.copy(), batch.q.copy()
    t = None if batch.t is None else batch.t.copy()
    kind, i = coord
    if kind == "x":
        p[:, i] += h
    elif kind == "y":
        p[:, i] += 1j * h
    elif kind == "t":
        t = t + h
        p[:, 0] = np.exp(1j * t)
    else:
        q[:, i] += h
    return ConfigBatch(batch.n, batch.m, p, q, t, batch.density)


def _angles(batch, edges):
    out = np.zeros((batch.size, len(edges)))
    for row in range(batch.size):
        for e, (s, tgt) in enumerate(edges):
            z = batch.p[row, tgt - 1] if tgt > 0 else complex(batch.q[row, -tgt - 1])
            out[row, e] = harmonic_angle(complex(batch.p[row, s - 1]), z)
    return out


@pytest.mark.parametrize("n,m,edges", [
    (1, 3, [(1, -1), (1, -2), (1, -3)]),
    (1, 1, [(1, -1)]),
    (2, 2, [(1, -1), (1, 2), (2, -1), (2, -2)]),
    (2, 1, [(1, 2), (2, -1), (2, 1)]),
    (2, 0, [(1, 2), (2, 1)]),
])
def test_jacobian_matches_finite_differences(n, m, edges):
    rng = np.random.default_rng(5)
    batch = sample_configurations(n, m, rng, 60)
    # stay away from the line so the difference quotient is accurate
    keep = np.all(batch.p.imag > 0.05, axis=1) & np.all(np.abs(batch.p) < 20, axis=1)
    pts = np.concatenate([batch.p, batch.q.astype(complex)], axis=1)
    for a in range(pts.shape[1]):
        for b in range(a + 1, pts.shape[1]):
            keep &= np.abs(pts[:, a] - pts[:, b]) > 0.05
    batch = ConfigBatch(n, m, batch.p[keep], batch.q[keep],
                        None if batch.t is None else batch.t[keep], batch.density[keep])
    jac = angle_jacobian(batch, edges)
    h = 1e-6
    for c, coord in enumerate(coordinates(n, m)):
        up = _angles(_perturbed(batch, coord, h), edges)
        down = _angles(_perturbed(batch, coord, -h), edges)
        diff = np.angle(np.exp(1j * (up - down))) / (2 * h)
        np.testing.assert_allclose(jac[:, :, c], diff, rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("n,m", [(2, 0), (1, 2), (1, 3), (2, 1)])
def test_sampling_density_is_normalised(n, m):
    # E[1_A / density] estimates the coordinate volume of A
    rng = np.random.default_rng(1)
    batch = sample_configurations(n, m, rng, 400_000)
    if n * 2 + m - 2 == 0:
        pytest.skip("zero-dimensional")
    z = batch.p[:, -1]
    inside = (np.abs(z.real) < 1) & (z.imag < 1)
    if m == 3:
        inside &= (batch.q[:, 1] > 0) & (batch.q[:, 1] < 1)
    vals = inside / batch.density
    mean, se = vals.mean(), vals.std() / math.sqrt(len(vals))
    target = 2.0 if (n, m) != (2, 1) else 2.0 * math.pi
    assert abs(mean - target) < 4 * se + 1e-3


def test_gauge():
    rng = np.random.default_rng(0)
    b = sample_configurations(1, 3, rng, 100)
    assert np.all(b.q[:, 0] == 0) and np.all(b.q[:, 2] == 1)
    assert np.all(np.diff(b.q, axis=1) > 0)
    assert np.all(b.p.imag > 0)
    b = sample_configurations(1, 1, rng, 100)
    np.testing.assert_allclose(np.abs(b.p[:, 0]), 1.0)
    b = sample_configurations(2, 0, rng, 100)
    assert np.all(b.p[:, 0] == 1j)
    point, factor = sample_configuration(2, 2, rng)
    assert len(point.p) == 2 and len(point.q) == 2 and factor > 0
