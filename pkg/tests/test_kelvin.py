import numpy as np
import pytest

import rieszlab as rl
from rieszlab import (
    Ball,
    BallComplement,
    CenterCharged,
    CenterInversion,
    DiscreteMeasure,
    HalfSpace,
    Inversion,
    KernelSpec,
    SphereShell,
    UnionShape,
    cross_energy,
    dirac,
    invert_point,
    invert_points,
    invert_shape,
    kelvin_transform,
    verify_potential_covariance,
)

ORIGIN = np.zeros(3)


def random_measure(rng, k, signed=False, shift=0.0):
    pts = rng.normal(size=(k, 3)) * 1.5 + shift
    w = rng.random(k) + 0.1
    if signed:
        w *= rng.choice([-1.0, 1.0], size=k)
    return DiscreteMeasure(pts, w, signed=signed)


def test_invert_point_example():
    inv = Inversion(ORIGIN)
    assert np.allclose(invert_point(inv, [2.0, 0.0, 0.0]), [0.5, 0.0, 0.0])
    # unit sphere points are fixed
    assert np.allclose(invert_point(inv, [0.0, 1.0, 0.0]), [0.0, 1.0, 0.0])


def test_inversion_is_involutive():
    rng = np.random.default_rng(1)
    inv = Inversion(rng.normal(size=3))
    pts = rng.normal(size=(40, 3)) * 3.0
    back = invert_points(inv, invert_points(inv, pts))
    assert np.max(np.abs(back - pts)) < 1e-12 * np.max(np.abs(pts))


def test_inversion_distance_identity():
    """|x* - z*| = |x - z| / (|x - y| |z - y|)."""
    rng = np.random.default_rng(2)
    y = rng.normal(size=3)
    inv = Inversion(y)
    for _ in range(20):
        x, z = rng.normal(size=(2, 3)) * 2.0
        lhs = np.linalg.norm(invert_point(inv, x) - invert_point(inv, z))
        rhs = np.linalg.norm(x - z) / (
            np.linalg.norm(x - y) * np.linalg.norm(z - y)
        )
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_invert_at_pole_raises():
    inv = Inversion(np.array([1.0, 2.0, 3.0]))
    with pytest.raises(CenterInversion):
        invert_point(inv, [1.0, 2.0, 3.0])


def test_kelvin_weight_law(spec):
    inv = Inversion(ORIGIN)
    mu = dirac([2.0, 0.0, 0.0], 1.0)
    mu_star = kelvin_transform(inv, spec, mu)
    assert np.allclose(mu_star.points, [[0.5, 0.0, 0.0]])
    # alpha=2, n=3: weights scale by r^(alpha-n) = 1/r
    assert mu_star.weights[0] == pytest.approx(0.5)


def test_kelvin_transform_is_involutive(spec):
    rng = np.random.default_rng(3)
    inv = Inversion(rng.normal(size=3) * 0.1)
    mu = random_measure(rng, 7, signed=True, shift=4.0)
    back = kelvin_transform(inv, spec, kelvin_transform(inv, spec, mu))
    assert np.max(np.abs(back.points - mu.points)) < 1e-12 * 4
    assert np.max(np.abs(back.weights - mu.weights)) < 1e-12


def test_kelvin_rejects_charged_pole(spec):
    inv = Inversion(ORIGIN)
    with pytest.raises(CenterCharged):
        kelvin_transform(inv, spec, dirac(ORIGIN))


def test_kelvin_mass_equals_potential_at_pole(spec):
    rng = np.random.default_rng(4)
    y = np.array([0.2, -0.1, 0.3])
    inv = Inversion(y)
    mu = random_measure(rng, 6, shift=3.0)
    mu_star = kelvin_transform(inv, spec, mu)
    assert mu_star.total_mass == pytest.approx(
        rl.potential(spec, mu, y), rel=1e-13
    )


def test_kelvin_energy_invariance():
    for alpha in (2.0, 1.3):
        s = KernelSpec(alpha, 3)
        rng = np.random.default_rng(5)
        inv = Inversion(rng.normal(size=3) * 0.2)
        mu = random_measure(rng, 5, shift=3.0)
        nu = random_measure(rng, 4, signed=True, shift=-3.0)
        lhs = cross_energy(
            s, kelvin_transform(inv, s, mu), kelvin_transform(inv, s, nu)
        )
        rhs = cross_energy(s, mu, nu)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_potential_covariance(spec):
    rng = np.random.default_rng(6)
    inv = Inversion(np.array([0.5, 0.5, 0.5]))
    nu = random_measure(rng, 8, shift=4.0)
    samples = rng.normal(size=(30, 3)) * 2.0 - 4.0
    assert verify_potential_covariance(inv, spec, nu, samples) < 1e-12


def test_invert_shape_exterior_ball():
    star = invert_shape([2.0, 0.0, 0.0], Ball(ORIGIN, 1.0))
    assert isinstance(star, Ball)
    assert np.allclose(star.center, [4.0 / 3.0, 0.0, 0.0])
    assert star.radius == pytest.approx(1.0 / 3.0)


def test_invert_shape_ball_containing_pole_swaps():
    star = invert_shape(ORIGIN, Ball(ORIGIN, 1.0))
    assert isinstance(star, BallComplement)
    assert star.radius == pytest.approx(1.0)


def test_invert_shape_complement_about_interior_point():
    star = invert_shape(ORIGIN, BallComplement(ORIGIN, 1.0))
    assert isinstance(star, Ball)
    assert np.allclose(star.center, ORIGIN)
    assert star.radius == pytest.approx(1.0)


def test_invert_shape_half_space():
    star = invert_shape(ORIGIN, HalfSpace([1.0, 0.0, 0.0], 1.0))
    assert isinstance(star, Ball)
    assert np.allclose(star.center, [0.5, 0.0, 0.0])
    assert star.radius == pytest.approx(0.5)


def test_invert_shape_half_space_pole_inside():
    star = invert_shape([3.0, 0.0, 0.0], HalfSpace([1.0, 0.0, 0.0], 1.0))
    assert isinstance(star, BallComplement)


def test_invert_shape_sphere_through_pole_raises():
    with pytest.raises(CenterInversion):
        invert_shape([1.0, 0.0, 0.0], Ball(ORIGIN, 1.0))


def test_invert_shape_union_maps_parts():
    u = UnionShape([Ball(ORIGIN, 1.0), Ball([5.0, 0.0, 0.0], 1.0)])
    star = invert_shape([0.0, 0.0, 3.0], u)
    assert isinstance(star, UnionShape)
    assert len(star.parts) == 2
    assert all(isinstance(p, Ball) for p in star.parts)


def test_invert_shape_membership_is_conjugated():
    """x in A exactly when x* in A*, for analytic and fallback images."""
    rng = np.random.default_rng(7)
    pole = np.array([0.0, 0.0, 2.0])
    inv = Inversion(pole)
    shapes = [
        Ball(ORIGIN, 1.0),
        BallComplement(ORIGIN, 1.0),
        HalfSpace([1.0, 0.0, 0.0], 1.5),
        SphereShell(ORIGIN, 1.0),  # falls back to the generic image
    ]
    pts = rng.normal(size=(200, 3)) * 2.0
    pts = pts[np.linalg.norm(pts - pole, axis=1) > 1e-6]
    for shape in shapes:
        star = invert_shape(pole, shape)
        lhs = star.contains(invert_points(inv, pts))
        rhs = shape.contains(pts)
        assert np.array_equal(lhs, rhs), type(shape).__name__
