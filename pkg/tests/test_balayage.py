import numpy as np
import pytest

import rieszlab as rl
from rieszlab import (
    DiscreteMeasure,
    NodesOutsideDomain,
    dirac,
    potential,
    potential_at,
    sweep,
    sweep_dirac_by_inversion,
    sweep_signed,
    verify_integral_representation,
    verify_symmetry,
    verify_transitivity,
)
from rieszlab.balayage import source_potentials_on_nodes

ORIGIN = np.zeros(3)
E1 = np.array([1.0, 0.0, 0.0])


def test_sweep_is_identity_on_node_supported_measures(spec, ball500):
    idx = [3, 77, 401]
    mu = DiscreteMeasure(ball500.nodes[idx], [0.2, 0.3, 0.5])
    res = sweep(spec, mu, ball500)
    assert res.checks.mass_out == pytest.approx(1.0, rel=1e-9)
    got = {tuple(p): w for p, w in zip(res.swept.points, res.swept.weights)}
    for p, w in zip(mu.points, mu.weights):
        assert got[tuple(p)] == pytest.approx(w, abs=1e-8)


def test_sweep_origin_onto_complement(spec, complement2000):
    """A unit charge inside the ball sweeps to the near-uniform boundary
    measure: total mass 1, exterior potential 1/|x|."""
    res = sweep(spec, dirac(ORIGIN), complement2000)
    m = res.swept.total_mass
    assert abs(m - 1.0) < 0.01
    for r in (1.5, 2.0, 3.0):
        val = potential(spec, res.swept, r * E1)
        assert abs(val - 1.0 / r) / (1.0 / r) < 0.01
    # weights are nearly uniform by symmetry
    w = res.solution.weights
    assert w.std() / w.mean() < 0.05
    assert res.checks.mass_ok and res.checks.energy_ok
    assert res.checks.node_equality_gap < 1e-10


def test_sweep_exterior_point_onto_ball(spec, ball2000):
    res = sweep(spec, dirac(2.0 * E1), ball2000)
    assert abs(res.swept.total_mass - 0.5) < 0.005
    # more mass accumulates on the near side
    x = res.swept.points[:, 0]
    near = res.swept.weights[x > 0.5].sum()
    far = res.swept.weights[x < -0.5].sum()
    assert near > 3.0 * far


def test_sweep_checks_fields(spec, ball500):
    res = sweep(spec, dirac(3.0 * E1), ball500, n_probes=50, probe_seed=123)
    c = res.checks
    assert c.mass_in == 1.0
    assert c.mass_out <= c.mass_in * (1.0 + 1e-8)
    assert c.energy_out <= c.energy_in * (1.0 + 1e-8)
    assert c.n_probes == 50
    assert c.probe_seed == 123
    assert c.domination_ok
    # swept potential never exceeds the source potential off the set
    assert c.domination_excess <= 0.02


def test_sweep_deterministic(spec, ball500):
    mu = dirac(np.array([1.7, 0.4, -0.2]))
    w1 = sweep(spec, mu, ball500, run_checks=False).solution.weights
    w2 = sweep(spec, mu, ball500, run_checks=False).solution.weights
    assert np.array_equal(w1, w2)


def test_source_potentials_handle_node_coincidence(spec, ball500):
    mu = DiscreteMeasure(ball500.nodes[[5]], [2.0])
    b = source_potentials_on_nodes(spec, mu, ball500)
    # at its own node the source contributes the regularized energy
    assert b[5] == pytest.approx(2.0 * ball500.reg_radius ** spec.exponent)
    assert np.isfinite(b).all()


def test_mass_energy_inequalities_random(spec, ball500):
    rng = np.random.default_rng(21)
    for _ in range(10):
        k = rng.integers(1, 6)
        pts = rng.normal(size=(k, 3))
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        pts *= (1.3 + 2.0 * rng.random((k, 1)))
        mu = DiscreteMeasure(pts, rng.random(k) + 0.2)
        res = sweep(spec, mu, ball500, n_probes=0)
        assert res.checks.mass_ok
        assert res.checks.energy_ok


def test_symmetry_identical_measures(spec, ball500):
    mu = dirac(2.0 * E1)
    out = verify_symmetry(spec, mu, mu, ball500)
    assert out["rel_gap"] == 0.0


def test_symmetry_random_pairs(spec, ball500):
    rng = np.random.default_rng(22)
    for _ in range(5):
        mu = dirac(rng.normal(size=3) * 0.3 + [2.5, 0, 0])
        nu = dirac(rng.normal(size=3) * 0.3 - [2.5, 0, 0])
        out = verify_symmetry(spec, mu, nu, ball500)
        assert out["rel_gap"] < 0.02
        assert out["e_mu_nu"] > 0.0


def test_integral_representation_single_atom(spec, ball500):
    out = verify_integral_representation(spec, dirac(2.0 * E1), ball500)
    # one atom: both routes are literally the same solve
    assert out["max_rel_gap"] < 1e-12
    assert out["mass_rel_gap"] < 1e-12


def test_integral_representation_multi_atom(spec, ball500):
    rng = np.random.default_rng(23)
    pts = rng.normal(size=(5, 3))
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True) * 2.0
    mu = DiscreteMeasure(pts, rng.random(5) + 0.5)
    out = verify_integral_representation(spec, mu, ball500, n_probes=100)
    assert out["max_rel_gap"] < 0.02
    assert out["mass_rel_gap"] < 0.02


def test_transitivity_via_subset(spec, ball2000):
    f = rl.sphere_region(ORIGIN, 0.5, 400, spec)
    out = verify_transitivity(spec, dirac(3.0 * E1), ball2000, f, n_probes=60)
    assert out["max_rel_gap"] < 0.02


def test_transitivity_fixed_point(spec, ball500):
    # F = A: the second sweep is the identity
    out = verify_transitivity(spec, dirac(3.0 * E1), ball500, ball500, n_probes=40)
    assert out["max_rel_gap"] < 1e-8


def test_transitivity_rejects_outside_subset(spec, ball500):
    f = rl.sphere_region(ORIGIN, 2.0, 100, spec)
    with pytest.raises(NodesOutsideDomain):
        verify_transitivity(spec, dirac(5.0 * E1), ball500, f)


def test_sweep_signed_hahn_decomposition(spec, ball500):
    mu = DiscreteMeasure(
        [[2.0, 0, 0], [-2.0, 0, 0]], [1.0, -0.5], signed=True
    )
    res = sweep_signed(spec, mu, ball500)
    assert res.positive is not None and res.negative is not None
    assert res.swept.signed
    expected = res.positive.swept.total_mass - res.negative.swept.total_mass
    assert res.swept.total_mass == pytest.approx(expected, rel=1e-9)
    # the signed sweep matches the difference of the one-sided sweeps
    probe = np.array([[0.0, 3.0, 0.0]])
    lhs = potential_at(spec, res.swept, probe)[0]
    rhs = (
        potential_at(spec, res.positive.swept, probe)[0]
        - potential_at(spec, res.negative.swept, probe)[0]
    )
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_sweep_positive_measure_through_signed_api(spec, ball500):
    res = sweep_signed(spec, dirac(2.0 * E1), ball500)
    assert res.negative is None
    assert not res.swept.signed


def test_sweep_by_inversion_matches_qp(spec, ball2000):
    direct = sweep(spec, dirac(2.0 * E1), ball2000, run_checks=False)
    via_kelvin = sweep_dirac_by_inversion(spec, 2.0 * E1, 1.0, ball2000)
    assert via_kelvin.total_mass == pytest.approx(
        direct.swept.total_mass, rel=0.01
    )
    probes = np.array([[0.0, 2.0, 0.0], [3.0, 0.0, 0.0], [0.0, 0.0, -4.0]])
    pa = potential_at(spec, direct.swept, probes)
    pb = potential_at(spec, via_kelvin, probes)
    assert np.max(np.abs(pa - pb) / pa) < 0.01


def test_sweep_by_inversion_rejects_charge_on_region(spec, ball500):
    with pytest.raises(ValueError):
        sweep_dirac_by_inversion(spec, E1, 1.0, ball500)


def test_sweep_scales_linearly(spec, ball500):
    """Sweeping commutes with scaling the source measure."""
    r1 = sweep(spec, dirac(2.0 * E1, 1.0), ball500, run_checks=False)
    r3 = sweep(spec, dirac(2.0 * E1, 3.0), ball500, run_checks=False)
    assert np.allclose(3.0 * r1.solution.weights, r3.solution.weights,
                       rtol=1e-10, atol=1e-12)
