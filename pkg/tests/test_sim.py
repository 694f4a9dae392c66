import math

import numpy as np
import pytest

from gpplan.kernels import FullyIndependentConditional, InducingSet, SquaredExponential, SubsetOfRegressors
from gpplan.recursive import BeliefState, init_belief, predict, update
from gpplan.sim import (
    Box,
    DoubleGyreConfig,
    GroundTruth,
    VehicleDynamics,
    double_gyre_step,
    evaluate_error_grid,
    make_ground_truth,
    sample_measurement,
)


@pytest.fixture
def cfg():
    return DoubleGyreConfig(
        gyre_strength=0.3, speed=0.2, dt=0.1, domain=Box([0.0, 0.0], [2.0, 1.0])
    )


def test_box_basics():
    box = Box([0.0, 0.0], [2.0, 1.0])
    assert box.contains(np.array([1.0, 0.5]))
    assert not box.contains(np.array([2.1, 0.5]))
    np.testing.assert_allclose(box.clamp(np.array([3.0, -1.0])), [2.0, 0.0])
    assert box.exterior_distance(np.array([2.0, 2.0])) == pytest.approx(1.0)
    grid = box.grid((4, 2))
    assert grid.shape == (8, 2)
    assert np.all(box.contains(grid))
    with pytest.raises(ValueError):
        Box([0.0, 0.0], [0.0, 1.0])


def test_step_at_origin_is_pure_vehicle_motion(cfg):
    for u in (0.0, 1.0, 2.5):
        got = double_gyre_step(cfg, np.array([0.0, 0.0]), u)
        want = 0.1 * 0.2 * np.array([math.cos(u), math.sin(u)])
        np.testing.assert_allclose(got, want, atol=1e-18)


def test_flow_vanishes_at_gyre_centre(cfg):
    # at (0.5, 0.5) both flow components carry a cos(pi/2) factor
    u = 0.3
    got = double_gyre_step(cfg, np.array([0.5, 0.5]), u)
    vehicle = 0.1 * 0.2 * np.array([math.cos(u), math.sin(u)])
    np.testing.assert_allclose(got - vehicle, [0.5, 0.5], atol=1e-15)


def test_step_matches_independent_rederivation(cfg):
    rng = np.random.default_rng(0)
    for _ in range(100):
        x, y = rng.uniform(0, 2), rng.uniform(0, 1)
        u = rng.uniform(0, 2 * np.pi)
        got = double_gyre_step(cfg, np.array([x, y]), u)
        want = np.array(
            [
                x + cfg.dt * (cfg.gyre_strength * (-math.sin(math.pi * x) * math.cos(math.pi * y))
                              + cfg.speed * math.cos(u)),
                y + cfg.dt * (cfg.gyre_strength * (math.cos(math.pi * x) * math.sin(math.pi * y))
                              + cfg.speed * math.sin(u)),
            ]
        )
        np.testing.assert_allclose(got, want, atol=1e-14)


def test_step_is_deterministic_and_batched_consistent(cfg):
    dyn = VehicleDynamics(cfg)
    state = np.array([0.37, 0.81])
    us = np.array([0.0, 1.2, 4.0])
    a = dyn.step_many(state, us)
    for i, u in enumerate(us):
        one = dyn.step(state, u)
        two = dyn.step(state, u)
        np.testing.assert_array_equal(one, two)
        np.testing.assert_allclose(a[i], one, atol=1e-16)


def test_config_validation():
    with pytest.raises(ValueError):
        DoubleGyreConfig(gyre_strength=0.0, speed=0.2, dt=0.1, domain=Box([0, 0], [1, 1]))
    with pytest.raises(ValueError):
        DoubleGyreConfig(gyre_strength=0.3, speed=0.2, dt=0.1, domain=Box([0.0], [1.0]))


def test_measurement_noise_free_returns_field_value():
    k = SquaredExponential(lengthscale=0.3)
    truth = make_ground_truth(0, k, 3, Box([0, 0], [1, 1]), noise_bound=0.0)
    rng = np.random.default_rng(1)
    x = np.array([0.4, 0.6])
    assert sample_measurement(truth, x, rng) == truth.field(x)


def test_measurement_noise_strictly_bounded_and_centred():
    k = SquaredExponential(lengthscale=0.3)
    truth = make_ground_truth(0, k, 3, Box([0, 0], [1, 1]), noise_bound=0.05)
    rng = np.random.default_rng(2)
    x = np.array([0.4, 0.6])
    s = truth.field(x)
    draws = np.array([sample_measurement(truth, x, rng) - s for _ in range(10_000)])
    assert np.all(np.abs(draws) < 0.05)
    # CLT check on the uniform distribution: sd = b / sqrt(3)
    assert abs(draws.mean()) < 3 * 0.05 / math.sqrt(3 * 10_000)


def test_ground_truth_single_center():
    k = SquaredExponential(lengthscale=0.3, signal_variance=2.0)
    rng = np.random.default_rng(3)
    truth = make_ground_truth(5, k, 1, Box([0, 0], [1, 1]), 0.0)
    c = truth.field.centers[0]
    scaled = truth.field.weights[0]
    assert truth.field(c) == pytest.approx(scaled * 2.0)
    assert truth.rkhs_norm == pytest.approx(abs(scaled) * math.sqrt(2.0))


def test_ground_truth_seed_determinism():
    k = SquaredExponential(lengthscale=0.3)
    a = make_ground_truth(7, k, 5, Box([0, 0], [2, 1]), 0.1)
    b = make_ground_truth(7, k, 5, Box([0, 0], [2, 1]), 0.1)
    np.testing.assert_array_equal(a.field.centers, b.field.centers)
    np.testing.assert_array_equal(a.field.weights, b.field.weights)


def test_ground_truth_norm_matches_expansion_oracle():
    k = SquaredExponential(lengthscale=0.4)
    for m in (1, 2, 3):
        truth = make_ground_truth(11 + m, k, m, Box([0, 0], [1, 1]), 0.0)
        w, c = truth.field.weights, truth.field.centers
        inner = sum(w[i] * w[j] * k(c[i], c[j]) for i in range(m) for j in range(m))
        assert truth.rkhs_norm == pytest.approx(math.sqrt(inner), rel=1e-12)


def _setup_belief(seed=4, m=4):
    rng = np.random.default_rng(seed)
    k = SquaredExponential(lengthscale=0.35)
    domain = Box([0.0, 0.0], [1.0, 1.0])
    pts = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])[:m]
    ind = InducingSet(k, pts)
    truth = make_ground_truth(seed, k, 6, domain, 0.05)
    return rng, domain, ind, truth


def test_error_grid_prior_is_field_magnitude():
    rng, domain, ind, truth = _setup_belief()
    fic = FullyIndependentConditional(ind)
    grid = evaluate_error_grid(truth, init_belief(ind), fic, (6, 5), domain)
    np.testing.assert_allclose(grid.errors, np.abs(truth.field(grid.points)), atol=1e-12)
    assert grid.mean_abs_error == pytest.approx(float(np.mean(grid.errors)), abs=1e-15)


def test_error_grid_single_cell():
    rng, domain, ind, truth = _setup_belief()
    fic = FullyIndependentConditional(ind)
    grid = evaluate_error_grid(truth, init_belief(ind), fic, (1, 1), domain)
    assert grid.errors.shape == (1,)
    assert grid.mean_abs_error == pytest.approx(abs(truth.field(grid.points[0])))


def test_error_grid_two_pass_mean_consistency():
    rng, domain, ind, truth = _setup_belief()
    sor = SubsetOfRegressors(ind)
    belief = init_belief(ind)
    for _ in range(8):
        belief = update(belief, predict(belief, rng.uniform(0, 1, 2), sor, 0.05), rng.normal())
    grid = evaluate_error_grid(truth, belief, sor, (7, 7), domain)
    total = 0.0
    for e in grid.errors:
        total += float(e)
    assert grid.mean_abs_error == pytest.approx(total / grid.errors.size, abs=1e-12)


def test_error_grid_after_exact_inducing_observations_is_interpolant_residual():
    rng, domain, ind, truth = _setup_belief()
    sor = SubsetOfRegressors(ind)
    belief = init_belief(ind)
    y_z = truth.field(ind.points)
    for i in range(ind.size):
        belief = update(belief, predict(belief, ind.points[i], sor, 0.0), y_z[i])
    grid = evaluate_error_grid(truth, belief, sor, (8, 8), domain)
    # batch oracle: the Nystrom interpolant through the exact inducing values
    kz_jittered = ind.gram + ind.kernel.gram_jitter * np.eye(ind.size)
    interp = ind.kernel.pairwise(grid.points, ind.points) @ np.linalg.solve(kz_jittered, y_z)
    np.testing.assert_allclose(grid.errors, np.abs(truth.field(grid.points) - interp), atol=1e-5)
