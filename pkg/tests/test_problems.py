import math

import numpy as np
import pytest

from gsmm.core import ConfigError, ProblemConstants, derive_constants
from gsmm.problems import (
    DroProblem,
    SyntheticProblem,
    dro_best_response,
    dro_gradients,
    dro_loss,
    dro_primal_grad,
    synthetic_oracles,
)
from gsmm.verify import finite_diff
from tests.conftest import dro_from_bundled


def single_sample_problem():
    return DroProblem(np.array([[1.0]]), np.array([1.0]))


# -- dro_loss -----------------------------------------------------------------


def test_loss_single_sample_at_origin():
    p = single_sample_problem()
    # l(0) = log 2, f(0) = 0, g((1,)) = 0.5 * 1 * (1*1 - 1)^2 = 0
    assert dro_loss(p, np.zeros(1), np.ones(1)) == pytest.approx(math.log(2.0),
                                                                 abs=1e-15)


def test_loss_at_zero_x_is_log2_minus_penalty(german50):
    p = german50
    rng = np.random.default_rng(2)
    n = p.n_samples
    y = rng.dirichlet(np.ones(n))
    # every sample loses log 2 at x = 0, so the weighted term is log(2)/N
    g = 0.5 * p.lambda2 * float(np.sum((n * y - 1.0) ** 2))
    got = dro_loss(p, np.zeros(p.n_features), y)
    assert got == pytest.approx(math.log(2.0) / n - g, rel=1e-12)


def test_loss_cross_checked_in_extended_precision():
    p = dro_from_bundled("german", take=10)
    rng = np.random.default_rng(4)
    x = rng.normal(size=p.n_features) * 0.5
    y = np.full(10, 0.1)
    dense = p.features.toarray() if hasattr(p.features, "toarray") else p.features
    terms = []
    for i in range(10):
        z = p.labels[i] * float(dense[i] @ x)
        terms.append(y[i] * (math.log1p(math.exp(-abs(z))) + max(-z, 0.0)) / 10.0)
    f = math.fsum(p.lambda1 * 10.0 * xi**2 / (1.0 + 10.0 * xi**2) for xi in x)
    g = 0.5 * p.lambda2 * math.fsum((10.0 * yi - 1.0) ** 2 for yi in y)
    expected = math.fsum(terms) + f - g
    assert dro_loss(p, x, y) == pytest.approx(expected, rel=1e-12)


def test_loss_rejects_infeasible_y():
    p = single_sample_problem()
    with pytest.raises(ConfigError, match="simplex"):
        dro_loss(p, np.zeros(1), np.array([1.5]))
    # waiving validation evaluates the same formula off the simplex
    off = dro_loss(p, np.zeros(1), np.array([1.5]), validate=False)
    assert math.isfinite(off)


# -- dro_gradients ------------------------------------------------------------


def test_gradients_single_sample_at_origin():
    p = single_sample_problem()
    gx, gy = dro_gradients(p, np.zeros(1), np.ones(1), [0])
    assert gx[0] == pytest.approx(-0.5, abs=1e-15)
    assert gy[0] == pytest.approx(math.log(2.0), abs=1e-15)
    fx = finite_diff(lambda x: dro_loss(p, x, np.ones(1)), np.zeros(1))
    fy = finite_diff(lambda y: dro_loss(p, np.zeros(1), y, validate=False),
                     np.ones(1))
    assert abs(fx[0] - gx[0]) <= 1e-8
    assert abs(fy[0] - gy[0]) <= 1e-8


def test_regularizer_gradient_vanishes_at_origin(german50):
    p = german50
    y = np.full(p.n_samples, 1.0 / p.n_samples)
    gx_full = p.full_grad_x(np.zeros(p.n_features), y)
    data_only = p.features.T @ (
        y * (-p.labels * 0.5) / p.n_samples
    )
    data_only = np.asarray(data_only).ravel()
    assert np.allclose(gx_full, data_only, atol=1e-15)


def test_full_batch_matches_finite_differences(german50):
    p = german50
    rng = np.random.default_rng(8)
    x = rng.normal(size=p.n_features) * 0.3
    y = rng.dirichlet(np.ones(p.n_samples))
    gx, gy = dro_gradients(p, x, y, list(range(p.n_samples)))
    fx = finite_diff(lambda u: dro_loss(p, u, y), x)
    fy = finite_diff(lambda v: dro_loss(p, x, v, validate=False), y)
    assert np.linalg.norm(fx - gx) <= 1e-6 * max(1.0, np.linalg.norm(gx))
    assert np.linalg.norm(fy - gy) <= 1e-6 * max(1.0, np.linalg.norm(gy))


def test_batch_validation(german50):
    p = german50
    x = np.zeros(p.n_features)
    y = np.full(p.n_samples, 1.0 / p.n_samples)
    with pytest.raises(ConfigError, match="non-empty"):
        p.stoch_grad_x(x, y, [])
    with pytest.raises(ConfigError, match="out of range"):
        p.stoch_grad_y(x, y, [p.n_samples])


def test_singleton_average_is_full_gradient(german50):
    p = german50
    rng = np.random.default_rng(9)
    x = rng.normal(size=p.n_features) * 0.2
    y = rng.dirichlet(np.ones(p.n_samples))
    n = p.n_samples
    mean_x = np.mean([p.stoch_grad_x(x, y, [i]) for i in range(n)], axis=0)
    mean_y = np.mean([p.stoch_grad_y(x, y, [i]) for i in range(n)], axis=0)
    assert np.linalg.norm(mean_x - p.full_grad_x(x, y)) <= 1e-12
    assert np.linalg.norm(mean_y - p.full_grad_y(x, y)) <= 1e-12


# -- dro_best_response --------------------------------------------------------


def test_best_response_symmetric_losses():
    # identical samples give identical losses, so the maximizer is uniform
    p = DroProblem(np.array([[1.0], [1.0]]), np.array([1.0, 1.0]), lambda2=0.25)
    y = dro_best_response(p, np.array([0.7]))
    assert np.array_equal(y, np.array([0.5, 0.5]))


def test_best_response_extreme_loss_hits_vertex():
    # margins engineered so the losses are (10, ~0); with lambda2 = 1/4 the
    # pre-projection point is (5.5, 0.5 + tiny) and the projection is (1, 0)
    p = DroProblem(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]),
                   lambda2=0.25)
    x = np.array([-math.log(math.expm1(10.0)), 40.0])
    ell = p.sample_losses(x)
    assert ell[0] == pytest.approx(10.0, rel=1e-12)
    assert ell[1] <= 1e-15
    y = dro_best_response(p, x)
    assert np.array_equal(y, np.array([1.0, 0.0]))


def test_best_response_fixed_point_under_long_ascent():
    from gsmm.projections import project
    from gsmm.core import DualDomain

    p = dro_from_bundled("german", take=10)
    x = np.random.default_rng(1).normal(size=p.n_features) * 0.4
    ystar = dro_best_response(p, x)
    dom = DualDomain.simplex(p.n_samples)
    eta = 1.0 / (p.lambda2 * p.n_samples**2)
    y = ystar.copy()
    worst = 0.0
    for _ in range(100_000):
        y = project(y + eta * p.full_grad_y(x, y), dom).output
        worst = max(worst, float(np.linalg.norm(y - ystar)))
    assert worst <= 1e-10


def test_mu_is_lambda2_n_squared(diabetes_full):
    assert diabetes_full.mu == 1.0  # default lambda2 = 1/N^2
    p = DroProblem(np.ones((4, 2)), np.array([1.0, -1.0, 1.0, -1.0]), lambda2=0.5)
    assert p.mu == 8.0


# -- dro_primal_grad ----------------------------------------------------------


def test_primal_grad_matches_composed_finite_differences():
    p = dro_from_bundled("german", take=20)
    rng = np.random.default_rng(11)

    def phi(x):
        return dro_loss(p, x, dro_best_response(p, x))

    for _ in range(3):
        x = rng.normal(size=p.n_features) * 0.3
        g = dro_primal_grad(p, x)
        fd = finite_diff(phi, x, h=1e-5)
        assert np.linalg.norm(fd - g) <= 1e-4 * max(1.0, np.linalg.norm(g))


def test_primal_grad_ignores_absent_features():
    # feature 4 appears in no sample, so moving along it only changes f
    feats = np.array([[1.0, 0.5, 0.0, 0.0],
                      [0.0, 1.0, 2.0, 0.0],
                      [1.0, 0.0, 1.0, 0.0]])
    p = DroProblem(feats, np.array([1.0, -1.0, 1.0]))
    rng = np.random.default_rng(3)
    x1 = rng.normal(size=4)
    x2 = x1.copy()
    x2[3] += 0.8
    g1 = dro_primal_grad(p, x1)
    g2 = dro_primal_grad(p, x2)
    assert np.array_equal(g1[:3], g2[:3])

    def grad_f(x):
        return 2.0 * p.lambda1 * p.alpha * x / (1.0 + p.alpha * x**2) ** 2

    assert g2[3] - g1[3] == pytest.approx(grad_f(x2)[3] - grad_f(x1)[3],
                                          rel=1e-12)


# -- synthetic problem --------------------------------------------------------


def test_synthetic_decoupled_best_response_is_zero():
    p = synthetic_oracles(SyntheticProblem(coupling=np.zeros((4, 3)), mu=2.0))
    assert np.array_equal(p.best_response(np.ones(4)), np.zeros(3))


def test_synthetic_linear_quadratic_case():
    p = synthetic_oracles(SyntheticProblem(coupling=np.eye(2), mu=1.0,
                                           quartic_weight=0.0))
    x = np.array([1.0, 2.0])
    assert np.array_equal(p.best_response(x), x)
    assert np.array_equal(p.primal_grad(x), x)


def test_synthetic_quartic_derivative():
    p = synthetic_oracles(SyntheticProblem(coupling=np.zeros((1, 1)), mu=1.0,
                                           quartic_weight=1.0))
    assert p.primal_grad(np.array([2.0]))[0] == 32.0


def test_synthetic_validation():
    with pytest.raises(ConfigError):
        SyntheticProblem(coupling=np.zeros((2, 2)), mu=0.0)
    with pytest.raises(ConfigError):
        SyntheticProblem(coupling=np.zeros(3), mu=1.0)
    with pytest.raises(ConfigError):
        synthetic_oracles(SyntheticProblem(coupling=np.eye(2), mu=1.0),
                          noise_kind="laplace")
    with pytest.raises(ConfigError):
        synthetic_oracles(SyntheticProblem(coupling=np.eye(2), mu=1.0),
                          noise_x=-1.0)


def test_synthetic_best_response_lipschitz_within_kappa():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(5, 3))
    mu = 1.7
    p = synthetic_oracles(SyntheticProblem(coupling=a, mu=mu))
    lip = float(np.linalg.svd(a, compute_uv=False)[0]) / mu
    # consistent constants: dual gradient A'x - mu y is lip-smooth in x with
    # slope-zero coefficient ||A||_2, so kappa = ||A||_2 / mu exactly
    dc = derive_constants(ProblemConstants(mu=mu, ly0=lip * mu, ly1=0.0))
    assert dc.kappa == pytest.approx(lip, rel=1e-12)
    worst = 0.0
    for _ in range(200):
        x1 = rng.normal(size=5)
        x2 = x1 + rng.normal(size=5) * 0.1
        num = np.linalg.norm(p.best_response(x1) - p.best_response(x2))
        worst = max(worst, num / np.linalg.norm(x1 - x2))
    assert worst <= lip + 1e-9
    assert worst <= dc.kappa + 1e-9


def test_synthetic_noise_pools_average_out(synthetic_noisy):
    p = synthetic_noisy
    rng = np.random.default_rng(12)
    x = rng.normal(size=p.n_x)
    y = rng.normal(size=p.n_y)
    n = p.sample_count()
    mean_x = np.mean([p.stoch_grad_x(x, y, [i]) for i in range(n)], axis=0)
    fx = p.full_grad_x(x, y)
    assert np.linalg.norm(mean_x - fx) <= 1e-12 * max(1.0, np.linalg.norm(fx))
    # singleton draws really are noisy
    assert np.linalg.norm(p.stoch_grad_x(x, y, [0]) - fx) > 1e-6


def test_synthetic_bounded_noise_stays_bounded():
    p = synthetic_oracles(SyntheticProblem(coupling=np.eye(2), mu=1.0),
                          noise_x=0.3, noise_kind="bounded", pool_size=32)
    x, y = np.zeros(2), np.zeros(2)
    full = p.full_grad_x(x, y)
    for i in range(32):
        dev = p.stoch_grad_x(x, y, [i]) - full
        # centering can at most double the raw bound
        assert np.max(np.abs(dev)) <= 0.6


# -- dual-gradient upper bound ------------------------------------------------


def test_dual_gradient_bound_tight_on_full_space():
    # quadratic dual block: ||grad_y L||^2 = 2 mu (L(x, y*) - L(x, y)) exactly
    rng = np.random.default_rng(14)
    a = rng.normal(size=(4, 3))
    mu = 2.3
    p = synthetic_oracles(SyntheticProblem(coupling=a, mu=mu, quartic_weight=1.0))
    for _ in range(200):
        x = rng.normal(size=4)
        y = rng.normal(size=3) * 2.0
        ystar = p.best_response(x)
        gap = p.loss(x, ystar) - p.loss(x, y)
        g2 = float(np.linalg.norm(p.full_grad_y(x, y)) ** 2)
        assert g2 == pytest.approx(2.0 * mu * gap, rel=1e-9, abs=1e-12)


def test_dual_gradient_bound_dro_unconstrained_gap():
    # against the unconstrained maximizer the affine dual gradient makes the
    # bound an identity; the simplex-constrained gap would violate it by
    # exactly ||grad_y L(x, y*)||^2 > 0
    p = dro_from_bundled("german", take=30)
    rng = np.random.default_rng(15)
    mu = p.mu
    n = p.n_samples
    for _ in range(200):
        x = rng.normal(size=p.n_features) * 0.4
        y = rng.dirichlet(np.ones(n))
        c = p.sample_losses(x) / (p.lambda2 * n**3) + 1.0 / n
        gap_u = dro_loss(p, x, c, validate=False) - dro_loss(p, x, y)
        g2 = float(np.linalg.norm(p.full_grad_y(x, y)) ** 2)
        assert g2 == pytest.approx(2.0 * mu * gap_u, rel=1e-9, abs=1e-12)


# -- constructor validation ---------------------------------------------------


def test_dro_constructor_validation():
    with pytest.raises(ConfigError, match="labels"):
        DroProblem(np.ones((2, 2)), np.array([0.0, 1.0]))
    with pytest.raises(ConfigError, match="rows"):
        DroProblem(np.ones((3, 2)), np.array([1.0, -1.0]))
    with pytest.raises(ConfigError, match="lambda2"):
        DroProblem(np.ones((2, 2)), np.array([1.0, -1.0]), lambda2=0.0)
