"""Concrete minimax problems.

DroProblem is distributionally robust logistic regression over the
probability simplex: sample weights are chosen adversarially, pulled toward
uniform by an isotropic quadratic penalty, and the classifier carries a
bounded nonconvex regularizer. The inner maximization has a closed form
(a simplex projection), which yields exact tracking-error and primal-gradient
metrics.

SyntheticProblem couples a quartic nonconvex term with a bilinear saddle and
an unconstrained strongly concave dual. Its quartic term has unbounded
Hessian but gradient-proportional curvature growth, the regime the
generalized-smoothness probes target; every oracle is analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import ConfigError, DualDomain, MinimaxProblem, membership_check
from .projections import project_simplex

__all__ = [
    "DroProblem",
    "SyntheticProblem",
    "dro_loss",
    "dro_gradients",
    "dro_best_response",
    "dro_primal_grad",
    "synthetic_oracles",
]

# Dual vectors are always dense; feature matrices are densified below this
# x-dimension and kept sparse above it.
_DENSIFY_MAX_DIM = 10_000

_SIGMOID_CLIP = 500.0


def _stable_logistic(z: np.ndarray) -> np.ndarray:
    # log(1 + exp(-z)) without overflow for large |z|
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(-z, 0.0)


def _sigmoid(u: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(u, -_SIGMOID_CLIP, _SIGMOID_CLIP)))


class DroProblem(MinimaxProblem):
    """Adversarially reweighted logistic regression (dual on the N-simplex).

    L(x, y) = (1/N) sum_i y_i * log(1 + exp(-b_i <a_i, x>)) + f(x) - g(y)
    with f(x) = lambda1 * sum_j alpha x_j^2 / (1 + alpha x_j^2) and
    g(y) = (lambda2/2) ||N y - 1||^2. Strong concavity modulus is
    mu = lambda2 * N^2 (equal to 1 under the default lambda2 = 1/N^2).
    """

    def __init__(self, features, labels, lambda1=0.001, lambda2=None, alpha=10.0, name=""):
        labels = np.asarray(labels, dtype=float)
        if labels.ndim != 1 or labels.size == 0:
            raise ConfigError("labels must be a non-empty 1-d array")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ConfigError("labels must take values in {-1, +1}; normalize first")
        n = labels.size
        if sp.issparse(features):
            features = features.tocsr()
            if features.shape[1] <= _DENSIFY_MAX_DIM:
                features = features.toarray()
        else:
            features = np.asarray(features, dtype=float)
            if features.ndim != 2:
                raise ConfigError("features must be a 2-d matrix")
        if features.shape[0] != n:
            raise ConfigError(
                f"features have {features.shape[0]} rows but there are {n} labels"
            )
        if lambda2 is None:
            lambda2 = 1.0 / n**2
        if not (lambda2 > 0):
            raise ConfigError(f"lambda2 must be > 0, got {lambda2}")
        if not (lambda1 >= 0):
            raise ConfigError(f"lambda1 must be >= 0, got {lambda1}")
        if not (alpha >= 0):
            raise ConfigError(f"alpha must be >= 0, got {alpha}")
        self.features = features
        self.labels = labels
        self.lambda1 = float(lambda1)
        self.lambda2 = float(lambda2)
        self.alpha = float(alpha)
        self.name = name
        self.n_samples = n
        self.n_features = features.shape[1]

    @property
    def mu(self) -> float:
        return self.lambda2 * self.n_samples**2

    # -- elementary pieces ------------------------------------------------

    def _margins(self, x: np.ndarray, rows=None, idx=None) -> np.ndarray:
        if rows is None:
            rows = self.features if idx is None else self.features[idx]
        prod = rows @ x
        if sp.issparse(self.features):
            prod = np.asarray(prod).ravel()
        b = self.labels if idx is None else self.labels[idx]
        return b * prod

    def sample_losses(self, x: np.ndarray) -> np.ndarray:
        """Per-sample logistic losses at x (length N)."""
        return _stable_logistic(self._margins(np.asarray(x, dtype=float)))

    def _grad_f(self, x: np.ndarray) -> np.ndarray:
        denom = 1.0 + self.alpha * x**2
        return 2.0 * self.lambda1 * self.alpha * x / denom**2

    def _dual_penalty_grad(self, y: np.ndarray) -> np.ndarray:
        n = self.n_samples
        return self.lambda2 * n * (n * y - 1.0)

    # -- MinimaxProblem contract ------------------------------------------

    def loss(self, x, y, validate=True) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if validate and not membership_check(y, self.dual_domain(), tol=1e-8):
            raise ConfigError("y is not on the probability simplex (tolerance 1e-8)")
        n = self.n_samples
        ell = self.sample_losses(x)
        f = self.lambda1 * float(np.sum(self.alpha * x**2 / (1.0 + self.alpha * x**2)))
        g = 0.5 * self.lambda2 * float(np.sum((n * y - 1.0) ** 2))
        return float(y @ ell) / n + f - g

    def full_grad_x(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = self._margins(x)
        coef = y * (-self.labels * _sigmoid(-z)) / self.n_samples
        data_part = self.features.T @ coef
        if sp.issparse(self.features):
            data_part = np.asarray(data_part).ravel()
        return data_part + self._grad_f(x)

    def full_grad_y(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.sample_losses(x) / self.n_samples - self._dual_penalty_grad(y)

    def _check_batch(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        if idx.size == 0:
            raise ConfigError("batch must be non-empty")
        if idx.min() < 0 or idx.max() >= self.n_samples:
            raise ConfigError(
                f"batch index out of range [0, {self.n_samples}): "
                f"min {idx.min()}, max {idx.max()}"
            )
        return idx

    def stoch_grad_x(self, x, y, idx) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        idx = self._check_batch(idx)
        rows = self.features[idx]
        z = self._margins(x, rows=rows, idx=idx)
        coef = y[idx] * (-self.labels[idx] * _sigmoid(-z))
        data_part = rows.T @ coef
        if sp.issparse(self.features):
            data_part = np.asarray(data_part).ravel()
        return data_part / idx.size + self._grad_f(x)

    def stoch_grad_y(self, x, y, idx) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        idx = self._check_batch(idx)
        rows = self.features[idx]
        z = self._margins(x, rows=rows, idx=idx)
        out = np.zeros(self.n_samples)
        # repeated indices accumulate, matching the minibatch mean of
        # singleton estimators
        np.add.at(out, idx, _stable_logistic(z))
        return out / idx.size - self._dual_penalty_grad(y)

    def best_response(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.n_samples
        c = self.sample_losses(x) / (self.lambda2 * n**3) + 1.0 / n
        out, _, _ = project_simplex(c)
        return out

    def primal_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.full_grad_x(x, self.best_response(x))

    def dual_domain(self) -> DualDomain:
        return DualDomain.simplex(self.n_samples)

    def sample_count(self) -> int:
        return self.n_samples


def dro_loss(p: DroProblem, x, y, validate=True) -> float:
    """Objective value; y must lie on the simplex within 1e-8 unless waived."""
    return p.loss(x, y, validate=validate)


def dro_gradients(p: DroProblem, x, y, batch):
    """Minibatch gradient pair (gx, gy); the full index set gives the exact gradients."""
    return p.stoch_grad_x(x, y, batch), p.stoch_grad_y(x, y, batch)


def dro_best_response(p: DroProblem, x) -> np.ndarray:
    """Exact inner maximizer: simplex projection of losses/(lambda2 N^3) + 1/N."""
    return p.best_response(x)


def dro_primal_grad(p: DroProblem, x) -> np.ndarray:
    """Gradient of Phi(x) = max_y L(x, y) via the best-response identity."""
    return p.primal_grad(x)


@dataclass(frozen=True)
class SyntheticProblem:
    """Analytic test problem L(x,y) = w*sum(x^4) + x'Ay - (mu/2)||y||^2 on full-space y."""

    coupling: np.ndarray
    mu: float
    quartic_weight: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.coupling, dtype=float)
        if a.ndim != 2:
            raise ConfigError("coupling must be a 2-d matrix")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ConfigError(f"mu must be finite and > 0, got {self.mu}")
        if not (math.isfinite(self.quartic_weight) and self.quartic_weight >= 0):
            raise ConfigError(f"quartic_weight must be finite and >= 0, got {self.quartic_weight}")
        object.__setattr__(self, "coupling", a)


class _SyntheticOracles(MinimaxProblem):
    def __init__(self, p: SyntheticProblem, noise_x, noise_y, noise_kind, pool_size, seed):
        if noise_kind not in ("gaussian", "bounded"):
            raise ConfigError(f"noise_kind must be 'gaussian' or 'bounded', got {noise_kind!r}")
        if not isinstance(pool_size, (int, np.integer)) or pool_size < 1:
            raise ConfigError(f"pool_size must be an integer >= 1, got {pool_size!r}")
        if noise_x < 0 or noise_y < 0:
            raise ConfigError("noise scales must be >= 0")
        self.p = p
        self.a = p.coupling
        self.n_x, self.n_y = self.a.shape
        self.pool_size = int(pool_size)
        rng = np.random.default_rng(seed)

        def make_pool(scale, dim):
            if scale == 0.0:
                return None
            if noise_kind == "gaussian":
                raw = rng.normal(0.0, scale, size=(pool_size, dim))
            else:
                raw = rng.uniform(-scale, scale, size=(pool_size, dim))
            # center so the pool is exactly mean-zero over the index set
            return raw - raw.mean(axis=0)

        self._pool_x = make_pool(float(noise_x), self.n_x)
        self._pool_y = make_pool(float(noise_y), self.n_y)

    @property
    def mu(self) -> float:
        return self.p.mu

    def loss(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w, mu = self.p.quartic_weight, self.p.mu
        return float(w * np.sum(x**4) + x @ (self.a @ y) - 0.5 * mu * (y @ y))

    def phi(self, x) -> float:
        """Primal function w*sum(x^4) + ||A'x||^2/(2 mu) in closed form."""
        x = np.asarray(x, dtype=float)
        atx = self.a.T @ x
        return float(self.p.quartic_weight * np.sum(x**4) + (atx @ atx) / (2.0 * self.p.mu))

    def full_grad_x(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return 4.0 * self.p.quartic_weight * x**3 + self.a @ y

    def full_grad_y(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.a.T @ x - self.p.mu * y

    def stoch_grad_x(self, x, y, idx) -> np.ndarray:
        g = self.full_grad_x(x, y)
        if self._pool_x is not None:
            g = g + self._pool_x[np.asarray(idx, dtype=int)].mean(axis=0)
        return g

    def stoch_grad_y(self, x, y, idx) -> np.ndarray:
        g = self.full_grad_y(x, y)
        if self._pool_y is not None:
            g = g + self._pool_y[np.asarray(idx, dtype=int)].mean(axis=0)
        return g

    def best_response(self, x) -> np.ndarray:
        return (self.a.T @ np.asarray(x, dtype=float)) / self.p.mu

    def primal_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 4.0 * self.p.quartic_weight * x**3 + self.a @ (self.a.T @ x) / self.p.mu

    def dual_domain(self) -> DualDomain:
        return DualDomain.full_space(self.n_y)

    def sample_count(self) -> int:
        return self.pool_size


def synthetic_oracles(
    p: SyntheticProblem,
    noise_x: float = 0.0,
    noise_y: float = 0.0,
    noise_kind: str = "gaussian",
    pool_size: int = 64,
    seed: int = 0,
) -> MinimaxProblem:
    """Wrap a SyntheticProblem with analytic oracles and optional sampled noise.

    Noise is realized as a fixed pool of pool_size centered perturbation
    vectors indexed by the sample index, so the full-index average of the
    stochastic gradients reproduces the exact gradient. gaussian pools give
    sub-Gaussian noise; bounded pools are uniform on [-scale, scale].
    """
    return _SyntheticOracles(p, noise_x, noise_y, noise_kind, pool_size, seed)
