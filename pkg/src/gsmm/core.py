"""Domain types, the minimax-problem oracle contract, derived constants,
and the seeded randomness contract shared by all solvers."""

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration or constants. CLI maps this to exit code 2."""


class DataError(ValueError):
    """Dataset problem (missing file, malformed content). CLI exit code 3."""


class DegenerateConstantError(ConfigError):
    """A derived-constant formula is undefined for the given inputs."""


@dataclass(frozen=True)
class ProblemConstants:
    """Problem-level constants.

    mu: strong-concavity modulus of the dual block (> 0).
    b: bound on the dual gradient norm at the best response (>= 0).
    lx0, lx1, ly0, ly1: generalized-smoothness coefficients (>= 0).
    sigma_x, sigma_y: gradient noise scales (>= 0).
    c_abs: absolute sub-Gaussian constant (>= 1, high-probability schedules).
    """

    mu: float
    b: float = 0.0
    lx0: float = 0.0
    lx1: float = 0.0
    ly0: float = 0.0
    ly1: float = 0.0
    sigma_x: float = 0.0
    sigma_y: float = 0.0
    c_abs: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0):
            raise ConfigError(f"mu must be > 0, got {self.mu}")
        for name in ("b", "lx0", "lx1", "ly0", "ly1", "sigma_x", "sigma_y"):
            v = getattr(self, name)
            if not (v >= 0):
                raise ConfigError(f"{name} must be >= 0, got {v}")
        if not (self.c_abs >= 1):
            raise ConfigError(f"c_abs must be >= 1, got {self.c_abs}")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from ProblemConstants.

    kappa: condition ratio (ly0 + ly1*b) / mu.
    l_y: effective dual smoothness ly0 + ly1*((ly0 + ly1*b)/(8*lx1) + b).
    l0, l1: primal smoothness (1 + kappa) * lx0 and (1 + kappa) * lx1.
    kappa_tilde: l_y / mu.
    """

    kappa: float
    l_y: float
    l0: float
    l1: float
    kappa_tilde: float


def derive_constants(pc):
    """Compute DerivedConstants from ProblemConstants.

    Raises DegenerateConstantError if lx1 = 0 while ly1 > 0 (the l_y formula
    divides by 8*lx1). With ly1 = 0 the formula collapses to l_y = ly0 and
    lx1 is not needed.
    """
    kappa = (pc.ly0 + pc.ly1 * pc.b) / pc.mu
    if pc.ly1 == 0.0:
        l_y = pc.ly0
    else:
        if pc.lx1 == 0.0:
            raise DegenerateConstantError(
                "l_y = ly0 + ly1*((ly0 + ly1*b)/(8*lx1) + b) is undefined: "
                "lx1 = 0 while ly1 > 0"
            )
        l_y = pc.ly0 + pc.ly1 * ((pc.ly0 + pc.ly1 * pc.b) / (8.0 * pc.lx1) + pc.b)
    return DerivedConstants(
        kappa=kappa,
        l_y=l_y,
        l0=(1.0 + kappa) * pc.lx0,
        l1=(1.0 + kappa) * pc.lx1,
        kappa_tilde=l_y / pc.mu,
    )


class DualDomain:
    """Dual feasible set: full space, probability simplex, or a box."""

    def __init__(self, kind, dim=None, lower=None, upper=None):
        if kind not in ("full", "simplex", "box"):
            raise ConfigError(f"unknown domain kind {kind!r}")
        self.kind = kind
        if kind == "box":
            lower = np.asarray(lower, dtype=np.float64)
            upper = np.asarray(upper, dtype=np.float64)
            if lower.shape != upper.shape or lower.ndim != 1:
                raise ConfigError("box bounds must be 1-d with equal shapes")
            if np.any(lower > upper):
                raise ConfigError("box bounds must be elementwise ordered")
            self.lower, self.upper = lower, upper
            self.dim = lower.shape[0]
        else:
            if dim is None or dim < 1:
                raise ConfigError("domain dimension must be >= 1")
            self.dim = int(dim)
            self.lower = self.upper = None

    @classmethod
    def full_space(cls, dim):
        return cls("full", dim=dim)

    @classmethod
    def simplex(cls, dim):
        return cls("simplex", dim=dim)

    @classmethod
    def box(cls, lower, upper):
        return cls("box", lower=lower, upper=upper)

    def __repr__(self):
        return f"DualDomain({self.kind}, dim={self.dim})"


def membership_check(y, domain, tol=1e-12):
    """True iff y lies in the domain within tol.

    Simplex: min coordinate >= -tol and |sum - 1| <= tol.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != domain.dim:
        raise ConfigError(
            f"dimension mismatch: y has shape {y.shape}, domain dim {domain.dim}"
        )
    if domain.kind == "full":
        return True
    if domain.kind == "simplex":
        return bool(y.min() >= -tol and abs(float(y.sum()) - 1.0) <= tol)
    return bool(np.all(y >= domain.lower - tol) and np.all(y <= domain.upper + tol))


@dataclass
class IterateState:
    """Solver state: primal x, dual y, momentum m, iteration index t."""

    x: np.ndarray
    y: np.ndarray
    m: np.ndarray
    t: int = 0


@dataclass
class RunRecord:
    """One recorded row of a run.

    Metrics are evaluated at the pre-step iterate (x_t, y_t); step_x, step_y,
    and momentum_bias describe the step taken at t. The final row of a run
    carries NaN in the step and momentum columns (no step was taken).
    tracking_error is NaN without a best-response oracle; momentum_bias is
    NaN for solvers without momentum.
    """

    t: int
    grad_phi_norm: float
    tracking_error: float
    momentum_bias: float
    loss: float
    step_x: float
    step_y: float
    wallclock_ms: float = 0.0


class MinimaxProblem:
    """Oracle contract every concrete problem implements.

    Gradient oracles are immutable after construction and safe to share
    read-only across concurrent runs.
    """

    def stoch_grad_x(self, x, y, idx):
        raise NotImplementedError

    def stoch_grad_y(self, x, y, idx):
        raise NotImplementedError

    def full_grad_x(self, x, y):
        raise NotImplementedError

    def full_grad_y(self, x, y):
        raise NotImplementedError

    def loss(self, x, y):
        raise NotImplementedError

    def dual_domain(self):
        raise NotImplementedError

    def sample_count(self):
        raise NotImplementedError

    def best_response(self, x):
        """Exact maximizer of L(x, .) over the dual domain, or None."""
        return None

    def primal_grad(self, x):
        """Exact gradient of Phi(x) = max_y L(x, y), or None."""
        return None

    def has_best_response(self):
        return type(self).best_response is not MinimaxProblem.best_response

    def has_primal_grad(self):
        return type(self).primal_grad is not MinimaxProblem.primal_grad


def make_streams(seed):
    """Seeded randomness contract: one 64-bit seed yields two independent
    child generators, (sample draws, x-bar selection), in that order.
    Identical seeds yield bit-identical trajectories."""
    children = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(children[0]), np.random.default_rng(children[1])
