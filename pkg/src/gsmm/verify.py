"""Independent oracles and empirical probes.

Everything here is diagnostic: finite differences check analytic gradients,
projected ascent approximates the best response without using its closed
form, and the probe_* operations sample inequalities that the problem
classes are supposed to satisfy. Probes report evidence, not certificates —
a sampled supremum can only ever be a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .core import ConfigError, MinimaxProblem
from .projections import project

__all__ = [
    "ProbeReport",
    "AscentResult",
    "finite_diff",
    "approx_best_response",
    "probe_generalized_smoothness",
    "probe_lipschitz_best_response",
    "probe_unbiasedness",
]

_EMPIRICAL_NOTE = "empirical probe only; sampled evidence, not a certificate"


@dataclass(frozen=True)
class ProbeReport:
    """Summary of one sampled probe.

    max_violation is the worst residual against user-supplied constants
    (NaN when no constants were given); fitted carries a least-squares
    (L0, L1) estimate where applicable. extras holds probe-specific
    scalars (variance estimates, fit residuals, empirical bounds).
    """

    n_points: int
    max_violation: float
    quantiles: dict
    fitted: tuple | None = None
    skipped: int = 0
    note: str = _EMPIRICAL_NOTE
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AscentResult:
    """Projected-ascent output: final iterate, last step norm, step count."""

    y: np.ndarray
    residual: float
    iterations: int
    converged: bool
    residuals: tuple = ()


def finite_diff(fn, x, h: float = 1e-6) -> np.ndarray:
    """Central differences with per-coordinate step h*(1+|x_j|)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ConfigError("finite_diff expects a 1-d point")
    if not (h > 0):
        raise ConfigError(f"h must be > 0, got {h}")
    g = np.zeros_like(x)
    for j in range(x.size):
        hj = h * (1.0 + abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += hj
        xm[j] -= hj
        fp = float(fn(xp))
        fm = float(fn(xm))
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ConfigError(f"non-finite evaluation while differencing coordinate {j}")
        g[j] = (fp - fm) / (2.0 * hj)
    return g


def _quantiles(values: np.ndarray) -> dict:
    qs = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": float(qs[0]), "p25": float(qs[1]), "p50": float(qs[2]),
            "p75": float(qs[3]), "max": float(qs[4])}


def approx_best_response(
    problem: MinimaxProblem,
    x,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    eta: float | None = None,
    y0=None,
) -> AscentResult:
    """Full-batch projected gradient ascent on y at fixed x.

    Stops when the step norm drops to tol or the budget runs out;
    non-convergence is flagged in the result, not raised. The default
    stepsize is 1/mu when the problem exposes its concavity modulus.
    """
    x = np.asarray(x, dtype=float)
    if not (tol >= 0):
        raise ConfigError(f"tol must be >= 0, got {tol}")
    if max_iters < 0:
        raise ConfigError(f"max_iters must be >= 0, got {max_iters}")
    domain = problem.dual_domain()
    if eta is None:
        mu = getattr(problem, "mu", None)
        if mu is None or not (mu > 0):
            raise ConfigError("no positive problem.mu available; pass eta explicitly")
        eta = 1.0 / float(mu)
    if y0 is None:
        if domain.kind == "simplex":
            y = np.full(domain.dim, 1.0 / domain.dim)
        elif domain.kind == "box":
            y = np.clip(np.zeros(domain.dim), domain.lower, domain.upper)
        else:
            y = np.zeros(domain.dim)
    else:
        y = np.array(y0, dtype=float)

    def step(yc):
        return project(yc + eta * problem.full_grad_y(x, yc), domain).output

    if max_iters == 0:
        probe = step(y)
        residual = float(np.linalg.norm(probe - y))
        return AscentResult(y=y, residual=residual, iterations=0,
                            converged=residual <= tol, residuals=(residual,))

    history = []
    converged = False
    iterations = max_iters
    residual = math.inf
    for k in range(max_iters):
        cand = step(y)
        residual = float(np.linalg.norm(cand - y))
        history.append(residual)
        y = cand
        if residual <= tol:
            converged = True
            iterations = k
            break
    return AscentResult(y=y, residual=residual, iterations=iterations,
                        converged=converged, residuals=tuple(history))


def probe_generalized_smoothness(
    grad_field,
    pair_sampler,
    radius: float,
    n: int,
    l0: float | None = None,
    l1: float | None = None,
) -> ProbeReport:
    """Sample gradient-difference ratios and fit r ~ L0 + L1*||grad||.

    For each sampled pair (u, u') within the radius, r = ||g(u)-g(u')|| /
    ||u-u'|| is regressed on ||g(u)|| by nonnegative least squares. The
    fitted pair estimates the smoothness coefficients; extras carry the RMS
    residual of the free fit and of the best slope-zero fit, whose gap is
    the evidence that constant-Lipschitz modeling fails. With user constants
    supplied, max_violation is the worst r - (l0 + l1*||g||).
    """
    if n < 1:
        raise ConfigError("empty probe: n must be >= 1")
    if not (radius > 0):
        raise ConfigError(f"radius must be > 0, got {radius}")
    ratios = []
    grads = []
    skipped = 0
    for _ in range(n):
        u, up = pair_sampler()
        u = np.asarray(u, dtype=float)
        up = np.asarray(up, dtype=float)
        du = float(np.linalg.norm(u - up))
        if du < 1e-12:
            skipped += 1
            continue
        if du > radius * (1.0 + 1e-9):
            raise ConfigError(
                f"pair separation {du:.6g} exceeds the declared radius {radius:.6g}"
            )
        gu = np.asarray(grad_field(u), dtype=float)
        gup = np.asarray(grad_field(up), dtype=float)
        ratios.append(float(np.linalg.norm(gu - gup)) / du)
        grads.append(float(np.linalg.norm(gu)))
    if not ratios:
        raise ConfigError("all sampled pairs were degenerate (separation < 1e-12)")
    r = np.asarray(ratios)
    g = np.asarray(grads)
    k = r.size

    a_free = np.column_stack([np.ones(k), g])
    coef, res_free = nnls(a_free, r)
    _, res_const = nnls(np.ones((k, 1)), r)

    if l0 is None and l1 is None:
        max_violation = math.nan
    else:
        bound = (l0 or 0.0) + (l1 or 0.0) * g
        max_violation = float(np.max(r - bound))

    return ProbeReport(
        n_points=k,
        max_violation=max_violation,
        quantiles=_quantiles(r),
        fitted=(float(coef[0]), float(coef[1])),
        skipped=skipped,
        extras={
            "fit_residual_rms": float(res_free) / math.sqrt(k),
            "fit_residual_l1_zero_rms": float(res_const) / math.sqrt(k),
        },
    )


def probe_lipschitz_best_response(
    problem: MinimaxProblem,
    n_pairs: int,
    max_step: float,
    seed: int = 0,
    kappa: float | None = None,
    dim: int | None = None,
) -> ProbeReport:
    """Sample ||y*(x)-y*(x')||/||x-x'|| over random nearby pairs.

    extras report the largest observed ratio and an empirical bound
    b_hat = max ||grad_y L(x, y*(x))|| over the sampled base points.
    """
    if n_pairs < 1:
        raise ConfigError("n_pairs must be >= 1")
    if not (max_step > 0):
        raise ConfigError(f"max_step must be > 0, got {max_step}")
    if not problem.has_best_response():
        raise ConfigError("problem provides no best-response oracle")
    if dim is None:
        dim = getattr(problem, "n_features", None)
        if dim is None:
            dim = getattr(problem, "n_x", None)
        if dim is None:
            raise ConfigError("cannot infer the primal dimension; pass dim")
    rng = np.random.default_rng(seed)
    ratios = []
    b_hat = 0.0
    skipped = 0
    for _ in range(n_pairs):
        x = rng.normal(size=dim)
        direction = rng.normal(size=dim)
        dn = float(np.linalg.norm(direction))
        if dn < 1e-12:
            skipped += 1
            continue
        step = rng.uniform(0.0, max_step)
        x2 = x + direction * (step / dn)
        dx = float(np.linalg.norm(x2 - x))
        if dx < 1e-12:
            skipped += 1
            continue
        y1 = problem.best_response(x)
        y2 = problem.best_response(x2)
        ratios.append(float(np.linalg.norm(y1 - y2)) / dx)
        b_hat = max(b_hat, float(np.linalg.norm(problem.full_grad_y(x, y1))))
    if not ratios:
        raise ConfigError("all sampled pairs were degenerate")
    r = np.asarray(ratios)
    max_ratio = float(np.max(r))
    return ProbeReport(
        n_points=r.size,
        max_violation=max_ratio - kappa if kappa is not None else math.nan,
        quantiles=_quantiles(r),
        fitted=None,
        skipped=skipped,
        extras={"max_ratio": max_ratio, "b_hat": b_hat},
    )


def probe_unbiasedness(problem: MinimaxProblem, x, y, draws, seed: int = 0) -> ProbeReport:
    """Compare singleton-batch gradient means against the full gradients.

    draws="exhaustive" averages every index exactly once and reports the
    relative deviation (should sit at rounding error). An integer number of
    draws (>= 100) runs a seeded Monte-Carlo estimate and reports the worst
    componentwise |mean - full| in standard-error units, plus empirical
    variance proxies sigma_x_hat_sq / sigma_y_hat_sq (mean squared deviation
    of a singleton gradient from the full one).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = problem.sample_count()
    full_x = problem.full_grad_x(x, y)
    full_y = problem.full_grad_y(x, y)

    if isinstance(draws, str):
        if draws != "exhaustive":
            raise ConfigError(f"draws must be an integer or 'exhaustive', got {draws!r}")
        sum_x = np.zeros_like(full_x)
        sum_y = np.zeros_like(full_y)
        sq_x = 0.0
        sq_y = 0.0
        for i in range(n):
            gx = problem.stoch_grad_x(x, y, [i])
            gy = problem.stoch_grad_y(x, y, [i])
            sum_x += gx
            sum_y += gy
            sq_x += float(np.sum((gx - full_x) ** 2))
            sq_y += float(np.sum((gy - full_y) ** 2))
        dev_x = float(np.linalg.norm(sum_x / n - full_x)) / max(1.0, float(np.linalg.norm(full_x)))
        dev_y = float(np.linalg.norm(sum_y / n - full_y)) / max(1.0, float(np.linalg.norm(full_y)))
        return ProbeReport(
            n_points=n,
            max_violation=max(dev_x, dev_y),
            quantiles=_quantiles(np.array([dev_x, dev_y])),
            extras={
                "deviation_x": dev_x,
                "deviation_y": dev_y,
                "sigma_x_hat_sq": sq_x / n,
                "sigma_y_hat_sq": sq_y / n,
            },
        )

    draws = int(draws)
    if draws < 100:
        raise ConfigError(f"draws must be >= 100, got {draws}")
    rng = np.random.default_rng(seed)

    def welford(full, grad_fn):
        mean = np.zeros_like(full)
        m2 = np.zeros_like(full)
        sq = 0.0
        for k in range(1, draws + 1):
            g = grad_fn(rng.integers(0, n))
            d = g - mean
            mean += d / k
            m2 += d * (g - mean)
            sq += float(np.sum((g - full) ** 2))
        se = np.sqrt(m2 / (draws - 1) / draws)
        diff = np.abs(mean - full)
        # zero-variance components must match exactly
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                     np.where(diff <= 1e-12 * (1.0 + np.abs(full)), 0.0, np.inf))
        return z, sq / draws

    z_x, var_x = welford(full_x, lambda i: problem.stoch_grad_x(x, y, [i]))
    z_y, var_y = welford(full_y, lambda i: problem.stoch_grad_y(x, y, [i]))
    z_all = np.concatenate([z_x, z_y])
    return ProbeReport(
        n_points=draws,
        max_violation=float(np.max(z_all)),
        quantiles=_quantiles(z_all[np.isfinite(z_all)]) if np.isfinite(z_all).any() else {},
        extras={
            "max_z_x": float(np.max(z_x)),
            "max_z_y": float(np.max(z_y)),
            "sigma_x_hat_sq": var_x,
            "sigma_y_hat_sq": var_y,
        },
    )
