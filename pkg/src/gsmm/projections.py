"""Euclidean projections onto the supported dual domains."""

from dataclasses import dataclass

import numpy as np

from .core import ConfigError


@dataclass
class ProjectionReport:
    """Projection output plus diagnostics.

    active_count: coordinates clamped (simplex zeros, box bound hits).
    shift: the simplex threshold theta (0 for other domains).
    """

    output: np.ndarray
    active_count: int
    shift: float


def project_simplex(v):
    """Euclidean projection onto the probability simplex by sort and
    threshold: sort v descending, take the largest k with
    u_k - (sum_{j<=k} u_j - 1)/k > 0, set theta to that average, output
    max(v - theta, 0). O(m log m). Ties at the threshold map to 0.

    Returns (projected vector, theta, active_count).
    """
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.shape[0] + 1)
    cond = u - (css - 1.0) / ks > 0.0
    # cond[0] always holds: u_1 - (u_1 - 1) = 1 > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = (css[rho] - 1.0) / (rho + 1.0)
    out = np.maximum(v - theta, 0.0)
    return out, float(theta), int(np.count_nonzero(out == 0.0))


def project(v, domain):
    """Euclidean projection of v onto the domain, with diagnostics."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise ConfigError("projection input must be a non-empty vector")
    if v.shape[0] != domain.dim:
        raise ConfigError(
            f"dimension mismatch: v has {v.shape[0]} entries, domain dim {domain.dim}"
        )
    if not np.all(np.isfinite(v)):
        raise ConfigError("projection input must be finite")
    if domain.kind == "full":
        return ProjectionReport(output=v.copy(), active_count=0, shift=0.0)
    if domain.kind == "box":
        out = np.clip(v, domain.lower, domain.upper)
        active = int(np.count_nonzero(out != v))
        return ProjectionReport(output=out, active_count=active, shift=0.0)
    out, theta, active = project_simplex(v)
    return ProjectionReport(output=out, active_count=active, shift=theta)


def brute_force_simplex_projection(v, grid_step):
    """Test oracle: the simplex grid point of spacing grid_step minimizing
    squared distance to v, ties broken lexicographically. Dimension <= 4
    only (combinatorial blow-up beyond)."""
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[0]
    if d > 4:
        raise ConfigError("brute force oracle supports dimension <= 4")
    if d < 1:
        raise ConfigError("empty vector")
    if not (0.0 < grid_step <= 0.1):
        raise ConfigError("grid_step must lie in (0, 0.1]")
    k = int(round(1.0 / grid_step))

    if d == 1:
        return np.array([1.0])
    if d == 2:
        i = np.arange(k + 1)
        p = np.stack([i / k, (k - i) / k], axis=1)
        dist = np.sum((p - v) ** 2, axis=1)
        return p[int(np.argmin(dist))]

    # d in {3, 4}: iterate the leading coordinate(s), vectorize the rest.
    # Strict improvement keeps the first minimizer in ascending (i, j, ...)
    # order, which is the lexicographically smallest grid point.
    best = None
    best_dist = np.inf
    if d == 3:
        for i in range(k + 1):
            j = np.arange(k - i + 1)
            p0 = i / k
            p1 = j / k
            p2 = (k - i - j) / k
            dist = (p0 - v[0]) ** 2 + (p1 - v[1]) ** 2 + (p2 - v[2]) ** 2
            a = int(np.argmin(dist))
            if dist[a] < best_dist:
                best_dist = float(dist[a])
                best = np.array([p0, p1[a], p2[a]])
        return best
    for i in range(k + 1):
        for j in range(k - i + 1):
            l = np.arange(k - i - j + 1)
            p0 = i / k
            p1 = j / k
            p2 = l / k
            p3 = (k - i - j - l) / k
            dist = (p0 - v[0]) ** 2 + (p1 - v[1]) ** 2 + (p2 - v[2]) ** 2 + (p3 - v[3]) ** 2
            a = int(np.argmin(dist))
            if dist[a] < best_dist:
                best_dist = float(dist[a])
                best = np.array([p0, p1, p2[a], p3[a]])
    return best
