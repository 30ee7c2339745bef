"""Solvers and theorem-derived hyperparameter schedules.

Three solvers share one loop: NSGDA-M (normalized primal step on a momentum
buffer, batch-1 sampling by default), NSGDA (normalized step on a minibatch
mean, no momentum), and SGDA (plain unnormalized descent step). The dual
update is always projected stochastic ascent.

The four schedule_* operations map problem constants and a target accuracy
to concrete (beta, eta_x, eta_y, batch sizes, T). Each displayed min/max is
evaluated branch by branch; branches whose denominator vanishes are treated
as +inf (they impose no constraint), and a min with no finite branch left is
reported as unschedulable. Statement-mode constants follow the theorem
statements verbatim; proof mode switches to the constants the proofs
actually use where the two disagree.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConfigError,
    DerivedConstants,
    DualDomain,
    IterateState,
    MinimaxProblem,
    ProblemConstants,
    RunRecord,
    make_streams,
    membership_check,
)
from .projections import project

__all__ = [
    "HyperParams",
    "ScheduleRequest",
    "ScheduleResult",
    "Recorder",
    "RunResult",
    "NumericalAbortError",
    "ExactEvaluator",
    "nsgda_m_step",
    "nsgda_m_run",
    "nsgda_run",
    "sgda_run",
    "schedule_thm1",
    "schedule_thm2",
    "schedule_thm3",
    "schedule_thm4",
    "check_init",
]


class NumericalAbortError(RuntimeError):
    """A run hit a non-finite gradient.

    Carries the partial record stream and the last consistent state so the
    caller can still persist what was computed before the abort.
    """

    def __init__(self, message: str, iteration: int, records, state):
        super().__init__(message)
        self.iteration = iteration
        self.records = records
        self.state = state


@dataclass(frozen=True)
class HyperParams:
    """Solver hyperparameters; beta is used by NSGDA-M only."""

    eta_x: float
    eta_y: float
    beta: float = 0.0
    bx: int = 1
    by: int = 1
    t_max: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.eta_x) and self.eta_x > 0):
            raise ConfigError(f"eta_x must be finite and > 0, got {self.eta_x}")
        if not (math.isfinite(self.eta_y) and self.eta_y > 0):
            raise ConfigError(f"eta_y must be finite and > 0, got {self.eta_y}")
        if not (0.0 <= self.beta < 1.0):
            raise ConfigError(f"beta must lie in [0, 1), got {self.beta}")
        for name in ("bx", "by", "t_max"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")


@dataclass(frozen=True)
class ScheduleRequest:
    """Accuracy targets and initial-gap quantities consumed by the schedules.

    delta_phi is the primal-function gap at the start, delta_y0 the initial
    best-response distance, m0_bias the norm of m0 minus the true primal
    gradient at x0 (zero momentum start makes this the gradient norm itself).
    """

    epsilon: float
    delta: float
    delta_phi: float
    delta_y0: float = 0.0
    m0_bias: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError(f"epsilon must be finite and > 0, got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not (math.isfinite(self.delta_phi) and self.delta_phi > 0):
            raise ConfigError(f"delta_phi must be finite and > 0, got {self.delta_phi}")
        if not (math.isfinite(self.delta_y0) and self.delta_y0 >= 0):
            raise ConfigError(f"delta_y0 must be finite and >= 0, got {self.delta_y0}")
        if not (math.isfinite(self.m0_bias) and self.m0_bias >= 0):
            raise ConfigError(f"m0_bias must be finite and >= 0, got {self.m0_bias}")


@dataclass(frozen=True)
class ScheduleResult:
    """Schedule output plus diagnostics.

    active_branch maps each min/max-determined quantity to the formula string
    of the branch that fixed it. one_minus_beta keeps the raw theorem value,
    which can exceed 1 for loose targets; hyper.beta is clamped to [0, 1).
    """

    hyper: HyperParams
    t_bound: int
    init_radius: float
    one_minus_beta: float
    active_branch: dict = field(default_factory=dict)


def _div(num: float, den: float) -> float:
    # Branch convention: a vanishing numerator means no contribution (0), a
    # vanishing denominator with positive numerator means no constraint (inf).
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return num / den


def _pick_min(branches):
    best_label, best = None, math.inf
    for label, value in branches:
        if value < best:
            best_label, best = label, value
    if best_label is None:
        raise ConfigError(
            "unschedulable: every branch of the minimum is infinite "
            "(all constants entering the denominators are zero)"
        )
    return best, best_label


def _pick_max(branches):
    best_label, best = branches[0][0], branches[0][1]
    for label, value in branches[1:]:
        if value > best:
            best_label, best = label, value
    return best, best_label


def _check_source(source: str) -> None:
    if source not in ("statement", "proof"):
        raise ConfigError(f"schedule source must be 'statement' or 'proof', got {source!r}")


def _ceil_min1(value: float) -> int:
    if not math.isfinite(value):
        raise ConfigError("iteration/batch bound is infinite; check problem constants")
    return max(1, math.ceil(value))


def _realize_beta(omb: float):
    """Map a raw 1-beta branch value to (effective 1-beta, beta, note).

    Values above 1 clamp to beta = 0; the stepsize and iteration formulas
    then use 1-beta = 1 so the returned hyperparameters stay mutually
    consistent. A positive 1-beta below double-precision resolution rounds
    beta to the largest representable value under 1 instead of 1 itself.
    """
    omb_eff = min(omb, 1.0)
    beta = 1.0 - omb_eff
    note = None
    if omb > 1.0:
        note = "1-beta exceeded 1; beta clamped to 0"
    elif beta >= 1.0:
        beta = math.nextafter(1.0, 0.0)
        note = "1-beta below double-precision resolution; beta rounded under 1"
    return omb_eff, beta, note


def schedule_thm1(
    pc: ProblemConstants,
    dc: DerivedConstants,
    req: ScheduleRequest,
    source: str = "statement",
) -> ScheduleResult:
    """In-expectation schedule for the momentum solver.

    1-beta is a six-term minimum, eta_x a three-term minimum (the third term
    is the step-size cap the analysis imposes before the displayed two), and
    T a three-term maximum. Statement and proof constants coincide here.
    """
    _check_source(source)
    eps, delta = req.epsilon, req.delta
    mu, lx0, lx1 = pc.mu, pc.lx0, pc.lx1
    sx, sy = pc.sigma_x, pc.sigma_y
    kappa, l_y = dc.kappa, dc.l_y

    omb, omb_branch = _pick_min([
        ("mu^2*eps^2/(37632*lx0^2*sigma_y^2)", _div(mu**2 * eps**2, 37632.0 * lx0**2 * sy**2)),
        ("mu*eps/(336*lx0*sigma_y)", _div(mu * eps, 336.0 * lx0 * sy)),
        ("mu/(6*L_y)", _div(mu, 6.0 * l_y)),
        ("eps^2/(784*sigma_x^2)", _div(eps**2, 784.0 * sx**2)),
        ("mu^2*delta/(3888*lx1^2*sigma_y^2)", _div(mu**2 * delta, 3888.0 * lx1**2 * sy**2)),
        ("mu*sqrt(delta)/(108*lx1*sigma_y)", _div(mu * math.sqrt(delta), 108.0 * lx1 * sy)),
    ])
    omb_eff, beta, beta_note = _realize_beta(omb)

    eta_x, ex_branch = _pick_min([
        ("eps*(1-beta)/(56*(kappa+1)*lx0)", _div(eps * omb_eff, 56.0 * (kappa + 1.0) * lx0)),
        ("5*sqrt(delta)*(1-beta)/(36*kappa*lx1)",
         _div(5.0 * math.sqrt(delta) * omb_eff, 36.0 * kappa * lx1)),
        ("(1-beta)/(8*(1+kappa)*lx1)", _div(omb_eff, 8.0 * (1.0 + kappa) * lx1)),
    ])
    eta_y = 5.0 * omb_eff / mu

    t_val, t_branch = _pick_max([
        ("14*delta_phi/(eps*eta_x)", _div(14.0 * req.delta_phi, eps * eta_x)),
        ("112*lx0*delta_y0/((1-beta)*eps)", _div(112.0 * lx0 * req.delta_y0, omb_eff * eps)),
        ("14*m0_bias/((1-beta)*eps)", _div(14.0 * req.m0_bias, omb_eff * eps)),
    ])
    t_bound = _ceil_min1(t_val)

    active = {"one_minus_beta": omb_branch, "eta_x": ex_branch, "t_bound": t_branch}
    if beta_note:
        active["beta_clamped"] = beta_note
    hyper = HyperParams(eta_x=eta_x, eta_y=eta_y, beta=beta, bx=1, by=1, t_max=t_bound)
    return ScheduleResult(
        hyper=hyper,
        t_bound=t_bound,
        init_radius=_div(math.sqrt(delta), 18.0 * lx1),
        one_minus_beta=omb,
        active_branch=active,
    )


def schedule_thm2(
    pc: ProblemConstants,
    dc: DerivedConstants,
    req: ScheduleRequest,
    source: str = "statement",
) -> ScheduleResult:
    """High-probability schedule for the momentum solver.

    delta is the failure probability here; the dual-noise scale enters as
    c*sigma_y with the absolute constant c >= 1. Statement and proof
    constants coincide.
    """
    _check_source(source)
    eps, delta = req.epsilon, req.delta
    mu, lx0, lx1 = pc.mu, pc.lx0, pc.lx1
    sx = pc.sigma_x
    csy = pc.c_abs * pc.sigma_y
    kappa, l_y = dc.kappa, dc.l_y
    log4d = math.log(4.0 / delta)
    log2ed = math.log(2.0 * math.e / delta)

    omb, omb_branch = _pick_min([
        ("eps^2/(12544*sigma_x^2*log(4/delta))", _div(eps**2, 12544.0 * sx**2 * log4d)),
        ("eps^2*mu^2/(762048*lx0^2*(c*sigma_y)^2*log(2e/delta))",
         _div(eps**2 * mu**2, 762048.0 * lx0**2 * csy**2 * log2ed)),
        ("mu^2/(82944*lx1^2*(c*sigma_y)^2*log(2e/delta))",
         _div(mu**2, 82944.0 * lx1**2 * csy**2 * log2ed)),
        ("mu/(18*L_y)", _div(mu, 18.0 * l_y)),
    ])
    omb_eff, beta, beta_note = _realize_beta(omb)

    eta_x, ex_branch = _pick_min([
        ("(1-beta)/(8*(kappa+1)*lx1)", _div(omb_eff, 8.0 * (kappa + 1.0) * lx1)),
        ("eps*(1-beta)/(28*(kappa+1)*lx0)", _div(eps * omb_eff, 28.0 * (kappa + 1.0) * lx0)),
        ("9*(1-beta)/(32*sqrt(2)*lx1*kappa*sqrt(log(2e/delta)))",
         _div(9.0 * omb_eff, 32.0 * math.sqrt(2.0) * lx1 * kappa * math.sqrt(log2ed))),
        ("9*eps*(1-beta)/(56*sqrt(6)*lx0*kappa*sqrt(log(2e/delta)))",
         _div(9.0 * eps * omb_eff, 56.0 * math.sqrt(6.0) * lx0 * kappa * math.sqrt(log2ed))),
    ])
    eta_y = 9.0 * omb_eff / mu

    t_val, t_branch = _pick_max([
        ("14*delta_phi/(eta_x*eps)", _div(14.0 * req.delta_phi, eta_x * eps)),
        ("224*lx0*delta_y0/((1-beta)*eps)", _div(224.0 * lx0 * req.delta_y0, omb_eff * eps)),
        ("28*m0_bias/((1-beta)*eps)", _div(28.0 * req.m0_bias, omb_eff * eps)),
    ])
    t_bound = _ceil_min1(t_val)

    active = {"one_minus_beta": omb_branch, "eta_x": ex_branch, "t_bound": t_branch}
    if beta_note:
        active["beta_clamped"] = beta_note
    hyper = HyperParams(eta_x=eta_x, eta_y=eta_y, beta=beta, bx=1, by=1, t_max=t_bound)
    return ScheduleResult(
        hyper=hyper,
        t_bound=t_bound,
        init_radius=_div(1.0, 16.0 * lx1),
        one_minus_beta=omb,
        active_branch=active,
    )


def schedule_thm3(
    pc: ProblemConstants,
    dc: DerivedConstants,
    req: ScheduleRequest,
    source: str = "statement",
) -> ScheduleResult:
    """In-expectation schedule for the minibatch solver without momentum.

    Statement mode takes the displayed constants verbatim, including
    b_x = 48*sigma_x^2/eps; proof mode uses the batch sizes the proof sets
    (576*sigma_x^2/eps^2 and the 2304/512 dual pair).
    """
    _check_source(source)
    eps, delta = req.epsilon, req.delta
    lx0, lx1 = pc.lx0, pc.lx1
    sx, sy = pc.sigma_x, pc.sigma_y
    l_y, kt = dc.l_y, dc.kappa_tilde
    if l_y == 0.0:
        raise ConfigError("unschedulable: effective dual smoothness L_y is zero, eta_y = 1/L_y undefined")

    eta_x, ex_branch = _pick_min([
        ("eps/(48*kappa_tilde^2*lx0)", _div(eps, 48.0 * kt**2 * lx0)),
        ("sqrt(delta)/(32*kappa_tilde^2*lx1)", _div(math.sqrt(delta), 32.0 * kt**2 * lx1)),
    ])
    eta_y = 1.0 / l_y

    if source == "statement":
        bx_val = _div(48.0 * sx**2, eps)
        bx_branch = "48*sigma_x^2/eps"
        by_branches = [
            ("576*kappa_tilde*sigma_y^2/(eps^2*L_y^2)", _div(576.0 * kt * sy**2, eps**2 * l_y**2)),
            ("384*lx1^2*sigma_y^2/(delta*L_y^2)", _div(384.0 * lx1**2 * sy**2, delta * l_y**2)),
        ]
    else:
        bx_val = _div(576.0 * sx**2, eps**2)
        bx_branch = "576*sigma_x^2/eps^2"
        by_branches = [
            ("2304*kappa_tilde*sigma_y^2/(eps^2*L_y^2)", _div(2304.0 * kt * sy**2, eps**2 * l_y**2)),
            ("512*kappa_tilde*lx1^2*sigma_y^2/(delta*L_y^2)",
             _div(512.0 * kt * lx1**2 * sy**2, delta * l_y**2)),
        ]
    by_val, by_branch = _pick_max(by_branches)
    bx = _ceil_min1(bx_val) if bx_val > 0 else 1
    by = _ceil_min1(by_val) if by_val > 0 else 1

    t_val, t_branch = _pick_max([
        ("12*delta_phi/(eta_x*eps)", _div(12.0 * req.delta_phi, eta_x * eps)),
        ("96*lx0*kappa_tilde*delta_y0/eps", _div(96.0 * lx0 * kt * req.delta_y0, eps)),
    ])
    t_bound = _ceil_min1(t_val)

    hyper = HyperParams(eta_x=eta_x, eta_y=eta_y, beta=0.0, bx=bx, by=by, t_max=t_bound)
    return ScheduleResult(
        hyper=hyper,
        t_bound=t_bound,
        init_radius=_div(math.sqrt(delta), 16.0 * lx1),
        one_minus_beta=1.0,
        active_branch={
            "eta_x": ex_branch,
            "b_x": bx_branch,
            "b_y": by_branch,
            "t_bound": t_branch,
        },
    )


def schedule_thm4(
    pc: ProblemConstants,
    dc: DerivedConstants,
    req: ScheduleRequest,
    source: str = "statement",
) -> ScheduleResult:
    """High-probability schedule for the minibatch solver without momentum.

    Statement and proof differ in three places: the b_x constant (36864 vs
    46656), the last eta_x cap (16 vs 80 times lx1*kappa_tilde^2*sqrt(log)),
    and eta_y (1/L_y vs 1/(2*L_y)).
    """
    _check_source(source)
    eps, delta = req.epsilon, req.delta
    mu, lx0, lx1 = pc.mu, pc.lx0, pc.lx1
    sx = pc.sigma_x
    csy = pc.c_abs * pc.sigma_y
    l_y, kt = dc.l_y, dc.kappa_tilde
    if l_y == 0.0:
        raise ConfigError("unschedulable: effective dual smoothness L_y is zero, eta_y = 1/L_y undefined")
    log4d = math.log(4.0 / delta)
    log2ed = math.log(2.0 * math.e / delta)

    cap_coeff = 16.0 if source == "statement" else 80.0
    eta_x, ex_branch = _pick_min([
        ("eps/(96*lx0*kappa_tilde^2*sqrt(log(2e/delta)))",
         _div(eps, 96.0 * lx0 * kt**2 * math.sqrt(log2ed))),
        ("eps/(6*(kappa_tilde+1)*lx0)", _div(eps, 6.0 * (kt + 1.0) * lx0)),
        (f"1/({cap_coeff:g}*lx1*kappa_tilde^2*sqrt(log(2e/delta)))",
         _div(1.0, cap_coeff * lx1 * kt**2 * math.sqrt(log2ed))),
    ])
    eta_y = 1.0 / l_y if source == "statement" else 1.0 / (2.0 * l_y)

    bx_coeff = 36864.0 if source == "statement" else 46656.0
    bx_val = _div(bx_coeff * sx**2 * log4d, eps**2)
    by_val, by_branch = _pick_max([
        ("8192*lx1^2*(c*sigma_y)^2*log(2e/delta)/mu^2",
         _div(8192.0 * lx1**2 * csy**2 * log2ed, mu**2)),
        ("12288*lx0^2*(c*sigma_y)^2*log(2e/delta)/(mu^2*eps^2)",
         _div(12288.0 * lx0**2 * csy**2 * log2ed, mu**2 * eps**2)),
    ])
    bx = _ceil_min1(bx_val) if bx_val > 0 else 1
    by = _ceil_min1(by_val) if by_val > 0 else 1

    t_val, t_branch = _pick_max([
        ("12*delta_phi/(eta_x*eps)", _div(12.0 * req.delta_phi, eta_x * eps)),
        ("36*lx0*kappa_tilde*delta_y0/eps", _div(36.0 * lx0 * kt * req.delta_y0, eps)),
    ])
    t_bound = _ceil_min1(t_val)

    hyper = HyperParams(eta_x=eta_x, eta_y=eta_y, beta=0.0, bx=bx, by=by, t_max=t_bound)
    return ScheduleResult(
        hyper=hyper,
        t_bound=t_bound,
        init_radius=_div(1.0, 16.0 * lx1),
        one_minus_beta=1.0,
        active_branch={
            "eta_x": ex_branch,
            "b_x": f"{bx_coeff:g}*sigma_x^2*log(4/delta)/eps^2",
            "b_y": by_branch,
            "t_bound": t_branch,
        },
    )


def check_init(problem: MinimaxProblem, x0, y0, sched: ScheduleResult):
    """Measure ||y*(x0) - y0|| against the schedule's required radius.

    Returns (ok, measured). The bound is inclusive.
    """
    if not problem.has_best_response():
        raise ConfigError(
            "problem provides no best-response oracle; compute an approximate "
            "y*(x0) with verify.approx_best_response and compare its distance "
            "to y0 against sched.init_radius directly"
        )
    ystar = problem.best_response(np.asarray(x0, dtype=float))
    measured = float(np.linalg.norm(ystar - np.asarray(y0, dtype=float)))
    return measured <= sched.init_radius, measured


def _momentum_update(m: np.ndarray, beta: float, gx: np.ndarray) -> np.ndarray:
    # beta = 0 copies the gradient so the no-momentum solvers reduce to the
    # same bit pattern (0.0*m + 1.0*gx can flip zero signs).
    if beta == 0.0:
        return np.array(gx, dtype=float)
    return beta * m + (1.0 - beta) * gx


def _normalized_step(x: np.ndarray, eta_x: float, m: np.ndarray):
    """Fixed-length step along m; no-op on a zero vector.

    Computed as x - (eta_x/||m||)*m, which reproduces hand arithmetic on
    small examples; the division falls back to a pre-normalized direction
    if eta_x/||m|| overflows (subnormal ||m||).
    """
    nm = float(np.linalg.norm(m))
    if nm == 0.0:
        return x.copy()
    scale = eta_x / nm
    if math.isfinite(scale):
        return x - scale * m
    return x - eta_x * (m / nm)


def nsgda_m_step(
    state: IterateState,
    gx: np.ndarray,
    gy: np.ndarray,
    hp: HyperParams,
    domain: DualDomain,
) -> IterateState:
    """One momentum/normalized-descent/projected-ascent update."""
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    if gx.shape != state.x.shape or gy.shape != state.y.shape:
        raise ConfigError(
            f"gradient shapes {gx.shape}/{gy.shape} do not match state shapes "
            f"{state.x.shape}/{state.y.shape}"
        )
    if not np.isfinite(gx).all() or not np.isfinite(gy).all():
        raise NumericalAbortError(
            f"non-finite gradient at iteration {state.t}", state.t, [], state
        )
    m_new = _momentum_update(state.m, hp.beta, gx)
    x_new = _normalized_step(state.x, hp.eta_x, m_new)
    y_new = project(state.y + hp.eta_y * gy, domain).output
    return IterateState(x=x_new, y=y_new, m=m_new, t=state.t + 1)


class ExactEvaluator:
    """Metric oracles pulled straight from the problem's closed forms.

    grad_phi and best_resp return None when the problem does not provide the
    corresponding oracle; the run then records NaN for those metrics.
    """

    mode = "exact"

    def __init__(self, problem: MinimaxProblem):
        self._problem = problem
        self._has_pg = problem.has_primal_grad()
        self._has_br = problem.has_best_response()

    def grad_phi(self, x):
        return self._problem.primal_grad(x) if self._has_pg else None

    def best_resp(self, x):
        return self._problem.best_response(x) if self._has_br else None


class Recorder:
    """Row sink with a recording stride.

    Rows are taken every `stride` iterations plus once at the final iterate.
    evaluator overrides the metric oracles (bench uses this for approximate
    best-response evaluation); None means the problem's exact ones.
    """

    def __init__(self, stride: int = 1, evaluator=None):
        if not isinstance(stride, (int, np.integer)) or isinstance(stride, bool) or stride < 1:
            raise ConfigError(f"stride must be an integer >= 1, got {stride!r}")
        self.stride = int(stride)
        self.evaluator = evaluator
        self.rows: list[RunRecord] = []

    def add(self, row: RunRecord) -> None:
        self.rows.append(row)


@dataclass(frozen=True)
class RunResult:
    """Final state, the recorded rows, and the uniformly drawn output iterate."""

    final_state: IterateState
    records: tuple
    x_bar: np.ndarray


def _run(
    problem: MinimaxProblem,
    hp: HyperParams,
    x0,
    y0,
    seed: int,
    recorder: Recorder | None,
    momentum: bool,
    normalized: bool,
) -> RunResult:
    if recorder is None:
        recorder = Recorder(stride=1)
    evaluator = recorder.evaluator if recorder.evaluator is not None else ExactEvaluator(problem)

    domain = problem.dual_domain()
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ConfigError("x0 and y0 must be 1-d vectors")
    if not membership_check(y, domain, tol=1e-9):
        raise ConfigError("y0 is not feasible for the problem's dual domain")
    m = np.zeros_like(x)
    n_samples = problem.sample_count()
    sample_rng, choice_rng = make_streams(seed)

    t_max = hp.t_max
    stride = recorder.stride
    # Recorded iterations are known up front, so the output iterate can be
    # drawn before the loop and stashed when reached.
    n_recorded = len(range(0, t_max, stride)) + 1
    xbar_slot = int(choice_rng.integers(0, n_recorded))
    x_bar = None
    rec_i = 0
    start = time.perf_counter()

    def non_finite(t, vec):
        if not np.isfinite(vec).all():
            raise NumericalAbortError(
                f"non-finite gradient at iteration {t}",
                t,
                list(recorder.rows),
                IterateState(x=x, y=y, m=m, t=t),
            )

    for t in range(t_max):
        recording = t % stride == 0
        if recording:
            gp_vec = evaluator.grad_phi(x)
            ys_vec = evaluator.best_resp(x)
            gp_norm = float(np.linalg.norm(gp_vec)) if gp_vec is not None else math.nan
            tracking = float(np.linalg.norm(y - ys_vec)) if ys_vec is not None else math.nan
            loss = float(problem.loss(x, y))
            if rec_i == xbar_slot:
                x_bar = x.copy()

        idx_x = sample_rng.integers(0, n_samples, size=hp.bx)
        idx_y = sample_rng.integers(0, n_samples, size=hp.by)
        gx = problem.stoch_grad_x(x, y, idx_x)
        gy = problem.stoch_grad_y(x, y, idx_y)
        non_finite(t, gx)
        non_finite(t, gy)

        m = _momentum_update(m, hp.beta, gx) if momentum else np.array(gx, dtype=float)
        if normalized:
            x_new = _normalized_step(x, hp.eta_x, m)
        else:
            x_new = x - hp.eta_x * m
        y_new = project(y + hp.eta_y * gy, domain).output

        if recording:
            if momentum and gp_vec is not None:
                mom_bias = float(np.linalg.norm(m - gp_vec))
            else:
                mom_bias = math.nan
            recorder.add(RunRecord(
                t=t,
                grad_phi_norm=gp_norm,
                tracking_error=tracking,
                momentum_bias=mom_bias,
                loss=loss,
                step_x=float(np.linalg.norm(x_new - x)),
                step_y=float(np.linalg.norm(y_new - y)),
                wallclock_ms=(time.perf_counter() - start) * 1e3,
            ))
            rec_i += 1
        x, y = x_new, y_new

    gp_vec = evaluator.grad_phi(x)
    ys_vec = evaluator.best_resp(x)
    recorder.add(RunRecord(
        t=t_max,
        grad_phi_norm=float(np.linalg.norm(gp_vec)) if gp_vec is not None else math.nan,
        tracking_error=float(np.linalg.norm(y - ys_vec)) if ys_vec is not None else math.nan,
        momentum_bias=math.nan,
        loss=float(problem.loss(x, y)),
        step_x=math.nan,
        step_y=math.nan,
        wallclock_ms=(time.perf_counter() - start) * 1e3,
    ))
    if rec_i == xbar_slot:
        x_bar = x.copy()

    return RunResult(
        final_state=IterateState(x=x, y=y, m=m, t=t_max),
        records=tuple(recorder.rows),
        x_bar=x_bar,
    )


def nsgda_m_run(problem, hp, x0, y0, seed, recorder=None) -> RunResult:
    """Momentum solver: normalized primal step on the momentum buffer."""
    return _run(problem, hp, x0, y0, seed, recorder, momentum=True, normalized=True)


def nsgda_run(problem, hp, x0, y0, seed, recorder=None) -> RunResult:
    """Minibatch solver: normalized primal step on the minibatch mean."""
    return _run(problem, hp, x0, y0, seed, recorder, momentum=False, normalized=True)


def sgda_run(problem, hp, x0, y0, seed, recorder=None) -> RunResult:
    """Baseline: plain unnormalized primal step on the minibatch mean."""
    return _run(problem, hp, x0, y0, seed, recorder, momentum=False, normalized=False)
