"""Benchmark CLI: runs, grid search, schedules, probes, dataset stats.

Output contract: every run writes one CSV with a fixed header, one comment
line stamping the gradient-evaluation mode, and floats at 17 significant
digits, so reruns with the same seed are byte-identical apart from the
wallclock column. Grid search writes a table CSV sorted deterministically
and prints the winner. The optional plot subcommand renders saved run CSVs
to PNG files; the run/grid paths themselves never touch a plotting backend.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from .core import ConfigError, DataError, ProblemConstants, derive_constants
from .data import TABLE_COUNTS, load_dataset, take_subsample, to_feature_matrix
from .optimizers import (
    ExactEvaluator,
    HyperParams,
    NumericalAbortError,
    Recorder,
    ScheduleRequest,
    nsgda_m_run,
    nsgda_run,
    schedule_thm1,
    schedule_thm2,
    schedule_thm3,
    schedule_thm4,
    sgda_run,
)
from .problems import DroProblem, SyntheticProblem, synthetic_oracles
from . import verify as verify_mod

__all__ = [
    "ExperimentConfig",
    "GridSpec",
    "CSV_HEADER",
    "run_experiment",
    "grid_search",
    "parse_run_csv",
    "main",
]

CSV_HEADER = "iter,grad_phi_norm,tracking_error,momentum_bias,loss,step_x,step_y,wallclock_ms"

_ALGOS = ("nsgda-m", "nsgda", "sgda")
_RUNNERS = {"nsgda-m": nsgda_m_run, "nsgda": nsgda_run, "sgda": sgda_run}
_SCHEDULES = {"thm1": schedule_thm1, "thm2": schedule_thm2,
              "thm3": schedule_thm3, "thm4": schedule_thm4}


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


@dataclass
class ExperimentConfig:
    """One benchmark run. Exactly one of hyper / auto supplies hyperparameters."""

    algo: str
    dataset: str
    hyper: HyperParams | None = None
    auto: str | None = None
    constants: ProblemConstants | None = None
    request: ScheduleRequest | None = None
    schedule_source: str = "statement"
    m0_bias_auto: bool = False
    seed: int = 0
    iters: int | None = None
    record_every: int = 1
    eval_mode: str = "exact"
    take: int | None = None
    out: str = "."
    data_dir: str | None = None
    # synthetic-problem construction
    syn_dim_x: int = 20
    syn_dim_y: int = 10
    syn_mu: float = 1.0
    syn_weight: float = 1.0
    syn_coupling_scale: float = 1.0
    syn_noise_x: float = 0.0
    syn_noise_y: float = 0.0
    syn_noise_kind: str = "gaussian"
    syn_pool: int = 64
    syn_seed: int = 0
    x0_scale: float = 1.0

    def __post_init__(self):
        if self.algo not in _ALGOS:
            raise ConfigError(f"algo must be one of {_ALGOS}, got {self.algo!r}")
        if self.hyper is not None and self.auto is not None:
            raise ConfigError("hyper and auto=thmK are mutually exclusive")
        if self.auto is not None:
            if self.auto not in _SCHEDULES:
                raise ConfigError(f"auto must be one of {tuple(_SCHEDULES)}, got {self.auto!r}")
            if self.constants is None or self.request is None:
                raise ConfigError("auto schedules need constants and request")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        _parse_eval_mode(self.eval_mode)


@dataclass
class GridSpec:
    """Grid-search space; batch defaults per algorithm (momentum: 1, others: 50)."""

    eta_x_grid: tuple = (0.1, 0.01, 0.001, 0.0001, 1e-5, 1e-6)
    eta_y_grid: tuple = (0.1, 0.01, 0.001, 0.0001, 1e-5, 1e-6)
    beta_grid: tuple = (0.1, 0.4, 0.7, 0.9)
    batch: int | None = None
    selection_metric: str = "last10_mean"
    workers: int = 1

    def __post_init__(self):
        if not self.eta_x_grid or not self.eta_y_grid:
            raise ConfigError("stepsize grids must be non-empty")
        if self.selection_metric not in ("last10_mean", "final"):
            raise ConfigError(
                f"selection_metric must be 'last10_mean' or 'final', got {self.selection_metric!r}"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


def _parse_eval_mode(mode: str):
    if mode == "exact":
        return ("exact", None)
    if mode.startswith("approx:"):
        try:
            tol = float(mode.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad eval_mode {mode!r}; use exact or approx:<tol>") from None
        if not (tol > 0):
            raise ConfigError(f"approx tolerance must be > 0, got {tol}")
        return ("approx", tol)
    raise ConfigError(f"eval_mode must be 'exact' or 'approx:<tol>', got {mode!r}")


class _ApproxEvaluator:
    """Metric oracles via inner projected ascent instead of closed forms."""

    def __init__(self, problem, tol: float):
        self._problem = problem
        self._tol = tol
        self.mode = f"approx:{tol:.17g}"

    def best_resp(self, x):
        return verify_mod.approx_best_response(self._problem, x, tol=self._tol).y

    def grad_phi(self, x):
        return self._problem.full_grad_x(x, self.best_resp(x))


def build_problem(cfg: ExperimentConfig):
    """Construct (problem, x0, y0, label) from the config."""
    if cfg.dataset == "synthetic":
        rng = np.random.default_rng(cfg.syn_seed)
        a = cfg.syn_coupling_scale * rng.normal(size=(cfg.syn_dim_x, cfg.syn_dim_y))
        spec = SyntheticProblem(coupling=a, mu=cfg.syn_mu, quartic_weight=cfg.syn_weight)
        problem = synthetic_oracles(
            spec,
            noise_x=cfg.syn_noise_x,
            noise_y=cfg.syn_noise_y,
            noise_kind=cfg.syn_noise_kind,
            pool_size=cfg.syn_pool,
            seed=cfg.syn_seed,
        )
        x0 = np.full(cfg.syn_dim_x, cfg.x0_scale)
        y0 = np.zeros(cfg.syn_dim_y)
        return problem, x0, y0, "synthetic"
    ds = load_dataset(cfg.dataset, data_dir=cfg.data_dir)
    if cfg.take is not None:
        ds = take_subsample(ds, cfg.take, cfg.seed)
    features, labels = to_feature_matrix(ds)
    problem = DroProblem(features, labels, name=ds.name)
    x0 = np.zeros(problem.n_features)
    y0 = np.full(problem.n_samples, 1.0 / problem.n_samples)
    label = Path(cfg.dataset).stem if os.sep in cfg.dataset or "." in cfg.dataset else cfg.dataset
    if cfg.take is not None:
        label = f"{label}-take{cfg.take}"
    return problem, x0, y0, label


def _make_evaluator(cfg: ExperimentConfig, problem):
    kind, tol = _parse_eval_mode(cfg.eval_mode)
    if kind == "exact":
        if not problem.has_best_response():
            raise ConfigError(
                "eval_mode=exact needs a best-response oracle; use eval_mode=approx:<tol>"
            )
        return ExactEvaluator(problem)
    return _ApproxEvaluator(problem, tol)


def resolve_hyper(cfg: ExperimentConfig, problem, x0):
    """Return (hyper, schedule_result_or_None)."""
    if cfg.hyper is None and cfg.auto is None:
        raise ConfigError("a run needs one hyperparameter source: hyper or auto=thmK")
    if cfg.hyper is not None:
        hp = cfg.hyper
        if cfg.iters is not None:
            hp = replace(hp, t_max=cfg.iters)
        return hp, None
    req = cfg.request
    if cfg.m0_bias_auto and problem.has_primal_grad():
        # zero momentum start: the initial bias is the gradient norm itself
        req = replace(req, m0_bias=float(np.linalg.norm(problem.primal_grad(x0))))
    dc = derive_constants(cfg.constants)
    sched = _SCHEDULES[cfg.auto](cfg.constants, dc, req, source=cfg.schedule_source)
    hp = sched.hyper
    if cfg.iters is not None:
        hp = replace(hp, t_max=cfg.iters)
    return hp, sched


def write_run_csv(path, records, eval_mode: str) -> None:
    with open(path, "w") as f:
        f.write(f"# eval_mode={eval_mode}\n")
        f.write(CSV_HEADER + "\n")
        for r in records:
            f.write(",".join((
                str(r.t),
                _fmt(r.grad_phi_norm),
                _fmt(r.tracking_error),
                _fmt(r.momentum_bias),
                _fmt(r.loss),
                _fmt(r.step_x),
                _fmt(r.step_y),
                _fmt(r.wallclock_ms),
            )) + "\n")


def parse_run_csv(path):
    """Read a run CSV back into (columns dict, eval_mode)."""
    eval_mode = None
    rows = []
    with open(path) as f:
        header = None
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip().startswith("eval_mode="):
                    eval_mode = line.split("=", 1)[1]
                continue
            if header is None:
                header = line.split(",")
                if header != CSV_HEADER.split(","):
                    raise DataError(f"unexpected CSV header in {path}: {line!r}")
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if header is None:
        raise DataError(f"no header found in {path}")
    arr = np.asarray(rows, dtype=float) if rows else np.zeros((0, 8))
    cols = {name: arr[:, j] for j, name in enumerate(CSV_HEADER.split(","))}
    return cols, eval_mode


def run_experiment(cfg: ExperimentConfig):
    """Execute one run, write its CSV, print a summary line.

    Returns (csv_path, summary dict, RunResult). On a numerical abort the
    partial record stream is still written before the error propagates.
    """
    problem, x0, y0, label = build_problem(cfg)
    evaluator = _make_evaluator(cfg, problem)
    hp, sched = resolve_hyper(cfg, problem, x0)
    recorder = Recorder(stride=cfg.record_every, evaluator=evaluator)
    runner = _RUNNERS[cfg.algo]

    os.makedirs(cfg.out, exist_ok=True)
    csv_path = os.path.join(cfg.out, f"{cfg.algo}_{label}_s{cfg.seed}.csv")

    start = time.perf_counter()
    try:
        result = runner(problem, hp, x0, y0, cfg.seed, recorder)
    except NumericalAbortError as err:
        write_run_csv(csv_path, err.records, evaluator.mode)
        print(f"abort: {err} (partial CSV at {csv_path})", file=sys.stderr)
        raise
    wall_s = time.perf_counter() - start
    write_run_csv(csv_path, result.records, evaluator.mode)

    gp = np.array([r.grad_phi_norm for r in result.records])
    finite = gp[np.isfinite(gp)]
    summary = {
        "algo": cfg.algo,
        "dataset": label,
        "final_grad_phi_norm": float(gp[-1]) if gp.size else math.nan,
        "best_grad_phi_norm": float(finite.min()) if finite.size else math.nan,
        "wall_s": wall_s,
        "eta_x": hp.eta_x,
        "eta_y": hp.eta_y,
        "beta": hp.beta,
        "bx": hp.bx,
        "by": hp.by,
        "t_max": hp.t_max,
        "csv": csv_path,
    }
    if sched is not None:
        summary["t_bound"] = sched.t_bound
        summary["init_radius"] = sched.init_radius
    print(" ".join(
        f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items()
    ))
    return csv_path, summary, result


def _selection(records, metric: str) -> tuple[float, float]:
    gp = np.array([r.grad_phi_norm for r in records])
    final = float(gp[-1]) if gp.size else math.inf
    if metric == "final":
        sel = final
    else:
        k = max(1, math.ceil(0.1 * gp.size))
        sel = float(np.mean(gp[-k:]))
    if not math.isfinite(sel):
        sel = math.inf
    if not math.isfinite(final):
        final = math.inf
    return sel, final


def grid_search(cfg: ExperimentConfig, grid: GridSpec):
    """Run every grid combination with the shared base seed; returns (best, table_path).

    best is a dict of the winning hyperparameters and metrics; ties break
    toward smaller eta_x, then eta_y, then beta. Failed combinations rank
    at +inf and the search continues.
    """
    if cfg.hyper is not None or cfg.auto is not None:
        raise ConfigError("grid search owns the hyperparameters; leave hyper and auto unset")
    problem, x0, y0, label = build_problem(cfg)
    evaluator = _make_evaluator(cfg, problem)
    batch = grid.batch if grid.batch is not None else (1 if cfg.algo == "nsgda-m" else 50)
    iters = cfg.iters if cfg.iters is not None else 5000
    betas = grid.beta_grid if cfg.algo == "nsgda-m" else (0.0,)
    combos = sorted(product(grid.eta_x_grid, grid.eta_y_grid, betas))
    total = len(combos) * iters
    if total > 10**6:
        print(f"warning: grid runs {len(combos)} combos x {iters} iterations "
              f"({total} total)", file=sys.stderr)
    runner = _RUNNERS[cfg.algo]

    def one(combo):
        ex, ey, beta = combo
        hp = HyperParams(eta_x=ex, eta_y=ey, beta=beta, bx=batch, by=batch, t_max=iters)
        recorder = Recorder(stride=cfg.record_every, evaluator=evaluator)
        try:
            result = runner(problem, hp, x0, y0, cfg.seed, recorder)
        except NumericalAbortError as err:
            return combo, math.inf, math.inf, f"abort@{err.iteration}"
        sel, final = _selection(result.records, grid.selection_metric)
        return combo, sel, final, "ok"

    if grid.workers > 1:
        with ThreadPoolExecutor(max_workers=grid.workers) as pool:
            outcomes = list(pool.map(one, combos))
    else:
        outcomes = [one(c) for c in combos]

    outcomes.sort(key=lambda o: o[0])
    os.makedirs(cfg.out, exist_ok=True)
    table_path = os.path.join(cfg.out, f"grid_{cfg.algo}_{label}_s{cfg.seed}.csv")
    with open(table_path, "w") as f:
        f.write("algo,eta_x,eta_y,beta,bx,by,t_max,selection_metric,final_metric,status\n")
        for (ex, ey, beta), sel, final, status in outcomes:
            f.write(f"{cfg.algo},{_fmt(ex)},{_fmt(ey)},{_fmt(beta)},{batch},{batch},"
                    f"{iters},{_fmt(sel)},{_fmt(final)},{status}\n")

    best_combo, best_sel, best_final, best_status = min(
        outcomes, key=lambda o: (o[1], o[0][0], o[0][1], o[0][2])
    )
    best = {
        "algo": cfg.algo,
        "dataset": label,
        "eta_x": best_combo[0],
        "eta_y": best_combo[1],
        "beta": best_combo[2],
        "bx": batch,
        "by": batch,
        "t_max": iters,
        "selection_metric": best_sel,
        "final_metric": best_final,
        "status": best_status,
        "table": table_path,
    }
    print(" ".join(
        f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in best.items()
    ))
    return best, table_path


# ---------------------------------------------------------------------------
# CLI


def _add_data_args(p):
    p.add_argument("--dataset", default="synthetic",
                   help="dataset name, file path, or 'synthetic'")
    p.add_argument("--data-dir", default=None,
                   help="directory holding LIBSVM files (default: $GSMM_DATA_DIR)")
    p.add_argument("--take", type=int, default=None,
                   help="deterministic subsample size (uses the run seed)")


def _add_synthetic_args(p):
    p.add_argument("--syn-dim-x", type=int, default=20)
    p.add_argument("--syn-dim-y", type=int, default=10)
    p.add_argument("--syn-mu", type=float, default=1.0)
    p.add_argument("--syn-weight", type=float, default=1.0)
    p.add_argument("--syn-coupling-scale", type=float, default=1.0)
    p.add_argument("--syn-noise-x", type=float, default=0.0)
    p.add_argument("--syn-noise-y", type=float, default=0.0)
    p.add_argument("--syn-noise-kind", choices=("gaussian", "bounded"), default="gaussian")
    p.add_argument("--syn-pool", type=int, default=64)
    p.add_argument("--syn-seed", type=int, default=0)
    p.add_argument("--x0-scale", type=float, default=1.0)


def _add_constant_args(p):
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--lx0", type=float, default=0.0)
    p.add_argument("--lx1", type=float, default=0.0)
    p.add_argument("--ly0", type=float, default=0.0)
    p.add_argument("--ly1", type=float, default=0.0)
    p.add_argument("--sigma-x", type=float, default=0.0)
    p.add_argument("--sigma-y", type=float, default=0.0)
    p.add_argument("--c-abs", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--delta-phi", type=float, default=None)
    p.add_argument("--delta-y0", type=float, default=0.0)
    p.add_argument("--m0-bias", type=float, default=None,
                   help="||m0 - grad Phi(x0)||; default: computed from the oracle at x0")
    p.add_argument("--schedule-source", choices=("statement", "proof"), default="statement")


def _constants_from_args(args) -> ProblemConstants:
    if args.mu is None:
        raise ConfigError("--mu is required for schedules")
    return ProblemConstants(
        mu=args.mu, b=args.b, lx0=args.lx0, lx1=args.lx1, ly0=args.ly0,
        ly1=args.ly1, sigma_x=args.sigma_x, sigma_y=args.sigma_y, c_abs=args.c_abs,
    )


def _request_from_args(args, m0_default=0.0) -> ScheduleRequest:
    for name in ("epsilon", "delta", "delta_phi"):
        if getattr(args, name) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for schedules")
    return ScheduleRequest(
        epsilon=args.epsilon, delta=args.delta, delta_phi=args.delta_phi,
        delta_y0=args.delta_y0,
        m0_bias=args.m0_bias if args.m0_bias is not None else m0_default,
    )


def _config_from_args(args, need_hyper: bool) -> ExperimentConfig:
    hyper = None
    auto = getattr(args, "auto", None)
    constants = None
    request = None
    if need_hyper:
        if auto is not None:
            constants = _constants_from_args(args)
            request = _request_from_args(args)
        else:
            if args.eta_x is None or args.eta_y is None:
                raise ConfigError("--eta-x and --eta-y are required without --auto")
            hyper = HyperParams(
                eta_x=args.eta_x, eta_y=args.eta_y, beta=args.beta,
                bx=args.bx, by=args.by,
                t_max=args.iters if args.iters is not None else 5000,
            )
    return ExperimentConfig(
        algo=getattr(args, "algo", "nsgda-m"),
        dataset=args.dataset,
        hyper=hyper,
        auto=auto,
        constants=constants,
        request=request,
        schedule_source=getattr(args, "schedule_source", "statement"),
        m0_bias_auto=auto is not None and args.m0_bias is None,
        seed=args.seed,
        iters=args.iters,
        record_every=args.record_every,
        eval_mode=args.eval_mode,
        take=args.take,
        out=args.out,
        data_dir=args.data_dir,
        syn_dim_x=args.syn_dim_x,
        syn_dim_y=args.syn_dim_y,
        syn_mu=args.syn_mu,
        syn_weight=args.syn_weight,
        syn_coupling_scale=args.syn_coupling_scale,
        syn_noise_x=args.syn_noise_x,
        syn_noise_y=args.syn_noise_y,
        syn_noise_kind=args.syn_noise_kind,
        syn_pool=args.syn_pool,
        syn_seed=args.syn_seed,
        x0_scale=args.x0_scale,
    )


def _cmd_run(args) -> int:
    cfg = _config_from_args(args, need_hyper=True)
    run_experiment(cfg)
    return 0


def _cmd_grid(args) -> int:
    cfg = _config_from_args(args, need_hyper=False)
    grid = GridSpec(
        eta_x_grid=tuple(args.eta_x_grid),
        eta_y_grid=tuple(args.eta_y_grid),
        beta_grid=tuple(args.beta_grid),
        batch=args.batch,
        selection_metric=args.selection_metric,
        workers=args.workers,
    )
    grid_search(cfg, grid)
    return 0


def _cmd_schedule(args) -> int:
    pc = _constants_from_args(args)
    req = _request_from_args(args)
    dc = derive_constants(pc)
    sched = _SCHEDULES[args.thm](pc, dc, req, source=args.schedule_source)
    hp = sched.hyper
    print(f"eta_x={_fmt(hp.eta_x)}")
    print(f"eta_y={_fmt(hp.eta_y)}")
    print(f"beta={_fmt(hp.beta)}")
    print(f"bx={hp.bx}")
    print(f"by={hp.by}")
    print(f"t_bound={sched.t_bound}")
    print(f"init_radius={_fmt(sched.init_radius)}")
    print(f"one_minus_beta={_fmt(sched.one_minus_beta)}")
    for key, value in sorted(sched.active_branch.items()):
        print(f"active_branch.{key}={value}")
    return 0


def _cmd_parse(args) -> int:
    ds = load_dataset(args.dataset, data_dir=args.data_dir, n_features=args.n_features,
                      check_counts=not args.no_check)
    pos = int(np.sum(ds.labels == 1.0))
    neg = int(np.sum(ds.labels == -1.0))
    print(f"name={ds.name}")
    print(f"samples={ds.n_samples}")
    print(f"features={ds.n_features}")
    print(f"labels=+1:{pos},-1:{neg}")
    print(f"label_map={ds.label_map}")
    if ds.name in TABLE_COUNTS:
        want = TABLE_COUNTS[ds.name]
        ok = (ds.n_samples, ds.n_features) == want
        print(f"table_match={'yes' if ok else 'no'} (expected {want[0]}x{want[1]})")
    return 0


def _cmd_verify(args) -> int:
    checks = []

    def report(label, ok, msg):
        checks.append(ok)
        print(f"{'ok' if ok else 'FAIL'} {label}: {msg}")

    rng = np.random.default_rng(args.seed)

    # quartic line probe: gradient-difference ratios grow with the gradient
    # norm, so a slope term is needed where a constant Lipschitz fit fails
    spec = SyntheticProblem(coupling=np.zeros((1, 1)), mu=1.0, quartic_weight=1.0)
    quartic = synthetic_oracles(spec)

    def far_pairs():
        u = np.array([rng.uniform(5.0, 10.0) * rng.choice((-1.0, 1.0))])
        return u, u + rng.uniform(-0.05, 0.05)

    rep = verify_mod.probe_generalized_smoothness(
        quartic.primal_grad, far_pairs, radius=0.05, n=args.pairs
    )
    free = rep.extras["fit_residual_rms"]
    const = rep.extras["fit_residual_l1_zero_rms"]
    ratio = const / free if free > 0 else math.inf
    report("smoothness-fit", ratio >= 10.0,
           f"slope fit residual {free:.4g}, constant fit {const:.4g} "
           f"(ratio {ratio:.3g}, fitted L0={rep.fitted[0]:.4g}, L1={rep.fitted[1]:.4g})")

    cfg = _config_from_args(args, need_hyper=False)
    if args.dataset != "synthetic" and cfg.take is None:
        cfg.take = 60  # keeps the exhaustive probes and ascent loops quick
    problem, x0, _, label = build_problem(cfg)

    xp = rng.normal(size=x0.size) * 0.5
    yp = problem.best_response(xp)

    gx_fd = verify_mod.finite_diff(
        lambda v: problem.loss(v, yp) if args.dataset == "synthetic"
        else problem.loss(v, yp, validate=False), xp)
    gx = problem.full_grad_x(xp, yp)
    rel = np.linalg.norm(gx_fd - gx) / max(1.0, np.linalg.norm(gx))
    report(f"grad-x[{label}]", rel <= 1e-5, f"finite-diff relative error {rel:.3g}")

    gy_fd = verify_mod.finite_diff(
        lambda v: problem.loss(xp, v) if args.dataset == "synthetic"
        else problem.loss(xp, v, validate=False), yp)
    gy = problem.full_grad_y(xp, yp)
    rel = np.linalg.norm(gy_fd - gy) / max(1.0, np.linalg.norm(gy))
    report(f"grad-y[{label}]", rel <= 1e-5, f"finite-diff relative error {rel:.3g}")

    n = problem.sample_count()
    y_mid = np.full(n, 1.0 / n) if problem.dual_domain().kind == "simplex" else yp
    rep = verify_mod.probe_unbiasedness(problem, xp, y_mid, "exhaustive")
    report(f"unbiasedness-exhaustive[{label}]", rep.max_violation <= 1e-12,
           f"relative deviation {rep.max_violation:.3g} over {rep.n_points} indices")

    rep = verify_mod.probe_unbiasedness(problem, xp, y_mid, args.draws, seed=args.seed)
    report(f"unbiasedness-mc[{label}]", rep.max_violation <= 5.0,
           f"worst |mean-full| = {rep.max_violation:.3g} standard errors over "
           f"{rep.n_points} draws; sigma_x_hat^2={rep.extras['sigma_x_hat_sq']:.4g}, "
           f"sigma_y_hat^2={rep.extras['sigma_y_hat_sq']:.4g}")

    app = verify_mod.approx_best_response(problem, xp, tol=1e-10)
    gap = float(np.linalg.norm(app.y - yp))
    report(f"approx-best-response[{label}]", gap <= 1e-6,
           f"ascent vs closed form gap {gap:.3g} after {app.iterations} iterations")

    rep = verify_mod.probe_lipschitz_best_response(problem, args.pairs, max_step=0.5,
                                                   seed=args.seed)
    report(f"best-response-lipschitz[{label}]", math.isfinite(rep.extras["max_ratio"]),
           f"max ratio {rep.extras['max_ratio']:.4g}, empirical B_hat "
           f"{rep.extras['b_hat']:.4g} over {rep.n_points} pairs")

    return 0 if all(checks) else 1


def _cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(args.out, exist_ok=True)
    written = []
    for metric, fname, logy in (
        ("grad_phi_norm", "convergence.png", True),
        ("loss", "loss.png", False),
    ):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        plotted = False
        for path in args.csv:
            cols, _ = parse_run_csv(path)
            vals = cols[metric]
            mask = np.isfinite(vals)
            if not mask.any():
                continue
            ax.plot(cols["iter"][mask], vals[mask], label=Path(path).stem)
            plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel("iteration")
        ax.set_ylabel(metric)
        if logy:
            ax.set_yscale("log")
        ax.legend(fontsize=8)
        fig.tight_layout()
        out_path = os.path.join(args.out, fname)
        fig.savefig(out_path, dpi=120)
        plt.close(fig)
        written.append(out_path)
        print(f"wrote {out_path}")
    if not written:
        raise ConfigError("no finite data to plot in the given CSVs")
    return 0


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsmm",
        description="Benchmarks for stochastic minimax solvers under generalized smoothness",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    run_p = sub.add_parser("run", help="single experiment, writes one CSV")
    run_p.add_argument("--algo", choices=_ALGOS, required=True)
    _add_data_args(run_p)
    _add_synthetic_args(run_p)
    run_p.add_argument("--eta-x", type=float, default=None)
    run_p.add_argument("--eta-y", type=float, default=None)
    run_p.add_argument("--beta", type=float, default=0.0)
    run_p.add_argument("--bx", type=int, default=1)
    run_p.add_argument("--by", type=int, default=1)
    run_p.add_argument("--auto", choices=tuple(_SCHEDULES), default=None,
                       help="derive hyperparameters from a theorem schedule")
    _add_constant_args(run_p)
    run_p.add_argument("--iters", type=int, default=None)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--record-every", type=int, default=1)
    run_p.add_argument("--eval-mode", default="exact")
    run_p.add_argument("--out", default=".")
    run_p.set_defaults(func=_cmd_run)

    grid_p = sub.add_parser("grid", help="grid search over stepsizes (and beta)")
    grid_p.add_argument("--algo", choices=_ALGOS, required=True)
    _add_data_args(grid_p)
    _add_synthetic_args(grid_p)
    grid_p.add_argument("--eta-x-grid", type=_float_list,
                        default=[0.1, 0.01, 0.001, 0.0001, 1e-5, 1e-6])
    grid_p.add_argument("--eta-y-grid", type=_float_list,
                        default=[0.1, 0.01, 0.001, 0.0001, 1e-5, 1e-6])
    grid_p.add_argument("--beta-grid", type=_float_list, default=[0.1, 0.4, 0.7, 0.9])
    grid_p.add_argument("--batch", type=int, default=None,
                        help="batch size (default 1 for nsgda-m, 50 otherwise)")
    grid_p.add_argument("--selection-metric", choices=("last10_mean", "final"),
                        default="last10_mean")
    grid_p.add_argument("--workers", type=int, default=1)
    grid_p.add_argument("--iters", type=int, default=None)
    grid_p.add_argument("--seed", type=int, default=0)
    grid_p.add_argument("--record-every", type=int, default=1)
    grid_p.add_argument("--eval-mode", default="exact")
    grid_p.add_argument("--out", default=".")
    grid_p.set_defaults(func=_cmd_grid)

    sched_p = sub.add_parser("schedule", help="print a theorem schedule as key=value lines")
    sched_p.add_argument("--thm", choices=tuple(_SCHEDULES), required=True)
    _add_constant_args(sched_p)
    sched_p.set_defaults(func=_cmd_schedule)

    ver_p = sub.add_parser("verify", help="run the oracle/assumption probe suite")
    _add_data_args(ver_p)
    _add_synthetic_args(ver_p)
    ver_p.add_argument("--pairs", type=int, default=200)
    ver_p.add_argument("--draws", type=int, default=2000)
    ver_p.add_argument("--seed", type=int, default=0)
    ver_p.add_argument("--iters", type=int, default=None)
    ver_p.add_argument("--record-every", type=int, default=1)
    ver_p.add_argument("--eval-mode", default="exact")
    ver_p.add_argument("--out", default=".")
    ver_p.set_defaults(func=_cmd_verify)

    parse_p = sub.add_parser("parse", help="dataset statistics")
    parse_p.add_argument("--dataset", required=True)
    parse_p.add_argument("--data-dir", default=None)
    parse_p.add_argument("--n-features", type=int, default=None)
    parse_p.add_argument("--no-check", action="store_true",
                         help="skip the benchmark-table count check")
    parse_p.set_defaults(func=_cmd_parse)

    plot_p = sub.add_parser("plot", help="render saved run CSVs to PNG files")
    plot_p.add_argument("--csv", nargs="+", required=True)
    plot_p.add_argument("--out", default=".")
    plot_p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 3
    except NumericalAbortError as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
