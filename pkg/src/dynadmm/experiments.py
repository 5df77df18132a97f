"""Seeded experiment harness: sharing, lasso, and bound-audit runs to CSV.

Each experiment draws one problem stream per trial from an independent
seed (base seed plus trial index), runs the one-pass tracker against a
per-step oracle, and writes trial-averaged curves as CSV.  Averaging is
the arithmetic mean of the per-trial error norms at each step; margin
columns aggregate with min instead, so the written value is the worst
observed margin.  Outputs are byte-identical for identical (config,
seed): trials reduce in index order no matter how many workers ran them,
and floats serialize with 17 significant digits.

Undefined entries (first-step drift and the bounds that compare against
a previous optimum) serialize as ``nan``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import partial
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConfigError, ConvergenceError
from .lasso import LassoProblem
from .lasso import assemble as lasso_assemble
from .metrics import (
    audit_trajectory,
    constants_from_stream,
    max_contraction,
    sparsity_deviation,
    steady_state_report,
)
from .oracle import OracleConfig, solve_exact_kkt, solve_static_admm
from .problem import ProblemInstance, ScaledL1, gradient
from .sharing import assemble as sharing_assemble
from .solver import AdmmState, SolverConfig, initial_state, run_dynamic, step
from .synth import (
    LassoStreamConfig,
    QuadStreamConfig,
    RngStream,
    SharingStreamConfig,
    lasso_stream,
    quadratic_stream,
    sharing_stream,
)

__all__ = [
    "MARGIN_TOLERANCE",
    "RunConfig",
    "RunArtifacts",
    "MarginViolation",
    "default_config",
    "parse_config_text",
    "load_config_file",
    "build_config",
    "run_sharing",
    "run_lasso",
    "run_bounds",
    "run_experiment",
    "read_csv_columns",
    "format_float",
]

# Inequality slack absorbing float roundoff in audited margins.
MARGIN_TOLERANCE = 1e-9

_EXPERIMENTS = ("sharing", "lasso", "bounds")
_INT_FIELDS = ("n", "p", "m", "q", "steps", "trials", "seed")
_FLOAT_FIELDS = ("eta", "eps", "gamma", "rho", "sigma")

# Defaults per experiment; fields an experiment ignores still carry a
# value so one flat config format serves all three subcommands.
_COMMON_DEFAULTS = dict(m=10, q=2, sigma=0.1, seed=0, rho_sweep=None, output_dir=".")
_DEFAULTS = {
    "sharing": dict(
        _COMMON_DEFAULTS, n=20, p=5, eta=0.2, eps=1.0, gamma=1.0, rho=1.0,
        steps=60, trials=100,
    ),
    "lasso": dict(
        _COMMON_DEFAULTS, n=20, p=30, eta=0.01, eps=1.0, gamma=0.2, rho=1.0,
        steps=100, trials=100,
    ),
    "bounds": dict(
        _COMMON_DEFAULTS, n=20, p=5, eta=0.2, eps=1.0, gamma=1.0, rho=1.0,
        steps=100, trials=1,
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one experiment run.

    The same field set covers all three experiments; an experiment reads
    only the fields it needs (sharing: n, p, eta, eps, gamma, rho; lasso:
    m, p, q, eta, sigma, gamma, rho; bounds: p, eta, eps, rho).
    """

    experiment: str
    n: int
    p: int
    m: int
    q: int
    eta: float
    eps: float
    gamma: float
    rho: float
    sigma: float
    steps: int
    trials: int
    seed: int
    rho_sweep: Optional[tuple[float, ...]] = None
    output_dir: str = "."

    def __post_init__(self) -> None:
        if self.experiment not in _EXPERIMENTS:
            raise ConfigError(
                f"experiment must be one of {_EXPERIMENTS}, got {self.experiment!r}"
            )
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        for name in ("n", "p", "m", "q", "steps", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.q > self.p:
            raise ConfigError(f"q ({self.q}) cannot exceed p ({self.p})")
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.eta < 0.0:
            raise ConfigError(f"eta must be nonnegative, got {self.eta}")
        if self.sigma < 0.0:
            raise ConfigError(f"sigma must be nonnegative, got {self.sigma}")
        for name in ("eps", "gamma", "rho"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.rho_sweep is not None:
            sweep = tuple(float(r) for r in self.rho_sweep)
            if not sweep:
                raise ConfigError("rho_sweep cannot be empty")
            for r in sweep:
                if not (math.isfinite(r) and r > 0.0):
                    raise ConfigError(f"rho_sweep values must be positive, got {r}")
            if len(set(sweep)) != len(sweep):
                raise ConfigError(f"rho_sweep has duplicate values: {sweep}")
            object.__setattr__(self, "rho_sweep", sweep)
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a nonempty path string")


def default_config(experiment: str) -> RunConfig:
    """Built-in defaults for an experiment."""
    if experiment not in _DEFAULTS:
        raise ConfigError(
            f"experiment must be one of {_EXPERIMENTS}, got {experiment!r}"
        )
    return RunConfig(experiment=experiment, **_DEFAULTS[experiment])


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def _coerce_value(key: str, text: str):
    try:
        if key in _INT_FIELDS:
            return int(text)
        if key in _FLOAT_FIELDS:
            return float(text)
        if key == "rho_sweep":
            return tuple(float(piece) for piece in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key}={text!r}: {exc}") from exc
    return text  # experiment, output_dir


def parse_config_text(text: str) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment.

    Keys must be RunConfig field names; anything else is a hard error, as
    is a duplicated key.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce_value(key, value)
    return values


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def build_config(
    experiment: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None
) -> RunConfig:
    """Merge defaults, config-file values, and flag overrides, in that order.

    The experiment comes from the subcommand; a config file may repeat it
    but may not contradict it.
    """
    if experiment not in _DEFAULTS:
        raise ConfigError(
            f"experiment must be one of {_EXPERIMENTS}, got {experiment!r}"
        )
    merged = dict(_DEFAULTS[experiment])
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "experiment":
                if value != experiment:
                    raise ConfigError(
                        f"config names experiment {value!r} but the "
                        f"{experiment!r} subcommand was invoked"
                    )
                continue
            merged[key] = value
    return RunConfig(experiment=experiment, **merged)


@dataclass(frozen=True)
class MarginViolation:
    """One audited inequality that came out below the tolerance."""

    trial: int
    k: int
    name: str
    margin: float


@dataclass(frozen=True)
class RunArtifacts:
    """What an experiment run produced and observed."""

    paths: tuple[Path, ...]
    max_stationarity: Optional[float] = None
    violations: tuple[MarginViolation, ...] = ()


# ------------------------------------------------------------- CSV output


def format_float(value: float) -> str:
    """17-significant-digit decimal, enough to round-trip float64."""
    return format(float(value), ".17g")


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format_float(value)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_format_cell(cell) for cell in row) + "\n")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read one of this module's CSVs back into named float columns."""
    with open(path, "r", newline="") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    if not lines:
        raise ConfigError(f"{path} is empty")
    names = lines[0].split(",")
    data = np.full((len(lines) - 1, len(names)), np.nan)
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != len(names):
            raise ConfigError(f"{path} row {i + 2} has {len(cells)} cells, expected {len(names)}")
        data[i] = [float(cell) for cell in cells]
    return {name: data[:, j].copy() for j, name in enumerate(names)}


# ---------------------------------------------------- stationarity audits


def _subproblem_residual(
    inst: ProblemInstance, prev: AdmmState, cur: AdmmState, rho: float
) -> float:
    """Optimality residual of both block updates that produced ``cur``.

    The x block must be stationary given (z_prev, lam_prev); the z block
    must be stationary (smooth g) or satisfy subgradient membership (l1,
    which the assemblies pose with B = -I and c = 0) given (x_new,
    lam_prev).  Returns the largest per-coordinate deviation.
    """
    ax = inst.A @ cur.x
    rx = gradient(inst.f, cur.x) + inst.A.T @ (
        prev.lam + rho * (ax + inst.B @ prev.z - inst.c)
    )
    worst = float(np.max(np.abs(rx)))
    if isinstance(inst.g, ScaledL1):
        t = prev.lam + rho * (ax - cur.z)
        gamma = inst.g.gamma
        on = cur.z != 0.0
        dev_on = float(np.max(np.abs(t[on] - gamma * np.sign(cur.z[on])), initial=0.0))
        dev_off = float(np.max(np.abs(t[~on]) - gamma, initial=0.0))
        worst_z = max(dev_on, max(dev_off, 0.0))
    else:
        rz = gradient(inst.g, cur.z) + inst.B.T @ (
            prev.lam + rho * (ax + inst.B @ cur.z - inst.c)
        )
        worst_z = float(np.max(np.abs(rz)))
    return max(worst, worst_z)


# ------------------------------------------------------- sharing (Figs 1-2)


def _sharing_rhos(cfg: RunConfig) -> tuple[float, ...]:
    return cfg.rho_sweep if cfg.rho_sweep is not None else (cfg.rho,)


def _solve_stream_optima(instances, oracle_config, trial):
    """Warm-started per-step oracle pass; failures name the trial."""
    optima = []
    prev = None
    for inst in instances:
        try:
            prev = solve_static_admm(inst, oracle_config, start=prev)
        except ConvergenceError as exc:
            raise ConvergenceError(f"trial {trial}, step {inst.k}: {exc}") from exc
        optima.append(prev)
    return optima


def _sharing_trial(cfg: RunConfig, audit: bool, trial: int):
    rng = RngStream(cfg.seed + trial)
    problems = sharing_stream(
        SharingStreamConfig(n=cfg.n, p=cfg.p, eta=cfg.eta, floor=cfg.eps, gamma=cfg.gamma),
        cfg.steps,
        rng,
    )
    instances = [sharing_assemble(sp, k) for k, sp in enumerate(problems, start=1)]
    optima = _solve_stream_optima(instances, OracleConfig(method="static_admm"), trial)
    rhos = _sharing_rhos(cfg)
    errs = np.empty((len(rhos), cfg.steps))
    worst = 0.0
    for r_idx, rho in enumerate(rhos):
        solver_config = SolverConfig(rho=rho)
        state = initial_state(instances[0].dim_x, instances[0].dim_z)
        for s_idx, inst in enumerate(instances):
            new = step(state, inst, solver_config)
            if audit:
                worst = max(worst, _subproblem_residual(inst, state, new, rho))
            errs[r_idx, s_idx] = np.linalg.norm(new.x - optima[s_idx].x)
            state = new
    return errs, worst


def _map_trials(worker, cfg: RunConfig, jobs: int, *extra):
    bound = partial(worker, cfg, *extra)
    if jobs <= 1:
        return [bound(trial) for trial in range(cfg.trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(bound, range(cfg.trials)))


def _output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_sharing(
    cfg: RunConfig, jobs: int = 1, audit_subproblems: bool = False
) -> RunArtifacts:
    """Trial-averaged tracking error of the sharing stream, one CSV per
    penalty value (a single file without a sweep)."""
    if cfg.experiment != "sharing":
        raise ConfigError(f"run_sharing needs a sharing config, got {cfg.experiment!r}")
    results = _map_trials(_sharing_trial, cfg, jobs, audit_subproblems)
    rhos = _sharing_rhos(cfg)
    total = np.zeros((len(rhos), cfg.steps))
    worst = 0.0
    for errs, stationarity in results:
        total += errs
        worst = max(worst, stationarity)
    means = total / cfg.trials
    out = _output_dir(cfg)
    paths = []
    for r_idx, rho in enumerate(rhos):
        name = "sharing.csv" if cfg.rho_sweep is None else f"sharing_rho_{rho:g}.csv"
        path = out / name
        _write_csv(
            path,
            ["k", "err_x"],
            ([k + 1, means[r_idx, k]] for k in range(cfg.steps)),
        )
        paths.append(path)
    return RunArtifacts(
        paths=tuple(paths),
        max_stationarity=worst if audit_subproblems else None,
    )


# --------------------------------------------------------- lasso (Figs 3-5)

_TRAJECTORY_HEADER = ["k", "admm_1", "admm_2", "oracle_1", "oracle_2", "truth_1", "truth_2"]


def _lasso_trial(cfg: RunConfig, audit: bool, trial: int):
    rng = RngStream(cfg.seed + trial)
    pairs = lasso_stream(
        LassoStreamConfig(
            m=cfg.m, p=cfg.p, q=cfg.q, eta=cfg.eta, sigma=cfg.sigma, gamma=cfg.gamma
        ),
        cfg.steps,
        rng,
    )
    instances = [lasso_assemble(lp, k) for k, (lp, _) in enumerate(pairs, start=1)]
    optima = _solve_stream_optima(instances, OracleConfig(method="static_admm"), trial)
    support = pairs[0][1].support
    metrics = np.empty((5, cfg.steps))
    worst = 0.0
    states = []
    solver_config = SolverConfig(rho=cfg.rho)
    state = initial_state(instances[0].dim_x, instances[0].dim_z)
    for s_idx, inst in enumerate(instances):
        new = step(state, inst, solver_config)
        if audit:
            worst = max(worst, _subproblem_residual(inst, state, new, cfg.rho))
        truth = pairs[s_idx][1].values
        opt = optima[s_idx]
        metrics[0, s_idx] = np.linalg.norm(new.x - opt.x)
        metrics[1, s_idx] = np.linalg.norm(new.x - truth)
        metrics[2, s_idx] = np.linalg.norm(opt.x - truth)
        metrics[3, s_idx] = sparsity_deviation(new.x, support)
        metrics[4, s_idx] = sparsity_deviation(opt.x, support)
        states.append(new)
        state = new
    trajectory = None
    if trial == 0 and cfg.q >= 2:
        # the two tracked coordinates are the first two support indices
        i0, i1 = int(support[0]), int(support[1])
        rows = []
        for k in range(10, cfg.steps + 1, 10):
            x = states[k - 1].x
            ox = optima[k - 1].x
            tx = pairs[k - 1][1].values
            rows.append([k, x[i0], x[i1], ox[i0], ox[i1], tx[i0], tx[i1]])
        trajectory = rows
    return metrics, worst, trajectory


def run_lasso(
    cfg: RunConfig, jobs: int = 1, audit_subproblems: bool = False
) -> RunArtifacts:
    """Trial-averaged tracking, ground-truth gaps, and sparsity deviations,
    plus the trial-0 support-coordinate trajectory every 10th step."""
    if cfg.experiment != "lasso":
        raise ConfigError(f"run_lasso needs a lasso config, got {cfg.experiment!r}")
    results = _map_trials(_lasso_trial, cfg, jobs, audit_subproblems)
    total = np.zeros((5, cfg.steps))
    worst = 0.0
    trajectory = None
    for metrics, stationarity, rows in results:
        total += metrics
        worst = max(worst, stationarity)
        if rows is not None:
            trajectory = rows
    means = total / cfg.trials
    out = _output_dir(cfg)
    main_path = out / "lasso.csv"
    _write_csv(
        main_path,
        ["k", "err_x", "err_x_truth", "err_oracle_truth", "sparsity_admm", "sparsity_oracle"],
        ([k + 1] + [means[j, k] for j in range(5)] for k in range(cfg.steps)),
    )
    paths = [main_path]
    if trajectory is not None:
        traj_path = out / "lasso_trajectory.csv"
        _write_csv(traj_path, _TRAJECTORY_HEADER, trajectory)
        paths.append(traj_path)
    return RunArtifacts(
        paths=tuple(paths),
        max_stationarity=worst if audit_subproblems else None,
    )


# ------------------------------------------------------------ bound audits

_BOUNDS_HEADER = ["k", "err_x", "err_u_c", "drift", "prop1_margin", "thm1_margin", "thm2_x_margin"]
_SUMMARY_HEADER = [
    "trial", "drift_bound", "delta",
    "bound_u_c", "bound_x", "bound_z", "bound_lam",
    "trailing_u_c", "trailing_x", "trailing_z", "trailing_lam",
]


def _bounds_trial(cfg: RunConfig, audit: bool, trial: int):
    rng = RngStream(cfg.seed + trial)
    stream = quadratic_stream(
        QuadStreamConfig(dim=cfg.p, eta=cfg.eta, floor=cfg.eps), cfg.steps, rng
    )
    states = run_dynamic(stream, SolverConfig(rho=cfg.rho))
    optima = [solve_exact_kkt(inst) for inst in stream]
    records = audit_trajectory(stream, states, optima, cfg.rho)
    worst = 0.0
    if audit:
        prev = initial_state(stream[0].dim_x, stream[0].dim_z)
        for inst, cur in zip(stream, states):
            worst = max(worst, _subproblem_residual(inst, prev, cur, cfg.rho))
            prev = cur
    table = np.full((6, cfg.steps), np.nan)
    violations = []
    for i, rec in enumerate(records):
        table[0, i] = rec.err_x
        table[1, i] = rec.err_pair
        if rec.drift is not None:
            table[2, i] = rec.drift
        table[3, i] = rec.contraction_margin
        if rec.tracking_margin is not None:
            table[4, i] = rec.tracking_margin
        if rec.x_margin is not None:
            table[5, i] = rec.x_margin
        checks = [
            ("prop1_margin", rec.contraction_margin),
            ("thm1_margin", rec.tracking_margin),
            ("thm2_x_margin", rec.x_margin),
            ("thm2_z_margin", rec.z_margin),
            ("thm2_lam_margin", rec.lam_margin),
        ]
        for name, margin in checks:
            if margin is not None and margin < -MARGIN_TOLERANCE:
                violations.append(MarginViolation(trial, rec.k, name, margin))
    summary = None
    if cfg.steps >= 2:
        consts = constants_from_stream(stream)
        params = max_contraction(consts, cfg.rho)
        report = steady_state_report(records, consts, cfg.rho, params.delta)
        summary = [
            trial, report.drift_bound, params.delta,
            report.bounds.pair_error, report.bounds.x_error,
            report.bounds.z_error, report.bounds.lam_error,
            report.trailing_pair, report.trailing_x,
            report.trailing_z, report.trailing_lam,
        ]
    return table, violations, summary, worst


def run_bounds(
    cfg: RunConfig, jobs: int = 1, audit_subproblems: bool = False
) -> RunArtifacts:
    """Audit every tracked inequality per step, averaging errors across
    trials and keeping the worst (minimum) margin per step.

    Margin columns for the first step and the first step's drift are nan:
    they compare against a previous optimum that does not exist yet.
    """
    if cfg.experiment != "bounds":
        raise ConfigError(f"run_bounds needs a bounds config, got {cfg.experiment!r}")
    results = _map_trials(_bounds_trial, cfg, jobs, audit_subproblems)
    mean_part = np.zeros((3, cfg.steps))
    min_part = np.full((3, cfg.steps), np.inf)
    worst = 0.0
    violations: list[MarginViolation] = []
    summaries = []
    for table, trial_violations, summary, stationarity in results:
        mean_part += table[:3]
        min_part = np.minimum(min_part, table[3:])
        worst = max(worst, stationarity)
        violations.extend(trial_violations)
        if summary is not None:
            summaries.append(summary)
    mean_part /= cfg.trials
    out = _output_dir(cfg)
    main_path = out / "bounds.csv"
    _write_csv(
        main_path,
        _BOUNDS_HEADER,
        (
            [k + 1, mean_part[0, k], mean_part[1, k], mean_part[2, k],
             min_part[0, k], min_part[1, k], min_part[2, k]]
            for k in range(cfg.steps)
        ),
    )
    paths = [main_path]
    if summaries:
        summary_path = out / "bounds_summary.csv"
        _write_csv(summary_path, _SUMMARY_HEADER, summaries)
        paths.append(summary_path)
    return RunArtifacts(
        paths=tuple(paths),
        max_stationarity=worst if audit_subproblems else None,
        violations=tuple(violations),
    )


def run_experiment(
    cfg: RunConfig, jobs: int = 1, audit_subproblems: bool = False
) -> RunArtifacts:
    """Dispatch on cfg.experiment."""
    runner = {"sharing": run_sharing, "lasso": run_lasso, "bounds": run_bounds}[
        cfg.experiment
    ]
    return runner(cfg, jobs=jobs, audit_subproblems=audit_subproblems)
