"""Acceptance suite: eight criteria, one test (and one pass/fail line) each.

The expensive experiment runs are shared across criteria through
module-scoped fixtures; every run audits per-step subproblem optimality so
criterion 8 can roll the residuals up at the end.
"""

import time

import numpy as np
import pytest

from dynadmm.experiments import (
    build_config,
    read_csv_columns,
    run_bounds,
    run_lasso,
    run_sharing,
)
from dynadmm.lasso import LassoProblem
from dynadmm.lasso import assemble as lasso_assemble
from dynadmm.metrics import (
    DualPair,
    PairNormContext,
    constants_from_stream,
    max_contraction,
    pair_norm,
)
from dynadmm.numerics import min_eigenvalue_symmetric
from dynadmm.oracle import OracleConfig, solve_exact_kkt, solve_static_admm
from dynadmm.solver import SolverConfig, run_dynamic, soft_threshold
from dynadmm.synth import (
    QuadStreamConfig,
    RngStream,
    floor_spd,
    quadratic_stream,
    symmetric_uniform,
)

STATIONARITY_CAP = 1e-8


def _verdict(number: int, ok: bool, detail: str) -> None:
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number}: {detail}"


# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="module")
def sharing_run(tmp_path_factory):
    cfg = build_config(
        "sharing", overrides={"output_dir": str(tmp_path_factory.mktemp("sharing"))}
    )
    start = time.perf_counter()
    artifacts = run_sharing(cfg, audit_subproblems=True)
    elapsed = time.perf_counter() - start
    return artifacts, elapsed


@pytest.fixture(scope="module")
def sharing_sweep(tmp_path_factory):
    cfg = build_config(
        "sharing",
        overrides={
            "rho_sweep": (0.01, 0.1, 1.0),
            "output_dir": str(tmp_path_factory.mktemp("sweep")),
        },
    )
    return run_sharing(cfg, audit_subproblems=True)


@pytest.fixture(scope="module")
def lasso_runs(tmp_path_factory):
    runs = {}
    for eta in (0.01, 0.1):
        cfg = build_config(
            "lasso",
            overrides={
                "eta": eta,
                "output_dir": str(tmp_path_factory.mktemp(f"lasso_{eta}")),
            },
        )
        runs[eta] = run_lasso(cfg, audit_subproblems=True)
    return runs


@pytest.fixture(scope="module")
def bounds_run(tmp_path_factory):
    cfg = build_config(
        "bounds",
        overrides={
            "trials": 20,
            "steps": 500,
            "output_dir": str(tmp_path_factory.mktemp("bounds")),
        },
    )
    start = time.perf_counter()
    artifacts = run_bounds(cfg, audit_subproblems=True)
    elapsed = time.perf_counter() - start
    return artifacts, elapsed


def _final_quarter(values: np.ndarray) -> np.ndarray:
    return values[-(len(values) // 4):]


# --------------------------------------------------------------- criteria


def test_criterion_1_sharing_error_plateau(sharing_run):
    artifacts, elapsed = sharing_run
    columns = read_csv_columns(artifacts.paths[0])
    err = columns["err_x"]
    window = err[39:60]  # k in [40, 60]
    plateau_mean = float(np.mean(window))
    reference = float(err[4])  # k = 5
    running = np.cumsum(window) / np.arange(1, len(window) + 1)
    variation = float((running.max() - running.min()) / running[-1])
    ok = (
        plateau_mean < 0.4 * reference
        and variation < 0.2
        and elapsed < 60.0
    )
    _verdict(
        1,
        ok,
        f"plateau {plateau_mean:.4f} vs 40% of k=5 {0.4 * reference:.4f}, "
        f"running-mean variation {variation:.3f}, runtime {elapsed:.1f}s",
    )


def test_criterion_2_rho_sweep_ordering(sharing_sweep):
    means = {}
    for path in sharing_sweep.paths:
        columns = read_csv_columns(path)
        rho = path.stem.removeprefix("sharing_rho_")
        means[rho] = float(np.mean(columns["err_x"][-20:]))
    ok = means["0.1"] < means["0.01"] and means["0.1"] < means["1"]
    _verdict(
        2,
        ok,
        "final-20-step means "
        + ", ".join(f"rho={rho}: {m:.4f}" for rho, m in sorted(means.items())),
    )


def test_criterion_3_lasso_tracking(lasso_runs):
    finals = {}
    checks = []
    for eta, artifacts in lasso_runs.items():
        columns = read_csv_columns(artifacts.paths[0])
        finals[eta] = {
            name: float(np.mean(_final_quarter(columns[name])))
            for name in ("err_x", "err_x_truth", "err_oracle_truth")
        }
        reference = float(columns["err_x"][4])
        checks.append(finals[eta]["err_x"] < 0.3 * reference)
        ratio = finals[eta]["err_x_truth"] / finals[eta]["err_oracle_truth"]
        checks.append(0.5 <= ratio <= 2.0)
    for name in ("err_x", "err_x_truth", "err_oracle_truth"):
        checks.append(finals[0.1][name] > finals[0.01][name])
    _verdict(
        3,
        all(checks),
        f"final-quarter means eta=0.01 {finals[0.01]}, eta=0.1 {finals[0.1]}",
    )


def test_criterion_4_sparsity_deviation(lasso_runs):
    ratios = {}
    for eta, artifacts in lasso_runs.items():
        columns = read_csv_columns(artifacts.paths[0])
        tracked = float(np.mean(_final_quarter(columns["sparsity_admm"])))
        oracle = float(np.mean(_final_quarter(columns["sparsity_oracle"])))
        ratios[eta] = tracked / oracle
    ok = all(0.5 <= ratio <= 2.0 for ratio in ratios.values())
    _verdict(
        4,
        ok,
        "tracked/oracle off-support norm ratios "
        + ", ".join(f"eta={eta}: {ratio:.3f}" for eta, ratio in ratios.items()),
    )


def test_criterion_5_margin_audit(bounds_run):
    artifacts, elapsed = bounds_run
    summary = read_csv_columns(artifacts.paths[1])
    steady_ok = True
    for tag in ("u_c", "x", "z", "lam"):
        trailing = summary[f"trailing_{tag}"]
        bound = summary[f"bound_{tag}"]
        steady_ok = steady_ok and bool(np.all(trailing <= bound * (1.0 + 1e-9)))
    ok = artifacts.violations == () and steady_ok and elapsed < 30.0
    _verdict(
        5,
        ok,
        f"{len(artifacts.violations)} margin violations over 20 trials x 500 steps, "
        f"trailing maxima within steady-state bounds: {steady_ok}, "
        f"runtime {elapsed:.1f}s",
    )


def test_criterion_6_static_geometric_decay():
    rng = RngStream(2026)
    stream = quadratic_stream(QuadStreamConfig(dim=5, eta=0.0, floor=1.0), 200, rng)
    states = run_dynamic(stream, SolverConfig(rho=1.0))
    optimum = solve_exact_kkt(stream[0])
    consts = constants_from_stream(stream)
    delta_max = max_contraction(consts, 1.0).delta_max
    ctx = PairNormContext(stream[0].B, 1.0)
    start_error = pair_norm(DualPair(optimum.z, optimum.lam), ctx)
    worst_ratio = 0.0
    for state in states:
        gap = DualPair(state.z - optimum.z, state.lam - optimum.lam)
        envelope = (1.0 + delta_max) ** (-state.k / 2.0) * start_error
        worst_ratio = max(worst_ratio, pair_norm(gap, ctx) / envelope)
    ok = worst_ratio <= 1.0 + 1e-9
    _verdict(
        6,
        ok,
        f"max error/envelope ratio {worst_ratio:.12f} over 200 steps, "
        f"delta_max {delta_max:.4f}",
    )


def test_criterion_7_oracle_cross_validation():
    stream = quadratic_stream(
        QuadStreamConfig(dim=4, eta=0.4, floor=0.5), 200, RngStream(7)
    )
    oracle_config = OracleConfig()
    worst_quad = 0.0
    for inst in stream:
        exact = solve_exact_kkt(inst)
        iterated = solve_static_admm(inst, oracle_config)
        gap = max(
            float(np.max(np.abs(iterated.x - exact.x))),
            float(np.max(np.abs(iterated.z - exact.z))),
            float(np.max(np.abs(iterated.lam - exact.lam))),
        )
        worst_quad = max(worst_quad, gap)

    worst_scalar = 0.0
    rng = RngStream(13)
    for index in range(100):
        local = rng.derive(index)
        design = float(local.uniform(0.5, 2.0)) * (1.0 if index % 2 else -1.0)
        target = float(local.uniform(-2.0, 2.0))
        gamma = float(local.uniform(0.05, 0.5))
        inst = lasso_assemble(
            LassoProblem(np.array([[design]]), np.array([target]), gamma), 1
        )
        closed_form = float(soft_threshold(design * target, gamma)) / design**2
        iterated = solve_static_admm(inst, oracle_config)
        worst_scalar = max(worst_scalar, abs(float(iterated.x[0]) - closed_form))

    ok = worst_quad <= 1e-7 and worst_scalar <= 1e-8
    _verdict(
        7,
        ok,
        f"static-vs-exact gap {worst_quad:.2e} on 200 instances, "
        f"scalar shrinkage gap {worst_scalar:.2e} on 100 instances",
    )


def test_criterion_8_unit_property_roundup(
    tmp_path_factory, sharing_run, sharing_sweep, lasso_runs, bounds_run
):
    checks = []

    # soft threshold: shrink above, zero inside, shrink below
    checks.append(float(soft_threshold(3.0, 1.0)) == 2.0)
    checks.append(float(soft_threshold(0.4, 1.0)) == 0.0)
    checks.append(float(soft_threshold(-3.0, 1.0)) == -2.0)
    checks.append(float(soft_threshold(1.0, 1.0)) == 0.0)

    # pair-norm axioms on random pairs
    rng = RngStream(31)
    ctx = PairNormContext(rng.uniform(-1.0, 1.0, size=(3, 3)) + 2.0 * np.eye(3), 0.7)
    checks.append(pair_norm(DualPair(np.zeros(3), np.zeros(3)), ctx) == 0.0)
    for index in range(200):
        local = rng.derive(index)
        first = DualPair(local.normal(1.0, size=3), local.normal(1.0, size=3))
        second = DualPair(local.normal(1.0, size=3), local.normal(1.0, size=3))
        scale = float(local.uniform(-3.0, 3.0))
        checks.append(pair_norm(first, ctx) > 0.0)
        checks.append(
            pair_norm(DualPair(scale * first.z, scale * first.lam), ctx)
            == pytest.approx(abs(scale) * pair_norm(first, ctx), rel=1e-12)
        )
        summed = DualPair(first.z + second.z, first.lam + second.lam)
        checks.append(
            pair_norm(summed, ctx)
            <= pair_norm(first, ctx) + pair_norm(second, ctx) + 1e-12
        )

    # eigenvalue floor holds on 1000 generated weight matrices
    floor_rng = RngStream(47)
    floor_ok = True
    for index in range(1000):
        candidate = symmetric_uniform(5, floor_rng.derive(index))
        floored = floor_spd(candidate, 1.0)
        floor_ok = floor_ok and min_eigenvalue_symmetric(floored) >= 1.0 - 1e-9
    checks.append(floor_ok)

    # per-step subproblem optimality held on every audited run above
    residuals = [
        sharing_run[0].max_stationarity,
        sharing_sweep.max_stationarity,
        lasso_runs[0.01].max_stationarity,
        lasso_runs[0.1].max_stationarity,
        bounds_run[0].max_stationarity,
    ]
    checks.append(all(r is not None and r < STATIONARITY_CAP for r in residuals))

    # fixed seed reproduces every artifact byte for byte
    replay_ok = True
    for experiment, runner in (
        ("sharing", run_sharing),
        ("lasso", run_lasso),
        ("bounds", run_bounds),
    ):
        contents = []
        for attempt in ("a", "b"):
            out = tmp_path_factory.mktemp(f"replay_{experiment}_{attempt}")
            cfg = build_config(
                experiment,
                overrides={"trials": 2, "steps": 12, "output_dir": str(out)},
            )
            artifacts = runner(cfg)
            contents.append([path.read_bytes() for path in artifacts.paths])
        replay_ok = replay_ok and contents[0] == contents[1]
    checks.append(replay_ok)

    _verdict(
        8,
        all(checks),
        f"{len(checks)} property checks, max stationarity residual "
        f"{max(residuals):.2e}, byte-identical replays: {replay_ok}",
    )
