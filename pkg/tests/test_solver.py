import math

import numpy as np
import pytest

from glassokit.datagen import gen_sparse_precision, lambda_max, sample_gaussian
from glassokit.linalg import (
    NotPositiveDefiniteError,
    partition_column,
    reassemble,
    solve_spd,
    chol,
)
from glassokit.solver import (
    BACKENDS,
    ColumnParams,
    SolverConfig,
    check_stationarity,
    decoupled_column_objective,
    gamma_update,
    objective,
    solve,
    sweep_column,
)

from oracles import brute_force_precision_min, make_spd, penalized_objective


def sample_cov(p: int, n: int, seed: int) -> np.ndarray:
    gt = gen_sparse_precision(p, zero_fraction=0.6, seed=seed)
    return sample_gaussian(gt, n, seed=seed + 1).S


# ---------------------------------------------------------------- objective

def test_objective_identity_values():
    eye = np.eye(2)
    assert objective(eye, eye, 0.0) == 2.0
    assert objective(2.0 * eye, eye, 0.5) == pytest.approx(6.0 - 2.0 * math.log(2.0), abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_objective_matches_slogdet_oracle(seed):
    theta = make_spd(7, seed)
    s = make_spd(7, seed + 50)
    assert objective(theta, s, 0.3) == pytest.approx(
        penalized_objective(theta, s, 0.3), abs=1e-10
    )


def test_objective_rejects_bad_input():
    with pytest.raises(NotPositiveDefiniteError):
        objective(-np.eye(2), np.eye(2), 0.1)
    with pytest.raises(ValueError):
        objective(np.eye(2), np.eye(3), 0.1)
    with pytest.raises(ValueError):
        objective(np.eye(2), np.eye(2), -0.1)


# ---------------------------------------------------------------- decoupling

def test_column_objective_differs_from_full_by_constant():
    # swapping (beta, gamma) moves both objectives by exactly the same amount
    rng = np.random.default_rng(4)
    theta = make_spd(6, 4)
    s = make_spd(6, 44)
    lam, k = 0.2, 2
    part_t = partition_column(theta, k)
    part_s = partition_column(s, k)
    factor = chol(part_t.block11)
    consts = []
    for _ in range(10):
        beta = rng.standard_normal(5) * 0.2
        gamma = float(rng.uniform(0.2, 2.0))
        cp = ColumnParams(beta=beta, gamma=gamma)
        theta22 = gamma + float(beta @ solve_spd(factor, beta))
        full = reassemble(
            type(part_t)(block11=part_t.block11, vec12=beta, scalar22=theta22, pivot=k)
        )
        diff = objective(full, s, lam) - decoupled_column_objective(cp, part_t, part_s, lam)
        consts.append(diff)
    spread = max(consts) - min(consts)
    assert spread <= 1e-9 * max(1.0, abs(consts[0]))


def test_column_objective_validates():
    theta = make_spd(4, 0)
    part = partition_column(theta, 0)
    with pytest.raises(ValueError):
        decoupled_column_objective(
            ColumnParams(beta=np.zeros(3), gamma=1.0), part, part, -0.1
        )
    with pytest.raises(ValueError):
        ColumnParams(beta=np.zeros(3), gamma=0.0)


def test_gamma_update():
    assert gamma_update(2.0, 0.5) == 0.4
    assert gamma_update(0.0, 0.5) == 2.0
    with pytest.raises(ValueError):
        gamma_update(-1.0, 0.5)


# ---------------------------------------------------------------- closed forms

@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("scale", [1.0, 1.5])
def test_penalty_at_or_above_lambda_max_gives_exact_diagonal(backend, scale):
    s = sample_cov(20, 40, seed=3)
    lam = scale * lambda_max(s)
    est = solve(s, SolverConfig(lam=lam, backend=backend))
    expect = np.diag(1.0 / (np.diagonal(s) + lam))
    assert np.array_equal(est.theta, expect)  # bitwise, not approximately
    assert est.trace.converged
    assert est.trace.sweeps == 1


def test_p1_closed_form():
    est = solve(np.array([[2.0]]), SolverConfig(lam=0.3))
    assert est.theta[0, 0] == 1.0 / 2.3
    assert est.trace.converged
    assert est.trace.sweeps == 0


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_penalty_recovers_inverse(backend):
    s = make_spd(8, 12)
    est = solve(s, SolverConfig(lam=0.0, backend=backend, outer_tol=1e-10, max_sweeps=2000))
    assert est.trace.converged
    inv = np.linalg.inv(s)
    assert np.max(np.abs(est.theta - inv)) <= 1e-6


# ---------------------------------------------------------------- brute force

@pytest.mark.parametrize("backend", BACKENDS)
def test_brute_force_p2(backend):
    s = make_spd(2, 0)
    lam = 0.3
    oracle_theta, oracle_val = brute_force_precision_min(s, lam)
    est = solve(s, SolverConfig(lam=lam, backend=backend, outer_tol=1e-9))
    assert np.max(np.abs(est.theta - oracle_theta)) <= 1e-3
    assert objective(est.theta, s, lam) <= oracle_val + 1e-6


@pytest.mark.parametrize("backend", BACKENDS)
def test_brute_force_p3(backend):
    s = make_spd(3, 5)
    lam = 0.25
    oracle_theta, oracle_val = brute_force_precision_min(s, lam)
    est = solve(s, SolverConfig(lam=lam, backend=backend, outer_tol=1e-9))
    assert np.max(np.abs(est.theta - oracle_theta)) <= 1e-3
    assert objective(est.theta, s, lam) <= oracle_val + 1e-6


# ---------------------------------------------------------------- stationarity

def test_check_stationarity_identity_example():
    # theta = I inverts to itself; only the diagonal terms violate, by lam
    assert check_stationarity(np.eye(3), np.eye(3), 0.5) == pytest.approx(0.5, abs=1e-15)


def test_check_stationarity_zero_at_exact_solution():
    # lam = 0: solution is inv(s), the residual is pure roundoff
    s = make_spd(6, 8)
    assert check_stationarity(np.linalg.inv(s), s, 0.0) <= 1e-10


@pytest.mark.parametrize("backend", BACKENDS)
def test_solution_is_stationary(backend):
    s = sample_cov(15, 60, seed=9)
    lam = 0.3 * lambda_max(s)
    est = solve(s, SolverConfig(lam=lam, backend=backend, outer_tol=1e-6))
    assert est.trace.converged
    assert check_stationarity(est.theta, s, lam) <= 1e-4


# ---------------------------------------------------------------- invariants

@pytest.mark.parametrize("backend", BACKENDS)
def test_objective_monotone_and_pd_each_sweep(backend):
    s = sample_cov(12, 30, seed=21)  # n < p on purpose
    lam = 0.2 * lambda_max(s)
    est = solve(
        s, SolverConfig(lam=lam, backend=backend, outer_tol=1e-7, record_diagnostics=True)
    )
    objs = est.trace.objectives
    assert len(objs) == est.trace.sweeps + 1
    for prev, cur in zip(objs, objs[1:]):
        assert cur <= prev + 1e-12 * max(1.0, abs(prev))
    assert all(e > 0 for e in est.trace.min_eigs)
    assert objs[-1] <= objs[0]


def test_backends_agree():
    s = sample_cov(12, 80, seed=31)
    lam = 0.25 * lambda_max(s)
    ests = {
        b: solve(s, SolverConfig(lam=lam, backend=b, outer_tol=1e-7)) for b in BACKENDS
    }
    a, b = (ests[k].theta for k in BACKENDS)
    assert np.max(np.abs(a - b)) <= 1e-5
    assert np.array_equal(np.abs(a) > 1e-6, np.abs(b) > 1e-6)


def test_symmetry_preserved():
    s = sample_cov(10, 50, seed=41)
    for backend in BACKENDS:
        est = solve(s, SolverConfig(lam=0.1, backend=backend))
        assert np.array_equal(est.theta, est.theta.T)


def test_minimum_independent_of_start():
    s = sample_cov(8, 60, seed=51)
    lam = 0.3 * lambda_max(s)
    cfg = SolverConfig(lam=lam, outer_tol=1e-8, max_sweeps=2000)
    cold = solve(s, cfg)
    warm = solve(s, cfg, warm_start=make_spd(8, 99))
    assert cold.trace.converged and warm.trace.converged
    assert np.max(np.abs(cold.theta - warm.theta)) <= 1e-4


def test_warm_restart_from_solution_is_cheap():
    s = sample_cov(10, 70, seed=61)
    cfg = SolverConfig(lam=0.2 * lambda_max(s), outer_tol=1e-5)
    first = solve(s, cfg)
    again = solve(s, cfg, warm_start=first.theta)
    assert again.trace.converged
    assert again.trace.sweeps <= 2
    assert again.trace.total_inner <= first.trace.total_inner


# ---------------------------------------------------------------- sweep_column

def test_sweep_column_fixed_point_after_convergence():
    s = sample_cov(9, 50, seed=71)
    cfg = SolverConfig(lam=0.3 * lambda_max(s), outer_tol=1e-9)
    est = solve(s, cfg)
    theta = est.theta.copy()
    for k in range(9):
        sweep_column(theta, s, k, cfg)
    assert np.max(np.abs(theta - est.theta)) <= 1e-6


def test_sweep_column_returns_column_state():
    s = sample_cov(6, 40, seed=81)
    cfg = SolverConfig(lam=0.2)
    theta = np.diag(1.0 / (np.diagonal(s) + cfg.lam))
    sol = sweep_column(theta, s, 3, cfg)
    assert sol.gamma == pytest.approx(1.0 / (s[3, 3] + cfg.lam), abs=1e-15)
    assert sol.theta22 == theta[3, 3]
    assert np.array_equal(theta, theta.T)
    idx = [0, 1, 2, 4, 5]
    assert np.array_equal(sol.beta, theta[idx, 3])


def test_sweep_column_bad_index():
    with pytest.raises(ValueError):
        sweep_column(np.eye(3), np.eye(3), 3, SolverConfig(lam=0.1))


# ---------------------------------------------------------------- config/trace

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(lam=-0.1)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, backend="apex")
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, outer_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, max_inner=0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, max_sweeps=-1)


def test_input_validation():
    cfg = SolverConfig(lam=0.1)
    with pytest.raises(ValueError, match="symmetric"):
        solve(np.array([[1.0, 0.2], [0.3, 1.0]]), cfg)
    with pytest.raises(ValueError, match="diagonal"):
        solve(np.array([[-1.0, 0.0], [0.0, 1.0]]), cfg)
    with pytest.raises(ValueError):
        solve(np.zeros((2, 2)), SolverConfig(lam=0.0))
    with pytest.raises(NotPositiveDefiniteError):
        solve(np.eye(3), cfg, warm_start=-np.eye(3))


def test_zero_sweep_budget_returns_initializer():
    s = make_spd(5, 91)
    cfg = SolverConfig(lam=0.4, max_sweeps=0)
    est = solve(s, cfg)
    assert not est.trace.converged
    assert est.trace.sweeps == 0
    assert np.array_equal(est.theta, np.diag(1.0 / (np.diagonal(s) + 0.4)))
    rows = est.trace.rows()
    assert len(rows) == 1 and math.isnan(rows[0][1])


def test_trace_bookkeeping():
    s = sample_cov(8, 40, seed=101)
    est = solve(s, SolverConfig(lam=0.1, record_diagnostics=True))
    tr = est.trace
    assert len(tr.rel_changes) == tr.sweeps == len(tr.inner_per_sweep)
    assert len(tr.objectives) == len(tr.min_eigs) == tr.sweeps + 1
    assert tr.total_inner == sum(tr.inner_per_sweep)
    assert tr.wall_time >= 0.0
    rows = tr.rows()
    assert len(rows) == tr.sweeps + 1
    assert rows[0][0] == 0 and math.isnan(rows[0][3])
    assert rows[-1][3] == tr.rel_changes[-1]
    # it actually descended to the initial objective or below
    assert tr.objectives[-1] <= tr.objectives[0]
