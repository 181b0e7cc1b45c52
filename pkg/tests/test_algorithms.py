import itertools

import numpy as np
import pytest

from dompkit import linalg
from dompkit.algorithms import (
    AlgorithmConfig,
    StoppingRule,
    ZeroResidualError,
    cosamp_run,
    domp_step,
    edomp_step,
    gomp_run,
    initial_state,
    omp_step,
    run,
    select_dynamic_indices,
    sp_run,
)


def random_sparse_problem(rng, m, n, k, scale=False):
    A = rng.standard_normal((m, n))
    if scale:
        A /= np.sqrt(m)
    support = rng.choice(n, size=k, replace=False)
    x = np.zeros(n)
    x[support] = rng.standard_normal(k)
    return A, x, A @ x


def relative_error(x, truth):
    return np.linalg.norm(x - truth) / np.linalg.norm(truth)


def test_select_dynamic_indices_threshold():
    out = select_dynamic_indices(np.array([5.0, 4.8, 0.1]), 3, 0.9)
    assert out.tolist() == [0, 1]


def test_select_dynamic_indices_unique_max_gamma_one_is_singleton():
    out = select_dynamic_indices(np.array([0.2, -3.0, 1.4]), 3, 1.0)
    assert out.tolist() == [1]


def test_select_dynamic_indices_tied_maxima():
    out = select_dynamic_indices(np.array([3.0, -3.0, 1.0]), 2, 1.0)
    assert out.tolist() == [0, 1]


def test_select_dynamic_indices_zero_residual():
    with pytest.raises(ZeroResidualError):
        select_dynamic_indices(np.zeros(4), 2, 0.9)


def test_select_dynamic_indices_always_contains_a_max():
    rng = np.random.default_rng(0)
    for _ in range(50):
        r = rng.standard_normal(20)
        k = int(rng.integers(1, 10))
        gamma = float(rng.uniform(0.05, 1.0))
        theta = select_dynamic_indices(r, k, gamma)
        assert 1 <= theta.size <= k
        assert np.abs(r[theta]).max() == np.abs(r).max()


def test_omp_step_identity_basis():
    A = np.eye(4)
    y = np.zeros(4)
    y[2] = 1.0
    state = omp_step(initial_state(A, y), A, y)
    assert state.support.tolist() == [2]
    assert np.allclose(state.x, y)
    assert state.residual_norm <= 1e-12


def test_omp_recovers_support_in_exactly_k_steps():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        A, x, y = random_sparse_problem(rng, 30, 60, 3)
        state = initial_state(A, y)
        for _ in range(3):
            state = omp_step(state, A, y)
        assert set(state.support.tolist()) == set(np.flatnonzero(x).tolist())
        assert relative_error(state.x, x) <= 1e-10


def test_omp_final_residual_versus_exhaustive_search():
    # Brute-force oracle: best residual over every 3-column support.
    for seed in (0, 1, 2):
        rng = np.random.default_rng(2000 + seed)
        A, x, y = random_sparse_problem(rng, 20, 40, 3)
        report = run(A, y, AlgorithmConfig("omp", k=3), truth=x)
        best = min(
            np.linalg.norm(y - A[:, list(sup)] @ np.linalg.lstsq(A[:, list(sup)], y, rcond=None)[0])
            for sup in itertools.combinations(range(40), 3)
        )
        assert report.residual_norm <= best + 1e-8 or report.success


def test_domp_matches_omp_with_gamma_one_and_distinct_magnitudes():
    rng = np.random.default_rng(42)
    A, x, y = random_sparse_problem(rng, 25, 50, 4)
    omp_state = initial_state(A, y)
    domp_state = initial_state(A, y)
    for _ in range(4):
        rmax = np.abs(domp_state.r).max()
        assert np.sum(np.abs(domp_state.r) == rmax) == 1
        omp_state = omp_step(omp_state, A, y)
        domp_state = domp_step(domp_state, A, y, 4, 1.0)
        assert omp_state.support.tolist() == domp_state.support.tolist()


def test_domp_identity_single_iteration():
    # all nonzero magnitudes within factor 0.9 of the max, so one sweep
    # picks the whole support
    A = np.eye(6)
    x = np.zeros(6)
    x[[1, 3, 4]] = [1.0, -0.95, 0.92]
    state = domp_step(initial_state(A, x), A, x, 3, 0.9)
    assert state.support.tolist() == [1, 3, 4]
    assert np.allclose(state.x, x)


def test_domp_monte_carlo_success_rate():
    successes = 0
    for trial in range(100):
        rng = np.random.default_rng(3000 + trial)
        A, x, y = random_sparse_problem(rng, 100, 400, 10, scale=True)
        report = run(
            A,
            y,
            AlgorithmConfig("domp", k=10, gamma=0.9, stopping=StoppingRule.relative_error(1e-5, x)),
        )
        successes += bool(report.success)
    assert successes >= 95


def test_edomp_matches_domp_while_support_small():
    rng = np.random.default_rng(77)
    A, x, y = random_sparse_problem(rng, 30, 80, 6)
    d = initial_state(A, y)
    e = initial_state(A, y)
    while True:
        d_next = domp_step(d, A, y, 6, 0.9)
        if d_next.support.size > 6:
            break
        d = d_next
        e = edomp_step(e, A, y, 6, 0.9)
        assert np.allclose(d.x, e.x)
        assert d.support.tolist() == e.support.tolist()
        if d.residual_norm <= 1e-12:
            break


def test_edomp_thresholding_branch():
    rng = np.random.default_rng(78)
    A = rng.standard_normal((12, 40))
    y = rng.standard_normal(12)
    k = 3
    state = initial_state(A, y)
    while state.support.size + 1 <= k:
        state = domp_step(state, A, y, k, 0.2)
    # low gamma forces a large batch so the accumulated support passes k
    nxt = edomp_step(state, A, y, k, 0.2)
    assert np.count_nonzero(nxt.x) <= k
    tentative = linalg.restricted_least_squares(
        A, y, np.union1d(state.support, select_dynamic_indices(state.r, k, 0.2))
    )
    keep = linalg.top_q_indices(tentative, k)
    assert np.allclose(nxt.x, linalg.restricted_least_squares(A, y, keep))
    assert nxt.support.size >= k  # literal accumulation keeps the grown support


def test_edomp_reset_support_mode():
    rng = np.random.default_rng(79)
    A = rng.standard_normal((12, 40))
    y = rng.standard_normal(12)
    state = initial_state(A, y)
    for _ in range(4):
        state = edomp_step(state, A, y, 3, 0.2, reset_support=True)
        assert state.support.size <= 3
        assert np.count_nonzero(state.x) <= 3


def test_edomp_iterates_always_k_sparse():
    rng = np.random.default_rng(80)
    A, x, y = random_sparse_problem(rng, 40, 120, 8)
    report = run(A, y, AlgorithmConfig("edomp", k=8, gamma=0.5, max_iterations=12))
    state = initial_state(A, y)
    for _ in range(12):
        try:
            state = edomp_step(state, A, y, 8, 0.5)
        except ZeroResidualError:
            break
        assert np.count_nonzero(state.x) <= 8
    assert np.count_nonzero(report.x) <= 8


def test_edomp_monte_carlo_tracks_domp():
    domp_hits = 0
    edomp_hits = 0
    for trial in range(100):
        rng = np.random.default_rng(4000 + trial)
        A, x, y = random_sparse_problem(rng, 100, 400, 10, scale=True)
        rule = StoppingRule.relative_error(1e-5, x)
        domp_hits += bool(run(A, y, AlgorithmConfig("domp", k=10, stopping=rule)).success)
        edomp_hits += bool(run(A, y, AlgorithmConfig("edomp", k=10, stopping=rule)).success)
    assert edomp_hits >= domp_hits - 5


def test_gomp_n1_matches_omp():
    rng = np.random.default_rng(5)
    A, x, y = random_sparse_problem(rng, 30, 90, 5)
    omp = run(A, y, AlgorithmConfig("omp", k=5), truth=x)
    gomp = gomp_run(A, y, AlgorithmConfig("gomp", k=5, n_select=1), truth=x)
    assert [t.support_size for t in omp.trace] == [t.support_size for t in gomp.trace]
    assert np.allclose(omp.x, gomp.x)


def test_gomp_identity_two_iterations():
    A = np.eye(8)
    x = np.zeros(8)
    x[[0, 2, 5, 7]] = [1.0, -2.0, 0.5, 3.0]
    report = gomp_run(A, x, AlgorithmConfig("gomp", k=4, n_select=3), truth=x)
    assert report.iterations <= 2
    assert report.success


def test_gomp_monte_carlo_comparable_to_omp():
    # equal index budget: gOMP runs its k iterations selecting N=2 atoms
    # each, OMP gets the same N*k atom budget one at a time
    omp_hits = 0
    gomp_hits = 0
    trials = 100
    for trial in range(trials):
        rng = np.random.default_rng(5000 + trial)
        A, x, y = random_sparse_problem(rng, 50, 200, 6)
        rule = StoppingRule.relative_error(1e-5, x)
        omp_hits += bool(
            run(A, y, AlgorithmConfig("omp", k=6, stopping=rule, max_iterations=12)).success
        )
        gomp_hits += bool(
            run(A, y, AlgorithmConfig("gomp", k=6, n_select=2, stopping=rule, max_iterations=6)).success
        )
    p = max(omp_hits, gomp_hits) / trials
    noise = 4 * np.sqrt(2 * p * (1 - p) / trials) + 1 / trials
    assert abs(omp_hits - gomp_hits) / trials <= max(noise, 0.12)


def test_cosamp_identity_single_iteration():
    A = np.eye(6)
    x = np.zeros(6)
    x[[1, 4]] = [2.0, -1.0]
    report = cosamp_run(A, x, AlgorithmConfig("cosamp", k=2), truth=x)
    assert report.iterations == 1
    assert report.success


def test_cosamp_zero_measurements():
    A = np.eye(5)
    report = cosamp_run(A, np.zeros(5), AlgorithmConfig("cosamp", k=2))
    assert report.iterations == 0
    assert report.termination == "global-optimum"
    assert not report.x.any()


def test_cosamp_monte_carlo_success_rate():
    hits = 0
    for trial in range(100):
        rng = np.random.default_rng(6000 + trial)
        A, x, y = random_sparse_problem(rng, 100, 400, 10, scale=True)
        rule = StoppingRule.relative_error(1e-5, x)
        hits += bool(cosamp_run(A, y, AlgorithmConfig("cosamp", k=10, stopping=rule)).success)
    assert hits >= 90


def test_sp_identity_single_iteration():
    A = np.eye(6)
    x = np.zeros(6)
    x[[0, 3]] = [1.5, 2.5]
    report = sp_run(A, x, AlgorithmConfig("sp", k=2), truth=x)
    assert report.iterations == 1
    assert report.success


def test_sp_monte_carlo_success_rate():
    hits = 0
    for trial in range(100):
        rng = np.random.default_rng(7000 + trial)
        A, x, y = random_sparse_problem(rng, 100, 400, 10, scale=True)
        rule = StoppingRule.relative_error(1e-5, x)
        hits += bool(sp_run(A, y, AlgorithmConfig("sp", k=10, stopping=rule)).success)
    assert hits >= 90


def test_sp_trace_residuals_strictly_decrease():
    seen_increase_stop = False
    for trial in range(30):
        rng = np.random.default_rng(8000 + trial)
        A, x, y = random_sparse_problem(rng, 20, 80, 9)
        report = sp_run(A, y, AlgorithmConfig("sp", k=9, max_iterations=50), truth=x)
        residuals = [t.residual_norm for t in report.trace]
        assert all(b < a for a, b in zip(residuals, residuals[1:]))
        if report.termination == "residual-increase":
            seen_increase_stop = True
            assert report.iterations < 50
    assert seen_increase_stop


def test_run_max_iterations_zero():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((6, 12))
    y = rng.standard_normal(6)
    report = run(A, y, AlgorithmConfig("domp", k=3, stopping=StoppingRule.max_iterations(0)))
    assert report.iterations == 0
    assert not report.x.any()
    assert report.termination == "max-iterations"
    assert report.trace == []


def test_run_gradient_rule_zero_measurements():
    rng = np.random.default_rng(10)
    A = rng.standard_normal((6, 12))
    report = run(A, np.zeros(6), AlgorithmConfig("omp", k=3, stopping=StoppingRule.gradient_residual(1e-9)))
    assert report.iterations == 0
    assert not report.x.any()
    assert report.termination == "gradient-residual"


def test_run_domp_relative_error_rule():
    rng = np.random.default_rng(11)
    A, x, y = random_sparse_problem(rng, 60, 240, 6, scale=True)
    report = run(A, y, AlgorithmConfig("domp", k=6, stopping=StoppingRule.relative_error(1e-5, x)))
    assert report.success
    assert report.iterations <= 6
    assert report.termination == "relative-error"


def test_run_iteration_cap_reason():
    rng = np.random.default_rng(12)
    A = rng.standard_normal((10, 100))
    y = rng.standard_normal(10)
    report = run(A, y, AlgorithmConfig("omp", k=2))
    assert report.termination == "iteration-cap"
    assert report.iterations == 2
    assert len(report.trace) == 2


def test_run_warns_when_k_not_below_m():
    A = np.eye(4)
    y = np.array([1.0, 0.0, 0.0, 0.0])
    with pytest.warns(RuntimeWarning):
        run(A, y, AlgorithmConfig("omp", k=4))


def test_config_validation():
    with pytest.raises(ValueError):
        AlgorithmConfig("nope", k=3)
    with pytest.raises(ValueError):
        AlgorithmConfig("domp", k=0)
    with pytest.raises(ValueError):
        AlgorithmConfig("domp", k=3, gamma=1.3)
    with pytest.raises(ValueError):
        AlgorithmConfig("domp", k=3, gamma=0.0)
    with pytest.raises(ValueError):
        AlgorithmConfig("gomp", k=3, n_select=3)
    with pytest.raises(ValueError):
        StoppingRule("relative-error", epsilon=1e-5)


def test_optimality_and_monotonicity_invariants():
    rng = np.random.default_rng(13)
    for algorithm in ("omp", "gomp", "domp"):
        for _ in range(10):
            A, x, y = random_sparse_problem(rng, 40, 160, 8)
            scale = 1e-7 * (1 + np.abs(A.T @ y).max())
            config = AlgorithmConfig(
                algorithm, k=8, gamma=0.8, n_select=2 if algorithm == "gomp" else None
            )
            report = run(A, y, config, truth=x)
            state = initial_state(A, y)
            residuals = [state.residual_norm]
            sizes = [0]
            for _ in range(report.iterations):
                if algorithm == "omp":
                    state = omp_step(state, A, y)
                elif algorithm == "gomp":
                    state = gomp_step_like(state, A, y)
                else:
                    state = domp_step(state, A, y, 8, 0.8)
                assert np.abs(state.r[state.support]).max() <= scale
                residuals.append(state.residual_norm)
                sizes.append(state.support.size)
            assert all(b <= a + 1e-10 for a, b in zip(residuals, residuals[1:]))
            assert all(b >= a for a, b in zip(sizes, sizes[1:]))


def gomp_step_like(state, A, y):
    from dompkit.algorithms import gomp_step

    return gomp_step(state, A, y, 2)


def test_domp_disjoint_selection_and_growth():
    rng = np.random.default_rng(14)
    for _ in range(10):
        A, x, y = random_sparse_problem(rng, 30, 100, 6)
        state = initial_state(A, y)
        for _ in range(6):
            if np.abs(state.r).max() <= 1e-12 * np.abs(A.T @ y).max():
                break
            theta = select_dynamic_indices(state.r, 6, 0.7)
            assert not np.isin(theta, state.support).any()
            before = state.support.size
            state = domp_step(state, A, y, 6, 0.7)
            assert state.support.size - before == theta.size
            assert 1 <= theta.size <= 6


def test_incremental_projection_matches_from_scratch():
    rng = np.random.default_rng(15)
    A, x, y = random_sparse_problem(rng, 35, 120, 7)
    state = initial_state(A, y)
    for _ in range(5):
        state = domp_step(state, A, y, 7, 0.6)
        expect = linalg.restricted_least_squares(A, y, state.support)
        assert np.allclose(state.x, expect, atol=1e-9)
