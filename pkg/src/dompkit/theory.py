"""Recovery-theory constants and numerical verification oracles.

Closed-form restricted-isometry thresholds for the dynamic-selection
solvers, exact (exhaustive) restricted isometry constants at small
scale, the worst-fit constant theta, the full set of error-bound
constants, and randomized verification suites that check the proximity
bound of the ridge-penalized projection, the per-iteration
reconstruction error bounds, and the auxiliary inequalities those
bounds rest on.

Everything here is exact or exhaustively enumerated; nothing is fitted.
Verification failures are reported as data, never raised.
"""

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import algorithms, linalg

__all__ = [
    "BoundConstants",
    "EnumerationCapExceeded",
    "GOLDEN_ETA",
    "ProjectionProximityCheck",
    "RecoveryBoundCheck",
    "RicEstimate",
    "VerificationSummary",
    "auxiliary_inequality_suite",
    "bound_constants",
    "domp_ric_bound",
    "edomp_ric_bound",
    "exhaustive_theta",
    "highest_rip_order",
    "projection_proximity_suite",
    "recovery_bound_suite",
    "ric_exact",
    "ric_monotonicity_suite",
    "theta_constant",
    "theta_equivalence_suite",
    "verify_projection_proximity",
    "verify_recovery_bound",
]

GOLDEN_ETA = (math.sqrt(5.0) + 1.0) / 2.0

DEFAULT_ENUMERATION_CAP = 2_000_000


class EnumerationCapExceeded(RuntimeError):
    """Exhaustive support enumeration would exceed the configured cap."""

    def __init__(self, n, q, count, cap):
        self.n = n
        self.q = q
        self.count = count
        self.cap = cap
        super().__init__(
            f"exact RIC of order {q} on {n} columns needs {count} supports, "
            f"above the cap of {cap}; shrink n or the order, or raise the cap"
        )


@dataclass(frozen=True)
class RicEstimate:
    """Exact restricted isometry constant of one order."""

    order: int
    delta: float
    method: str
    supports_examined: int


def ric_exact(A, q, cap=DEFAULT_ENUMERATION_CAP, batch=4096):
    """Exact RIC of order ``q`` by exhaustive support enumeration.

    delta_q is the largest deviation of a q-column Gram spectrum from 1,
    maximized over all C(n, q) supports; supports are processed in
    batches through a vectorized symmetric eigensolver.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    q = int(q)
    if q < 1 or q > n:
        raise ValueError(f"order must be in [1, {n}], got {q}")
    count = math.comb(n, q)
    if count > cap:
        raise EnumerationCapExceeded(n, q, count, cap)
    gram = A.T @ A
    delta = 0.0
    combos = itertools.combinations(range(n), q)
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        idx = np.asarray(chunk, dtype=np.int64)
        local = gram[idx[:, :, None], idx[:, None, :]]
        eigs = np.linalg.eigvalsh(local)
        delta = max(delta, float(eigs[:, -1].max() - 1.0), float(1.0 - eigs[:, 0].min()))
    return RicEstimate(order=q, delta=delta, method="exact-exhaustive", supports_examined=count)


def highest_rip_order(A, cap=DEFAULT_ENUMERATION_CAP):
    """Largest order t with delta_t < 1, found by an incremental sweep.

    Monotonicity of delta_t in t makes the first failing order final.
    Returns 0 when even delta_1 >= 1.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    for t in range(1, n + 1):
        if ric_exact(A, t, cap=cap).delta >= 1.0:
            return t - 1
    return n


def theta_constant(A, y):
    """Worst best-fit residual over all nonempty column supports.

    Enlarging a support never increases the projection residual, so the
    maximum is attained on a singleton; only the n one-column projections
    are evaluated.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.ndim != 1 or A.shape[0] != y.size:
        raise ValueError("A must be m x n and y length m")
    yy = float(y @ y)
    col_sq = np.einsum("ij,ij->j", A, A)
    corr = A.T @ y
    best = np.full(A.shape[1], yy)
    nz = col_sq > 0
    best[nz] = yy - corr[nz] ** 2 / col_sq[nz]
    return float(np.sqrt(max(float(best.max()), 0.0)))


def exhaustive_theta(A, y):
    """Brute-force oracle for :func:`theta_constant`: max over every
    nonempty subset of the minimum-norm projection residual."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n = A.shape[1]
    worst = 0.0
    for size in range(1, n + 1):
        for sup in itertools.combinations(range(n), size):
            coef = np.linalg.lstsq(A[:, list(sup)], y, rcond=None)[0]
            worst = max(worst, float(np.linalg.norm(y - A[:, list(sup)] @ coef)))
    return worst


def _selection_width(k, gamma):
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return 1.0 + math.sqrt(1.0 + k * gamma * gamma)


def domp_ric_bound(k, gamma):
    """RIC threshold below which the dynamic-selection contraction factor
    stays below one: 1 / sqrt(1 + (1 + sqrt(1 + k gamma^2))^2)."""
    phi = _selection_width(k, gamma)
    return 1.0 / math.sqrt(1.0 + phi * phi)


def edomp_ric_bound(k, gamma):
    """RIC threshold for the thresholded variant; strictly below
    :func:`domp_ric_bound` since hard thresholding inflates the
    contraction factor by the golden-ratio constant."""
    phi = _selection_width(k, gamma)
    scaled = GOLDEN_ETA * phi
    return 2.0 / (math.sqrt(4.0 + scaled * scaled) + scaled)


def _geometric_sum(ratio, k):
    # sum_{i=0}^{k-1} ratio^i, with the ratio -> 1 limit handled exactly
    if ratio == 1.0:
        return float(k)
    return (ratio**k - 1.0) / (ratio - 1.0)


@dataclass(frozen=True)
class BoundConstants:
    """Every constant appearing in the per-iteration error bounds,
    evaluated at one (delta, k, gamma, sigma, ||A||_2, theta) tuple."""

    delta: float
    k: int
    gamma: float
    sigma: float
    matrix_norm: float
    theta: float
    phi: float
    beta: float
    varrho: float
    c1: float
    c2: float
    tau: float
    eta: float
    zeta: float
    beta_star: float
    tau_star: float
    proximity_constant: float
    epsilon: float
    beta_lt_one: bool
    beta_star_lt_one: bool


def bound_constants(delta, k, gamma, sigma, matrix_norm, theta):
    """Evaluate the error-bound constants at the given inputs.

    ``delta`` is (an upper bound on) the RIC of order ck.  The ridge
    proximity constant and the sigma-dependent slack term are reported
    alongside; they vanish as sigma grows and are excluded from the
    reconstruction-bound inequality itself.
    """
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    phi = _selection_width(k, gamma)
    one_minus_sq = math.sqrt(1.0 - delta * delta)
    beta = phi * delta / one_minus_sq
    varrho = math.sqrt((1.0 + delta) / (1.0 - delta))
    c1 = 2.0 / math.sqrt(1.0 - delta)
    c2 = phi * math.sqrt(1.0 + delta) / one_minus_sq + math.sqrt(1.0 + delta) / (1.0 - delta)
    geo = _geometric_sum(varrho, k)
    tau = c1 * geo + (c2 / (1.0 - beta) if beta < 1.0 else math.inf)
    norm = float(matrix_norm)
    root_sigma = math.sqrt(sigma)
    proximity_constant = math.sqrt(2.0 * norm / root_sigma + norm * norm / sigma) + norm / root_sigma
    epsilon = float(theta) * proximity_constant / math.sqrt(1.0 - delta)
    inflate = GOLDEN_ETA / one_minus_sq
    beta_star = inflate * beta
    zeta = math.sqrt(1.0 + delta) / (1.0 - delta)
    c2_star = inflate * c2
    tau_star = inflate * c1 * geo + (
        (c2_star + zeta) / (1.0 - beta_star) if beta_star < 1.0 else math.inf
    )
    return BoundConstants(
        delta=delta,
        k=int(k),
        gamma=float(gamma),
        sigma=float(sigma),
        matrix_norm=norm,
        theta=float(theta),
        phi=phi,
        beta=beta,
        varrho=varrho,
        c1=c1,
        c2=c2,
        tau=tau,
        eta=GOLDEN_ETA,
        zeta=zeta,
        beta_star=beta_star,
        tau_star=tau_star,
        proximity_constant=proximity_constant,
        epsilon=epsilon,
        beta_lt_one=beta < 1.0,
        beta_star_lt_one=beta_star < 1.0,
    )


@dataclass(frozen=True)
class ProjectionProximityCheck:
    """One instance of the ridge-projection proximity verification."""

    passed: bool
    lhs: float
    rhs: float
    slack: float
    theta: float
    penalized_size: int
    penalized_norm: float
    penalized_bound: float
    projection_residual: float


def verify_projection_proximity(A, y, support, selected, k, sigma, true_support=()):
    """Check that the ridge-penalized projection stays near the exact one.

    Reconstructs the least-squares iterate on ``support``, grows it by
    ``selected``, builds the penalized index set as the remaining top-k
    gradient indices outside the grown support and the true support,
    solves both the exact and the ridge-penalized projection, and
    compares ||A (x_ridge - x_exact)||_2 against its closed-form bound.
    The two side bounds (ridge entries squeezed below theta / sqrt(sigma),
    projection residual below theta) are checked as well.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n = A.shape[1]
    support = np.asarray(sorted(set(int(i) for i in support)), dtype=np.int64)
    selected = np.asarray(sorted(set(int(i) for i in selected)), dtype=np.int64)
    x_current = linalg.restricted_least_squares(A, y, support)
    r = linalg.residual_gradient(A, y, x_current)
    grown = np.union1d(support, selected).astype(np.int64)
    top = linalg.top_q_indices(r, min(int(k), n))
    excluded = np.union1d(grown, np.asarray(sorted(set(int(i) for i in true_support)), dtype=np.int64))
    penalized = np.setdiff1d(top, excluded)
    enlarged = np.union1d(grown, penalized).astype(np.int64)

    x_exact = linalg.restricted_least_squares(A, y, grown)
    x_ridge = linalg.penalized_restricted_ls(A, y, enlarged, penalized, sigma)

    theta = theta_constant(A, y)
    norm = linalg.spectral_norm(A)
    root_sigma = math.sqrt(sigma)
    proximity_constant = math.sqrt(2.0 * norm / root_sigma + norm * norm / sigma) + norm / root_sigma

    lhs = float(np.linalg.norm(A @ (x_ridge - x_exact)))
    rhs = proximity_constant * theta
    penalized_norm = float(np.linalg.norm(x_ridge[penalized])) if penalized.size else 0.0
    penalized_bound = theta / root_sigma
    projection_residual = float(np.linalg.norm(y - A @ x_exact))

    passed = (
        rhs - lhs >= 0.0
        and penalized_bound - penalized_norm >= 0.0
        and theta - projection_residual >= 0.0
    )
    return ProjectionProximityCheck(
        passed=passed,
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        theta=theta,
        penalized_size=int(penalized.size),
        penalized_norm=penalized_norm,
        penalized_bound=penalized_bound,
        projection_residual=projection_residual,
    )


@dataclass(frozen=True)
class RecoveryBoundCheck:
    """Per-iteration margins of the reconstruction error bound on one run."""

    algorithm: str
    applicable: bool
    delta: float
    delta_limit: float
    eligible_iterations: int
    margins: tuple
    passed: bool | None
    note: str = ""
    constants: BoundConstants | None = field(default=None, compare=False)


def verify_recovery_bound(
    A,
    x,
    noise,
    k,
    gamma,
    c,
    algorithm="domp",
    cap=DEFAULT_ENUMERATION_CAP,
):
    """Run the solver and test the per-iteration error bound against it.

    The exact RIC of order c*k gates applicability: instances above the
    closed-form threshold are reported inconclusive, never failed.  While
    the accumulated support stays within (c-2)k the iterate's distance to
    the best k-term approximation must lie below the geometric bound plus
    the noise term.
    """
    if algorithm not in ("domp", "edomp"):
        raise ValueError("recovery bound applies to the dynamic-selection solvers")
    if c <= 2:
        raise ValueError(f"c must exceed 2, got {c}")
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    noise = np.asarray(noise, dtype=float)
    ric = ric_exact(A, c * k, cap=cap)
    limit = domp_ric_bound(k, gamma) if algorithm == "domp" else edomp_ric_bound(k, gamma)
    if ric.delta >= limit:
        return RecoveryBoundCheck(
            algorithm=algorithm,
            applicable=False,
            delta=ric.delta,
            delta_limit=limit,
            eligible_iterations=0,
            margins=(),
            passed=None,
            note="RIC gate not met; bound not applicable",
        )
    if ric.delta == 0.0:
        return RecoveryBoundCheck(
            algorithm=algorithm,
            applicable=False,
            delta=0.0,
            delta_limit=limit,
            eligible_iterations=0,
            margins=(),
            passed=None,
            note="degenerate zero RIC; contraction factor collapses",
        )

    y = A @ x + noise
    best_support = linalg.top_q_indices(x, k)
    x_best = linalg.restrict_to_support(x, best_support)
    nu_prime = float(np.linalg.norm(y - A @ x_best))
    matrix_norm = linalg.spectral_norm(A)
    consts = bound_constants(
        ric.delta, k, gamma, sigma=1e8 * matrix_norm**2 or 1.0,
        matrix_norm=matrix_norm, theta=theta_constant(A, y),
    )
    decay = consts.beta if algorithm == "domp" else consts.beta_star
    tail = consts.tau if algorithm == "domp" else consts.tau_star
    start_gap = float(np.linalg.norm(x_best))
    support_cap = (c - 2) * k

    margins = []
    state = algorithms.initial_state(A, y)
    zero_scale = np.abs(A.T @ y).max() if y.any() else 0.0
    while state.p <= c * k + 4:
        if np.abs(state.r).max() <= algorithms.ZERO_RESIDUAL_RTOL * zero_scale:
            break
        try:
            if algorithm == "domp":
                state = algorithms.domp_step(state, A, y, k, gamma)
            else:
                state = algorithms.edomp_step(state, A, y, k, gamma)
        except algorithms.ZeroResidualError:
            break
        if state.support.size > support_cap:
            break
        with np.errstate(over="ignore"):
            geometric = (
                np.float64(decay) ** (state.p - 1)
                * (np.float64(consts.varrho) / np.float64(decay)) ** k
                * start_gap
            )
        rhs = float(geometric + tail * nu_prime)
        lhs = float(np.linalg.norm(state.x - x_best))
        margins.append((state.p, lhs, rhs, rhs - lhs))
    passed = all(m[3] >= 0.0 for m in margins)
    return RecoveryBoundCheck(
        algorithm=algorithm,
        applicable=True,
        delta=ric.delta,
        delta_limit=limit,
        eligible_iterations=len(margins),
        margins=tuple(margins),
        passed=passed,
        constants=consts,
    )


@dataclass
class VerificationSummary:
    """Aggregated outcome of one verification suite, JSON-serializable."""

    suite: str
    instances: int
    violations: int
    inconclusive: int
    min_slack: float | None
    parameters: dict
    seed: int

    def to_json(self, indent=None):
        payload = asdict(self)
        if payload["min_slack"] is not None:
            payload["min_slack"] = float(payload["min_slack"])
        return json.dumps(payload, indent=indent, sort_keys=True)


def _trial_rng(seed, trial):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def projection_proximity_suite(
    trials,
    seed,
    m=15,
    n=30,
    k=4,
    gamma=0.9,
    sigma_scale=1e8,
):
    """Randomized proximity verification across partially-run recoveries."""
    violations = 0
    min_slack = None
    for trial in range(int(trials)):
        rng = _trial_rng(seed, trial)
        A = rng.standard_normal((m, n))
        true_support = rng.choice(n, size=k, replace=False)
        x = np.zeros(n)
        x[true_support] = rng.standard_normal(k)
        y = A @ x
        steps = 1 + trial % max(k - 1, 1)
        state = algorithms.initial_state(A, y)
        scale = np.abs(A.T @ y).max()
        for _ in range(steps):
            if np.abs(state.r).max() <= 1e-12 * scale:
                break
            state = algorithms.domp_step(state, A, y, k, gamma)
        if np.abs(state.r).max() <= 1e-12 * scale:
            state = algorithms.initial_state(A, y)
        selected = algorithms.select_dynamic_indices(state.r, k, gamma)
        sigma = sigma_scale * linalg.spectral_norm(A) ** 2
        check = verify_projection_proximity(
            A, y, state.support, selected, k, sigma, true_support=true_support
        )
        slack = min(
            check.slack,
            check.penalized_bound - check.penalized_norm,
            check.theta - check.projection_residual,
        )
        min_slack = slack if min_slack is None else min(min_slack, slack)
        violations += 0 if check.passed else 1
    return VerificationSummary(
        suite="proximity",
        instances=int(trials),
        violations=violations,
        inconclusive=0,
        min_slack=min_slack,
        parameters={"m": m, "n": n, "k": k, "gamma": gamma, "sigma_scale": sigma_scale},
        seed=int(seed),
    )


def recovery_bound_suite(
    trials,
    seed,
    m=8,
    n=12,
    k=1,
    c=3,
    gamma=0.9,
    algorithm="domp",
    noise_amplitude=0.0,
    cap=DEFAULT_ENUMERATION_CAP,
):
    """Randomized reconstruction-bound verification on a gated ensemble.

    Matrices are Gaussian scaled by 1/sqrt(m); instances whose exact RIC
    misses the closed-form gate count as inconclusive.
    """
    violations = 0
    inconclusive = 0
    min_slack = None
    for trial in range(int(trials)):
        rng = _trial_rng(seed, trial)
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        support = rng.choice(n, size=k, replace=False)
        x = np.zeros(n)
        x[support] = rng.standard_normal(k)
        noise = noise_amplitude * rng.standard_normal(m)
        check = verify_recovery_bound(A, x, noise, k, gamma, c, algorithm=algorithm, cap=cap)
        if not check.applicable:
            inconclusive += 1
            continue
        if check.margins:
            slack = min(mg[3] for mg in check.margins)
            min_slack = slack if min_slack is None else min(min_slack, slack)
        if not check.passed:
            violations += 1
    return VerificationSummary(
        suite=f"bound-{algorithm}",
        instances=int(trials),
        violations=violations,
        inconclusive=inconclusive,
        min_slack=min_slack,
        parameters={
            "m": m,
            "n": n,
            "k": k,
            "c": c,
            "gamma": gamma,
            "noise_amplitude": noise_amplitude,
        },
        seed=int(seed),
    )


def _threshold_inequality_trial(rng):
    """One check of the scalar inequality behind the error-recursion merge.

    Premise: t <= a1 * sqrt(t^2 + a2^2) + a3 with 0 <= a1 < 1 and
    a2, a3 >= 0.  Sampled by solving the fixed point t* = f(t*) in closed
    form and drawing t uniformly from [0, t*], so every trial exercises a
    premise-satisfying tuple.  Returns the worst slack of the two
    conclusions.
    """
    a1 = float(rng.uniform(0.0, 0.999))
    a2 = float(rng.uniform(0.0, 5.0))
    a3 = float(rng.uniform(0.0, 5.0))
    disc = a1 * a1 * a3 * a3 + (1.0 - a1 * a1) * (a2 * a2 + a3 * a3)
    s_star = (a1 * a3 + math.sqrt(disc)) / (1.0 - a1 * a1)
    t_star = math.sqrt(max(s_star * s_star - a2 * a2, 0.0))
    t = float(rng.uniform(0.0, 1.0)) * t_star
    assert t <= a1 * math.sqrt(t * t + a2 * a2) + a3 + 1e-12
    root = math.sqrt(1.0 - a1 * a1)
    bound_t = a1 * a2 / root + a3 / (1.0 - a1)
    bound_s = a2 / root + a3 / (1.0 - a1)
    return min(bound_t - t, bound_s - math.sqrt(t * t + a2 * a2))


def _thresholding_distance_trial(rng):
    """One check of the hard-thresholding distance inequality: for any z
    and any k-sparse w, ||w - H_k(z)|| is within the golden-ratio factor
    of ||(w - z)|| restricted to the union of both supports."""
    n = int(rng.integers(6, 20))
    k = int(rng.integers(1, max(n // 2, 2)))
    z = rng.standard_normal(n)
    w = np.zeros(n)
    w_support = rng.choice(n, size=k, replace=False)
    w[w_support] = rng.standard_normal(k)
    hk = linalg.hard_threshold(z, k)
    union = np.union1d(np.flatnonzero(w), np.flatnonzero(hk)).astype(np.int64)
    lhs = float(np.linalg.norm(w - hk))
    rhs = GOLDEN_ETA * float(np.linalg.norm((w - z)[union]))
    return rhs - lhs


def _projection_error_trial(rng, m=40, n=10, k=2, cap=DEFAULT_ENUMERATION_CAP):
    """One check of the support-projection error bound with exact RICs.

    Resamples the matrix (deterministically) until delta_2k < 1 so the
    bound is defined.
    """
    for _ in range(64):
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        delta_2k = ric_exact(A, 2 * k, cap=cap).delta
        if delta_2k < 1.0:
            break
    else:
        return None
    delta_k = ric_exact(A, k, cap=cap).delta
    support = rng.choice(n, size=k, replace=False)
    x_best = np.zeros(n)
    x_best[support] = rng.standard_normal(k)
    nu = 0.05 * rng.standard_normal(m)
    y = A @ x_best + nu
    v = np.zeros(n)
    v_support = rng.choice(n, size=k, replace=False)
    v[v_support] = rng.standard_normal(k)
    z = linalg.restricted_least_squares(A, y, v_support)
    lhs = float(np.linalg.norm(z - x_best))
    rhs = float(np.linalg.norm(x_best - v)) / math.sqrt(1.0 - delta_2k * delta_2k) + math.sqrt(
        1.0 + delta_k
    ) / (1.0 - delta_2k) * float(np.linalg.norm(nu))
    return rhs - lhs


def auxiliary_inequality_suite(trials, seed):
    """Randomized checks of the three inequalities the error bounds rest
    on: the scalar recursion-merge inequality, the hard-thresholding
    distance inequality, and the support-projection error bound."""
    counts = {"threshold-inequality": 0, "thresholding-distance": 0, "projection-error": 0}
    inconclusive = 0
    min_slack = None
    for trial in range(int(trials)):
        rng = _trial_rng(seed, trial)
        slacks = {
            "threshold-inequality": _threshold_inequality_trial(rng),
            "thresholding-distance": _thresholding_distance_trial(rng),
            "projection-error": _projection_error_trial(rng),
        }
        for name, slack in slacks.items():
            if slack is None:
                inconclusive += 1
                continue
            if slack < 0:
                counts[name] += 1
            min_slack = slack if min_slack is None else min(min_slack, slack)
    return VerificationSummary(
        suite="aux-inequalities",
        instances=int(trials),
        violations=sum(counts.values()),
        inconclusive=inconclusive,
        min_slack=min_slack,
        parameters={"per_family_violations": counts},
        seed=int(seed),
    )


def theta_equivalence_suite(trials, seed, max_n=10, tolerance=1e-10):
    """Singleton-maximum theta against the exhaustive all-subsets oracle."""
    violations = 0
    min_slack = None
    for trial in range(int(trials)):
        rng = _trial_rng(seed, trial)
        n = int(rng.integers(3, max_n + 1))
        m = int(rng.integers(3, 9))
        A = rng.standard_normal((m, n))
        y = rng.standard_normal(m)
        gap = abs(theta_constant(A, y) - exhaustive_theta(A, y))
        slack = tolerance - gap
        min_slack = slack if min_slack is None else min(min_slack, slack)
        if gap > tolerance:
            violations += 1
    return VerificationSummary(
        suite="theta",
        instances=int(trials),
        violations=violations,
        inconclusive=0,
        min_slack=min_slack,
        parameters={"max_n": max_n, "tolerance": tolerance},
        seed=int(seed),
    )


def ric_monotonicity_suite(trials, seed, max_order=4, tolerance=1e-10):
    """delta_q must be nondecreasing in q on random small matrices."""
    violations = 0
    min_slack = None
    for trial in range(int(trials)):
        rng = _trial_rng(seed, trial)
        m = int(rng.integers(4, 8))
        n = int(rng.integers(max_order + 1, 9))
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        deltas = [ric_exact(A, q).delta for q in range(1, max_order + 1)]
        for low, high in zip(deltas, deltas[1:]):
            slack = high - low + tolerance
            min_slack = slack if min_slack is None else min(min_slack, slack)
            if high < low - tolerance:
                violations += 1
    return VerificationSummary(
        suite="ric-monotone",
        instances=int(trials),
        violations=violations,
        inconclusive=0,
        min_slack=min_slack,
        parameters={"max_order": max_order, "tolerance": tolerance},
        seed=int(seed),
    )
