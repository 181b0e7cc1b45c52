"""Greedy sparse-recovery solvers.

OMP, generalized OMP (N indices per iteration), the dynamic-selection
solvers that add every sufficiently large gradient entry at once (with a
hard-thresholded "enhanced" variant that keeps iterates k-sparse), and
the CoSaMP / subspace-pursuit baselines.

The support-growing solvers are exposed as pure step functions over an
immutable :class:`IterateState`, plus a single :func:`run` entry point
that applies a stopping rule and records a per-iteration trace.  States
carry a snapshot of an incremental QR factorization so that nested
supports are re-projected in O(m t) per added column; the factorization
falls back to a from-scratch minimum-norm solve when it goes degenerate.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg

__all__ = [
    "ALGORITHMS",
    "AlgorithmConfig",
    "AlgorithmReport",
    "IterateState",
    "StoppingRule",
    "TraceEntry",
    "ZeroResidualError",
    "cosamp_run",
    "domp_step",
    "edomp_step",
    "gomp_run",
    "gomp_step",
    "initial_state",
    "omp_step",
    "run",
    "select_dynamic_indices",
    "sp_run",
]

ALGORITHMS = ("omp", "gomp", "domp", "edomp", "cosamp", "sp")

# Gradient residuals below this fraction of ||A^T y||_inf are treated as
# zero so noise-floor indices are never selected.
ZERO_RESIDUAL_RTOL = 1e-13


class ZeroResidualError(RuntimeError):
    """The gradient residual is zero: the iterate is already a global
    minimizer, so the caller must stop instead of selecting indices."""


@dataclass(frozen=True)
class IterateState:
    """One solver iterate: estimate, support, gradient residual, counter."""

    x: np.ndarray
    support: np.ndarray
    r: np.ndarray
    p: int
    residual_norm: float
    selected: int = 0
    solver: "linalg.IncrementalQRSolver | None" = field(default=None, repr=False, compare=False)


def initial_state(A, y):
    """Zero iterate: x = 0, empty support, r = A^T y."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    return IterateState(
        x=np.zeros(A.shape[1]),
        support=np.empty(0, dtype=np.int64),
        r=A.T @ y,
        p=0,
        residual_norm=float(np.linalg.norm(y)),
        solver=linalg.IncrementalQRSolver(A, y),
    )


def select_dynamic_indices(r, k, gamma):
    """Indices of the top-k gradient entries within factor ``gamma`` of the max.

    The result always contains an index of maximum magnitude and has
    between 1 and k elements.  Raises :class:`ZeroResidualError` for a
    zero residual, which means the current iterate is already optimal.
    """
    r = np.asarray(r, dtype=float)
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    rmax = np.abs(r).max() if r.size else 0.0
    if rmax == 0.0:
        raise ZeroResidualError("gradient residual is zero")
    top = linalg.top_q_indices(r, min(int(k), r.size))
    return top[np.abs(r[top]) >= gamma * rmax]


def _project(A, y, state, new_support, selected, from_scratch=False):
    """Build the next state: least squares on ``new_support``, fresh residual."""
    solver = state.solver
    x = None
    if not from_scratch:
        if solver is None:
            solver = linalg.IncrementalQRSolver(A, y).extended(new_support)
        else:
            fresh = new_support[~np.isin(new_support, state.support)]
            solver = solver.extended(fresh)
        x = solver.solve()
    if x is None:
        x = linalg.restricted_least_squares(A, y, new_support)
    misfit = y - A @ x
    return IterateState(
        x=x,
        support=np.asarray(new_support, dtype=np.int64),
        r=A.T @ misfit,
        p=state.p + 1,
        residual_norm=float(np.linalg.norm(misfit)),
        selected=selected,
        solver=solver,
    )


def _union(support, added):
    return np.union1d(support, added).astype(np.int64)


def omp_step(state, A, y):
    """Add the single largest-magnitude gradient index, then re-project."""
    added = _top_nonzero(state.r, 1)
    return _project(A, y, state, _union(state.support, added), added.size)


def gomp_step(state, A, y, n_select):
    """Add the ``n_select`` largest-magnitude gradient indices, then re-project."""
    added = _top_nonzero(state.r, int(n_select))
    return _project(A, y, state, _union(state.support, added), added.size)


def _top_nonzero(r, q):
    r = np.asarray(r, dtype=float)
    if not r.size or np.abs(r).max() == 0.0:
        raise ZeroResidualError("gradient residual is zero")
    return linalg.top_q_indices(r, min(q, r.size))


def domp_step(state, A, y, k, gamma):
    """Add every dynamically selected index at once, then re-project."""
    theta = select_dynamic_indices(state.r, k, gamma)
    return _project(A, y, state, _union(state.support, theta), theta.size)


def edomp_step(state, A, y, k, gamma, reset_support=False):
    """Dynamic selection followed by hard thresholding to k nonzeros.

    While the accumulated support has at most k indices this coincides
    with :func:`domp_step`.  Once it grows past k, the tentative solution
    is thresholded to its k largest magnitudes and re-projected on that
    reduced support (rebuilt from scratch).  The accumulated support is
    carried forward as written unless ``reset_support`` is set, in which
    case it is replaced by the support of the thresholded iterate.
    """
    theta = select_dynamic_indices(state.r, k, gamma)
    grown = _union(state.support, theta)
    if grown.size <= k:
        return _project(A, y, state, grown, theta.size)
    tentative = _project(A, y, state, grown, theta.size)
    keep = linalg.top_q_indices(tentative.x, k)
    x = linalg.restricted_least_squares(A, y, keep)
    misfit = y - A @ x
    if reset_support:
        support = np.flatnonzero(x).astype(np.int64)
        solver = None
    else:
        support = grown
        solver = tentative.solver
    return IterateState(
        x=x,
        support=support,
        r=A.T @ misfit,
        p=state.p + 1,
        residual_norm=float(np.linalg.norm(misfit)),
        selected=theta.size,
        solver=solver,
    )


@dataclass(frozen=True)
class StoppingRule:
    """Exactly one termination test: an iteration budget, a threshold on
    the measurement or gradient residual, or a relative-error threshold
    against a known ground truth."""

    kind: str
    epsilon: float = 0.0
    iterations: int | None = None
    truth: np.ndarray | None = None

    KINDS = ("max-iterations", "measurement-residual", "gradient-residual", "relative-error")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.kind == "max-iterations" and (self.iterations is None or self.iterations < 0):
            raise ValueError("max-iterations rule needs a nonnegative iteration count")
        if self.kind == "relative-error" and self.truth is None:
            raise ValueError("relative-error rule needs the ground truth")

    @classmethod
    def max_iterations(cls, iterations):
        return cls(kind="max-iterations", iterations=int(iterations))

    @classmethod
    def measurement_residual(cls, epsilon):
        return cls(kind="measurement-residual", epsilon=float(epsilon))

    @classmethod
    def gradient_residual(cls, epsilon):
        return cls(kind="gradient-residual", epsilon=float(epsilon))

    @classmethod
    def relative_error(cls, epsilon, truth):
        return cls(
            kind="relative-error",
            epsilon=float(epsilon),
            truth=np.asarray(truth, dtype=float),
        )

    def satisfied(self, state):
        if self.kind == "max-iterations":
            return state.p >= self.iterations
        if self.kind == "measurement-residual":
            return state.residual_norm <= self.epsilon
        if self.kind == "gradient-residual":
            return float(np.linalg.norm(state.r)) <= self.epsilon
        scale = float(np.linalg.norm(self.truth))
        err = float(np.linalg.norm(state.x - self.truth))
        return err <= self.epsilon * scale if scale > 0 else err <= self.epsilon


@dataclass(frozen=True)
class AlgorithmConfig:
    """Which solver to run and with what parameters.

    ``gamma`` applies to the dynamic-selection solvers, ``n_select`` to
    gOMP only.  ``max_iterations`` overrides the default budget (the
    sparsity level for the support-growing solvers, 500 for CoSaMP/SP).
    """

    algorithm: str
    k: int
    gamma: float = 0.9
    n_select: int | None = None
    stopping: StoppingRule | None = None
    max_iterations: int | None = None
    tolerance: float = ZERO_RESIDUAL_RTOL
    reset_support: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.k < 1:
            raise ValueError(f"sparsity k must be at least 1, got {self.k}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.algorithm == "gomp":
            n = self.n_select if self.n_select is not None else 1
            if not 1 <= n < self.k:
                raise ValueError(f"gOMP needs 1 <= N < k, got N={n}, k={self.k}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")


@dataclass(frozen=True)
class TraceEntry:
    p: int
    support_size: int
    selected: int
    residual_norm: float
    gradient_norm: float


@dataclass
class AlgorithmReport:
    """Outcome of one solver run, with the full per-iteration trace."""

    algorithm: str
    x: np.ndarray
    support: np.ndarray
    iterations: int
    termination: str
    trace: list
    wall_time: float
    residual_norm: float
    gradient_norm: float
    success: bool | None = None
    relative_error: float | None = None


def _budget(config):
    if config.stopping is not None and config.stopping.kind == "max-iterations":
        return config.stopping.iterations
    if config.max_iterations is not None:
        return config.max_iterations
    return 500 if config.algorithm in ("cosamp", "sp") else config.k


def _trace_entry(state):
    return TraceEntry(
        p=state.p,
        support_size=int(state.support.size),
        selected=int(state.selected),
        residual_norm=state.residual_norm,
        gradient_norm=float(np.linalg.norm(state.r)),
    )


def _residual_is_zero(state, zero_scale, tolerance):
    rmax = np.abs(state.r).max() if state.r.size else 0.0
    return rmax <= tolerance * zero_scale


def _finish(config, state, trace, reason, started, truth, success_threshold):
    success = None
    rel = None
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        scale = float(np.linalg.norm(truth))
        err = float(np.linalg.norm(state.x - truth))
        rel = err / scale if scale > 0 else err
        success = rel <= success_threshold
    return AlgorithmReport(
        algorithm=config.algorithm,
        x=state.x,
        support=state.support,
        iterations=state.p,
        termination=reason,
        trace=trace,
        wall_time=time.perf_counter() - started,
        residual_norm=state.residual_norm,
        gradient_norm=float(np.linalg.norm(state.r)),
        success=success,
        relative_error=rel,
    )


def run(A, y, config, truth=None, success_threshold=1e-5):
    """Run the configured solver on (A, y) and report the full trace.

    Deterministic given its inputs.  When a ground truth is available
    (either here or inside a relative-error stopping rule) the report
    carries the relative error and a success flag at ``success_threshold``.

    Termination reasons: the stopping rule's kind once it fires,
    "global-optimum" on a (numerically) zero gradient residual,
    "iteration-cap" when the budget runs out, "stalled" when an iteration
    changes neither support nor estimate (possible for the thresholded
    variant once its selection settles), and "residual-increase" for the
    subspace-pursuit early stop.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.ndim != 1 or A.shape[0] != y.size:
        raise ValueError("A must be m x n and y length m")
    if not isinstance(config, AlgorithmConfig):
        raise ValueError("config must be an AlgorithmConfig")
    if config.k >= A.shape[0]:
        warnings.warn(
            f"sparsity k={config.k} is not below m={A.shape[0]}; restricted "
            "projections may become underdetermined",
            RuntimeWarning,
            stacklevel=2,
        )
    if truth is None and config.stopping is not None and config.stopping.truth is not None:
        truth = config.stopping.truth

    started = time.perf_counter()
    if config.algorithm == "cosamp":
        return _cosamp(A, y, config, started, truth, success_threshold)
    if config.algorithm == "sp":
        return _sp(A, y, config, started, truth, success_threshold)

    if config.algorithm == "omp":
        step = lambda s: omp_step(s, A, y)
    elif config.algorithm == "gomp":
        n_select = config.n_select if config.n_select is not None else 1
        step = lambda s: gomp_step(s, A, y, n_select)
    elif config.algorithm == "domp":
        step = lambda s: domp_step(s, A, y, config.k, config.gamma)
    else:
        step = lambda s: edomp_step(s, A, y, config.k, config.gamma, config.reset_support)

    budget = _budget(config)
    zero_scale = np.abs(A.T @ y).max() if y.any() else 0.0
    state = initial_state(A, y)
    trace = []
    while True:
        if config.stopping is not None and config.stopping.satisfied(state):
            reason = config.stopping.kind
            break
        if _residual_is_zero(state, zero_scale, config.tolerance):
            reason = "global-optimum"
            break
        if state.p >= budget:
            reason = "iteration-cap"
            break
        previous = state
        try:
            state = step(state)
        except ZeroResidualError:
            reason = "global-optimum"
            break
        trace.append(_trace_entry(state))
        if (
            state.support.size == previous.support.size
            and np.array_equal(state.support, previous.support)
            and np.array_equal(state.x, previous.x)
        ):
            reason = "stalled"
            break
    return _finish(config, state, trace, reason, started, truth, success_threshold)


def _cosamp(A, y, config, started, truth, success_threshold):
    """Standard CoSaMP: merge the top-2k gradient indices into the current
    support, least squares on the union, keep the k largest entries of
    the solution without re-solving, update the residual."""
    k = config.k
    n = A.shape[1]
    budget = _budget(config)
    zero_scale = np.abs(A.T @ y).max() if y.any() else 0.0
    state = initial_state(A, y)
    trace = []
    while True:
        if config.stopping is not None and config.stopping.satisfied(state):
            reason = config.stopping.kind
            break
        if _residual_is_zero(state, zero_scale, config.tolerance):
            reason = "global-optimum"
            break
        if state.p >= budget:
            reason = "iteration-cap"
            break
        proxy = linalg.top_q_indices(state.r, min(2 * k, n))
        merged = np.union1d(proxy, np.flatnonzero(state.x)).astype(np.int64)
        b = linalg.restricted_least_squares(A, y, merged)
        x = linalg.hard_threshold(b, k)
        misfit = y - A @ x
        state = IterateState(
            x=x,
            support=np.flatnonzero(x).astype(np.int64),
            r=A.T @ misfit,
            p=state.p + 1,
            residual_norm=float(np.linalg.norm(misfit)),
            selected=int(proxy.size),
        )
        trace.append(_trace_entry(state))
    return _finish(config, state, trace, reason, started, truth, success_threshold)


def _sp(A, y, config, started, truth, success_threshold):
    """Standard subspace pursuit: add the top-k gradient indices, least
    squares on the union, keep the top-k entries, re-project on them.
    Terminates with the previous iterate once the measurement residual
    stops decreasing."""
    k = config.k
    budget = _budget(config)
    zero_scale = np.abs(A.T @ y).max() if y.any() else 0.0
    state = initial_state(A, y)
    trace = []
    while True:
        if config.stopping is not None and config.stopping.satisfied(state):
            reason = config.stopping.kind
            break
        if _residual_is_zero(state, zero_scale, config.tolerance):
            reason = "global-optimum"
            break
        if state.p >= budget:
            reason = "iteration-cap"
            break
        proxy = linalg.top_q_indices(state.r, min(k, A.shape[1]))
        merged = np.union1d(proxy, state.support).astype(np.int64)
        b = linalg.restricted_least_squares(A, y, merged)
        keep = linalg.top_q_indices(b, min(k, A.shape[1]))
        x = linalg.restricted_least_squares(A, y, keep)
        misfit = y - A @ x
        candidate = IterateState(
            x=x,
            support=np.sort(keep).astype(np.int64),
            r=A.T @ misfit,
            p=state.p + 1,
            residual_norm=float(np.linalg.norm(misfit)),
            selected=int(proxy.size),
        )
        if state.p > 0 and candidate.residual_norm >= state.residual_norm:
            reason = "residual-increase"
            break
        state = candidate
        trace.append(_trace_entry(state))
    return _finish(config, state, trace, reason, started, truth, success_threshold)


def gomp_run(A, y, config, truth=None, success_threshold=1e-5):
    """Convenience wrapper: run gOMP with the given config."""
    if config.algorithm != "gomp":
        raise ValueError("gomp_run needs a gomp config")
    return run(A, y, config, truth=truth, success_threshold=success_threshold)


def cosamp_run(A, y, config, truth=None, success_threshold=1e-5):
    """Convenience wrapper: run CoSaMP with the given config."""
    if config.algorithm != "cosamp":
        raise ValueError("cosamp_run needs a cosamp config")
    return run(A, y, config, truth=truth, success_threshold=success_threshold)


def sp_run(A, y, config, truth=None, success_threshold=1e-5):
    """Convenience wrapper: run subspace pursuit with the given config."""
    if config.algorithm != "sp":
        raise ValueError("sp_run needs an sp config")
    return run(A, y, config, truth=truth, success_threshold=success_threshold)
