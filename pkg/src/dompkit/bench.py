"""Random problem ensembles and the experiment suite.

Seeded Gaussian measurement ensembles, a per-trial RNG-stream discipline
that makes every sweep reproducible cell by cell, and the four
experiments: selection-threshold sweep, iteration-budget sweep, success
curves over the sparsity level (noiseless and noisy), and the scaling
benchmark of iterations-to-recovery and runtime.

Trials are embarrassingly parallel: each trial owns its instance, the
RNG stream is derived from (master seed, instance coordinates, trial
index), and results are aggregated in task order, so output is identical
for any worker count and extending the trial count leaves earlier trials
unchanged.
"""

import hashlib
import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from statistics import median

import numpy as np

from . import __version__
from .algorithms import AlgorithmConfig, StoppingRule, run
from .linalg import top_q_indices

__all__ = [
    "EnsembleSpec",
    "SweepCell",
    "SweepResult",
    "TrialOutcome",
    "crc_threshold",
    "gamma_sweep",
    "generate_problem",
    "iteration_sweep",
    "run_trial",
    "scaling_benchmark",
    "success_curves",
]

SCALING_MODES = ("raw", "one-over-sqrt-m")


@dataclass(frozen=True)
class EnsembleSpec:
    """One random-problem ensemble: sizes, column scaling, seed, noise."""

    m: int
    n: int
    k: int
    master_seed: int
    scaling: str = "raw"
    noise_amplitude: float = 0.0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise ValueError("m, n and k must be positive")
        if self.scaling not in SCALING_MODES:
            raise ValueError(f"scaling must be one of {SCALING_MODES}, got {self.scaling!r}")
        if self.noise_amplitude < 0:
            raise ValueError("noise amplitude must be nonnegative")
        if self.master_seed < 0:
            raise ValueError("master seed must be nonnegative")
        if not self.k <= self.m <= self.n:
            warnings.warn(
                f"nonstandard ensemble shape k={self.k}, m={self.m}, n={self.n} "
                "(expected k <= m <= n)",
                RuntimeWarning,
                stacklevel=3,
            )


def generate_problem(spec, trial_index):
    """Deterministic (A, x, y) for one trial of the ensemble.

    The RNG stream is keyed on (master seed, m, n, k, trial index), so a
    given trial is bitwise reproducible, independent of every other
    trial, and shared between the noiseless and noisy variants of the
    same ensemble (the noise draw happens last and is only scaled by the
    amplitude).
    """
    if trial_index < 0:
        raise ValueError("trial index must be nonnegative")
    seq = np.random.SeedSequence(
        [int(spec.master_seed), int(spec.m), int(spec.n), int(spec.k), int(trial_index)]
    )
    rng = np.random.default_rng(seq)
    A = rng.standard_normal((spec.m, spec.n))
    if spec.scaling == "one-over-sqrt-m":
        A /= np.sqrt(spec.m)
    support = rng.choice(spec.n, size=spec.k, replace=False)
    x = np.zeros(spec.n)
    x[support] = rng.standard_normal(spec.k)
    noise = rng.standard_normal(spec.m)
    y = A @ x + spec.noise_amplitude * noise
    return A, x, y


def crc_threshold(noise_amplitude):
    """Relative-error success threshold: 1e-5 exact, 1e-3 under noise."""
    return 1e-3 if noise_amplitude > 0 else 1e-5


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one recovery attempt against a known target."""

    success: bool
    relative_error: float
    support_match: bool
    iterations: int
    wall_time: float


def _algorithm_config(algorithm, k, gamma, budget, truth, threshold):
    kwargs = {}
    if algorithm == "gomp":
        if k < 2:
            raise ValueError("gOMP needs k >= 2 to choose 1 <= N < k")
        kwargs["n_select"] = min(2, k - 1)
    return AlgorithmConfig(
        algorithm,
        k=k,
        gamma=gamma,
        stopping=StoppingRule.relative_error(threshold, truth),
        max_iterations=budget,
        **kwargs,
    )


def run_trial(A, y, truth, algorithm, k, gamma, budget, threshold):
    """Run one recovery and score it against the target."""
    config = _algorithm_config(algorithm, k, gamma, budget, truth, threshold)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run(A, y, config, success_threshold=threshold)
    support_match = bool(
        np.array_equal(top_q_indices(report.x, k), top_q_indices(truth, k))
    )
    return TrialOutcome(
        success=bool(report.success),
        relative_error=float(report.relative_error),
        support_match=support_match,
        iterations=report.iterations,
        wall_time=report.wall_time,
    )


@dataclass(frozen=True)
class SweepCell:
    coords: dict
    stats: dict


@dataclass
class SweepResult:
    """Grid of per-cell statistics with CSV and provenance serialization."""

    name: str
    axes: list
    stat_columns: list
    cells: list
    provenance: dict = field(default_factory=dict)

    def to_csv(self):
        lines = [",".join(self.axes + self.stat_columns)]
        for cell in self.cells:
            row = [_format_value(cell.coords[a]) for a in self.axes]
            row += [_format_value(cell.stats[s]) for s in self.stat_columns]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def provenance_json(self):
        return json.dumps(self.provenance, indent=2, sort_keys=True) + "\n"

    def write(self, csv_path, sidecar_path=None):
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        if sidecar_path is not None:
            with open(sidecar_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.provenance_json())

    def cell(self, **coords):
        for c in self.cells:
            if all(c.coords.get(k) == v for k, v in coords.items()):
                return c
        raise KeyError(f"no cell with coordinates {coords}")


def _format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    return str(value)


def _parallel_map(fn, items, threads):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _provenance(name, spec_fields, **extra):
    payload = {
        "command": name,
        "spec": spec_fields,
        "version": __version__,
        **extra,
    }
    digest = hashlib.sha1(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]
    payload["build_id"] = digest
    return payload


def _success_stats(outcomes):
    trials = len(outcomes)
    successes = sum(o.success for o in outcomes)
    return {
        "trials": trials,
        "successes": successes,
        "success_rate": successes / trials if trials else float("nan"),
        "mean_iterations": (
            sum(o.iterations for o in outcomes) / trials if trials else float("nan")
        ),
    }


def gamma_sweep(spec, gammas, ks, algorithms, trials, threads=1):
    """Success rate per (algorithm, selection threshold, sparsity) cell.

    Every solver runs for at most k iterations, stopping early once the
    recovery criterion is met.
    """
    gammas = [float(g) for g in gammas]
    ks = [int(k) for k in ks]
    algorithms = list(algorithms)
    items = [(k, t) for k in ks for t in range(trials)]

    def task(item):
        k, t = item
        local = replace(spec, k=k)
        A, x, y = generate_problem(local, t)
        threshold = crc_threshold(spec.noise_amplitude)
        return {
            (alg, g): run_trial(A, y, x, alg, k, g, budget=k, threshold=threshold)
            for alg in algorithms
            for g in gammas
        }

    results = _parallel_map(task, items, threads)
    per_k = {k: [r for (kk, _), r in zip(items, results) if kk == k] for k in ks}
    cells = []
    for alg in algorithms:
        for g in gammas:
            for k in ks:
                outcomes = [r[(alg, g)] for r in per_k[k]]
                cells.append(
                    SweepCell(
                        coords={"algorithm": alg, "gamma": g, "k": k},
                        stats=_success_stats(outcomes),
                    )
                )
    return SweepResult(
        name="phase-gamma",
        axes=["algorithm", "gamma", "k"],
        stat_columns=["trials", "successes", "success_rate", "mean_iterations"],
        cells=cells,
        provenance=_provenance(
            "phase-gamma",
            {"m": spec.m, "n": spec.n, "scaling": spec.scaling, "noise": spec.noise_amplitude},
            seed=spec.master_seed,
            gammas=gammas,
            ks=ks,
            algorithms=algorithms,
            trials=trials,
        ),
    )


def iteration_sweep(spec, budgets, ks, algorithms, trials, gamma=0.9, threads=1):
    """Success rate as a function of the iteration budget."""
    budgets = [int(b) for b in budgets]
    ks = [int(k) for k in ks]
    algorithms = list(algorithms)
    items = [(k, t) for k in ks for t in range(trials)]

    def task(item):
        k, t = item
        local = replace(spec, k=k)
        A, x, y = generate_problem(local, t)
        threshold = crc_threshold(spec.noise_amplitude)
        return {
            (alg, b): run_trial(A, y, x, alg, k, gamma, budget=b, threshold=threshold)
            for alg in algorithms
            for b in budgets
        }

    results = _parallel_map(task, items, threads)
    per_k = {k: [r for (kk, _), r in zip(items, results) if kk == k] for k in ks}
    cells = []
    for alg in algorithms:
        for b in budgets:
            for k in ks:
                outcomes = [r[(alg, b)] for r in per_k[k]]
                cells.append(
                    SweepCell(
                        coords={"algorithm": alg, "budget": b, "k": k},
                        stats=_success_stats(outcomes),
                    )
                )
    return SweepResult(
        name="phase-iters",
        axes=["algorithm", "budget", "k"],
        stat_columns=["trials", "successes", "success_rate", "mean_iterations"],
        cells=cells,
        provenance=_provenance(
            "phase-iters",
            {"m": spec.m, "n": spec.n, "scaling": spec.scaling, "noise": spec.noise_amplitude},
            seed=spec.master_seed,
            budgets=budgets,
            ks=ks,
            algorithms=algorithms,
            trials=trials,
            gamma=gamma,
        ),
    )


def success_curves(spec, ks, algorithms, trials, gamma=0.9, threads=1):
    """Success rate versus sparsity level, noiseless or noisy per the spec's
    noise amplitude; the noisy criterion is applied automatically."""
    ks = [int(k) for k in ks]
    algorithms = list(algorithms)
    items = [(k, t) for k in ks for t in range(trials)]

    def task(item):
        k, t = item
        local = replace(spec, k=k)
        A, x, y = generate_problem(local, t)
        threshold = crc_threshold(spec.noise_amplitude)
        out = {}
        for alg in algorithms:
            budget = 500 if alg in ("cosamp", "sp") else k
            out[alg] = run_trial(A, y, x, alg, k, gamma, budget=budget, threshold=threshold)
        return out

    results = _parallel_map(task, items, threads)
    per_k = {k: [r for (kk, _), r in zip(items, results) if kk == k] for k in ks}
    cells = []
    for alg in algorithms:
        for k in ks:
            outcomes = [r[alg] for r in per_k[k]]
            stats = _success_stats(outcomes)
            stats["support_match_rate"] = sum(o.support_match for o in outcomes) / len(outcomes)
            cells.append(SweepCell(coords={"algorithm": alg, "k": k}, stats=stats))
    return SweepResult(
        name="phase-k",
        axes=["algorithm", "k"],
        stat_columns=[
            "trials",
            "successes",
            "success_rate",
            "mean_iterations",
            "support_match_rate",
        ],
        cells=cells,
        provenance=_provenance(
            "phase-k",
            {"m": spec.m, "n": spec.n, "scaling": spec.scaling, "noise": spec.noise_amplitude},
            seed=spec.master_seed,
            ks=ks,
            algorithms=algorithms,
            trials=trials,
            gamma=gamma,
        ),
    )


def scaling_benchmark(
    ms,
    algorithms,
    trials,
    master_seed,
    gamma=0.9,
    n_factor=5,
    k_ratio=0.3,
    scaling="raw",
    timed=True,
    threads=1,
):
    """Iterations-to-recovery and runtime across problem sizes.

    n = n_factor * m and k = round(k_ratio * m) per size.  Trials that
    never meet the recovery criterion are counted separately and excluded
    from the mean-iterations statistic.  When timing is enabled each trial
    performs one warm-up run and three timed runs (mean and median-of-3
    reported); disabling it zeroes the runtime columns so the CSV is
    byte-reproducible.
    """
    ms = [int(m) for m in ms]
    algorithms = list(algorithms)
    sizes = {m: (n_factor * m, max(1, round(k_ratio * m))) for m in ms}
    items = [(m, t) for m in ms for t in range(trials)]

    def task(item):
        m, t = item
        n, k = sizes[m]
        local = EnsembleSpec(m=m, n=n, k=k, master_seed=master_seed, scaling=scaling)
        A, x, y = generate_problem(local, t)
        out = {}
        for alg in algorithms:
            budget = 500 if alg in ("cosamp", "sp") else k
            outcome = run_trial(A, y, x, alg, k, gamma, budget=budget, threshold=1e-5)
            if timed:
                times = []
                run_trial(A, y, x, alg, k, gamma, budget=budget, threshold=1e-5)
                for _ in range(3):
                    t0 = time.perf_counter()
                    run_trial(A, y, x, alg, k, gamma, budget=budget, threshold=1e-5)
                    times.append(time.perf_counter() - t0)
                out[alg] = (outcome, sum(times) / 3.0, median(times))
            else:
                out[alg] = (outcome, 0.0, 0.0)
        return out

    results = _parallel_map(task, items, threads)
    per_m = {m: [r for (mm, _), r in zip(items, results) if mm == m] for m in ms}
    cells = []
    for alg in algorithms:
        for m in ms:
            n, k = sizes[m]
            entries = [r[alg] for r in per_m[m]]
            outcomes = [e[0] for e in entries]
            recovered = [o for o in outcomes if o.success]
            stats = {
                "trials": len(outcomes),
                "recovered": len(recovered),
                "unrecovered": len(outcomes) - len(recovered),
                "success_rate": len(recovered) / len(outcomes) if outcomes else float("nan"),
                "mean_iterations": (
                    sum(o.iterations for o in recovered) / len(recovered)
                    if recovered
                    else float("nan")
                ),
                "mean_runtime": sum(e[1] for e in entries) / len(entries),
                "median3_runtime": sum(e[2] for e in entries) / len(entries),
            }
            cells.append(SweepCell(coords={"algorithm": alg, "m": m, "n": n, "k": k}, stats=stats))
    return SweepResult(
        name="scaling",
        axes=["algorithm", "m", "n", "k"],
        stat_columns=[
            "trials",
            "recovered",
            "unrecovered",
            "success_rate",
            "mean_iterations",
            "mean_runtime",
            "median3_runtime",
        ],
        cells=cells,
        provenance=_provenance(
            "scaling",
            {"n_factor": n_factor, "k_ratio": k_ratio, "scaling": scaling},
            seed=master_seed,
            ms=ms,
            algorithms=algorithms,
            trials=trials,
            gamma=gamma,
            timed=timed,
        ),
    )
