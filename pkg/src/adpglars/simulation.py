"""McDonald-Galarneau simulation study.

Predictors are ``sqrt(1 - rho^2) z_ij + rho z_{i,m+1}`` with iid standard
normal ``z``; note the implied pairwise correlation is ``rho**2``. The true
coefficients are the unit leading eigenvector of ``X'X`` and the response is
``X beta + N(0, sigma^2)``.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``; replicate
``r`` always uses spawn key ``(r,)`` of the master seed, so its data do not
depend on which estimators run or how replicates are scheduled.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import os
from typing import Dict, List, Optional
import warnings

import numpy as np

from .errors import DegenerateSpectrumWarning, GlarsError
from . import _kernels
from .estimators import ALGORITHM_NAMES, EstimatorSpec
from .model_selection import Dataset, EvaluationResult, SearchGrid, grid_search_cv

log = logging.getLogger(__name__)

SPECTRAL_GAP = 1e-12


@dataclass(frozen=True)
class SimulationConfig:
    n_total: int = 100
    n_train: int = 50
    m: int = 20
    rho_collinearity: float = 0.5
    sigma: float = 1.0
    n_replicates: int = 50
    seed: int = 20240101

    def __post_init__(self):
        if not 0 < self.n_train < self.n_total:
            raise ValueError(f"need 0 < n_train < n_total, got {self.n_train}, {self.n_total}")
        if self.m < 2:
            raise ValueError("need at least 2 predictors")
        if not 0.0 <= self.rho_collinearity < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho_collinearity}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.n_replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def replicate_streams(seed, replicate):
    """Independent (predictor, noise) generators for one replicate."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))
    pred, noise = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(pred)), np.random.Generator(np.random.PCG64(noise))


def generate_predictors(config, replicate=0, rng=None):
    if rng is None:
        rng, _ = replicate_streams(config.seed, replicate)
    rho = config.rho_collinearity
    z = rng.standard_normal((config.n_total, config.m + 1))
    return np.sqrt(1.0 - rho**2) * z[:, : config.m] + rho * z[:, [config.m]]


def beta_from_largest_eigenvector(X):
    """Unit-norm leading eigenvector of ``X'X``, largest |entry| positive."""
    X = np.asarray(X, dtype=float)
    vals, vecs = _kernels.sorted_eigh(X.T @ X)
    if vals.shape[0] > 1 and vals[0] - vals[1] <= SPECTRAL_GAP * max(abs(vals[0]), 1.0):
        warnings.warn(
            "leading eigenvalue of X'X is not separated; using the first vector in sorted order",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    beta = vecs[:, 0]
    return beta / np.linalg.norm(beta)


def generate_response(X, beta, sigma, seed=None, rng=None):
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X.shape[1] != beta.shape[0]:
        raise ValueError(f"X has {X.shape[1]} columns but beta has {beta.shape[0]} entries")
    if rng is None:
        rng = np.random.default_rng(seed)
    eps = rng.standard_normal(X.shape[0])
    return X @ beta + sigma * eps


def make_replicate(config, replicate):
    """(train, test) datasets for replicate ``replicate``."""
    pred_rng, noise_rng = replicate_streams(config.seed, replicate)
    X = generate_predictors(config, rng=pred_rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSpectrumWarning)
        beta = beta_from_largest_eigenvector(X)
    y = generate_response(X, beta, config.sigma, rng=noise_rng)
    k = config.n_train
    return Dataset(X[:k], y[:k]), Dataset(X[k:], y[k:])


@dataclass
class MedianRow:
    algorithm: str
    rmse: float
    shrinkage: Optional[float]
    alpha: float
    t: float
    selected: int
    replicate: int


@dataclass
class SimulationReport:
    """Per-algorithm, per-replicate results plus the median summary."""

    algorithms: List[str]
    results: Dict[str, List[Optional[EvaluationResult]]]
    meta: dict = field(default_factory=dict)

    @property
    def n_replicates(self):
        return max((len(v) for v in self.results.values()), default=0)

    @property
    def failures(self):
        return sum(r is None for v in self.results.values() for r in v)

    def figure_data(self):
        """Algorithm -> array of per-replicate rmse (failed replicates omitted)."""
        return {a: np.array([r.rmse for r in self.results[a] if r is not None]) for a in self.algorithms}

    def medians(self):
        """Median rmse per algorithm with the hyperparameters of the replicate
        whose rmse is closest to that median (lowest replicate index on ties)."""
        rows = []
        for a in self.algorithms:
            reps = [(i, r) for i, r in enumerate(self.results[a]) if r is not None]
            if not reps:
                continue
            vals = np.array([r.rmse for _, r in reps])
            med = float(np.median(vals))
            j = int(np.argmin(np.abs(vals - med)))
            i, r = reps[j]
            rows.append(MedianRow(a, med, r.chosen_shrinkage, r.chosen_alpha, r.chosen_t, r.n_selected, i))
        return rows


def _evaluate_replicate(args):
    config, replicate, specs, grids = args
    train, test = make_replicate(config, replicate)
    out = {}
    for name, spec in specs.items():
        try:
            out[name] = grid_search_cv(train, test, spec, grids[name])
        except GlarsError as exc:
            log.warning("replicate %d, %s failed: %s", replicate, name, exc)
            out[name] = None
    return replicate, out


def thread_cap():
    env = os.environ.get("GLARS_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cpus))
        except ValueError:
            log.warning("ignoring non-integer GLARS_THREADS=%r", env)
    return cpus


def default_specs(names=None, h_threshold=None, h=None):
    names = list(ALGORITHM_NAMES) if names is None else list(names)
    extra = {}
    if h_threshold is not None:
        extra["h_threshold"] = h_threshold
    if h is not None:
        extra["h"] = h
    specs = {}
    for n in names:
        kind = ALGORITHM_NAMES[n]
        specs[n] = EstimatorSpec(kind, **(extra if kind.uses_components else {}))
    return specs


def run_replications(config, specs=None, grids=None, workers=None):
    """Run every estimator on every replicate.

    Parameters
    ----------
    config : SimulationConfig
    specs : dict, optional
        Algorithm name -> EstimatorSpec (shrinkage values are taken from the
        grid). Defaults to all eight algorithms.
    grids : dict, optional
        Algorithm name -> SearchGrid. Defaults per kind.
    workers : int, optional
        Process count; defaults to ``GLARS_THREADS`` capped at the CPU count.
    """
    specs = default_specs() if specs is None else dict(specs)
    grids = {} if grids is None else dict(grids)
    for name, spec in specs.items():
        grids.setdefault(name, SearchGrid.default(spec.kind))
    workers = thread_cap() if workers is None else max(1, int(workers))
    jobs = [(config, r, specs, grids) for r in range(config.n_replicates)]
    collected = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, out in pool.map(_evaluate_replicate, jobs):
                collected[r] = out
    else:
        for job in jobs:
            r, out = _evaluate_replicate(job)
            collected[r] = out
    results = {name: [collected[r][name] for r in range(config.n_replicates)] for name in specs}
    meta = {
        "kind": "simulation",
        "rho": config.rho_collinearity,
        "n_total": config.n_total,
        "n_train": config.n_train,
        "m": config.m,
        "sigma": config.sigma,
        "n_replicates": config.n_replicates,
        "seed": int(config.seed),
    }
    report = SimulationReport(algorithms=list(specs), results=results, meta=meta)
    if report.failures:
        log.warning("%d replicate evaluations failed and were excluded", report.failures)
    return report


def evaluate_split(train, test, specs=None, grids=None, meta=None, folds=None):
    """One-replicate report for a fixed train/test split (or k-fold on train)."""
    specs = default_specs() if specs is None else dict(specs)
    grids = {} if grids is None else dict(grids)
    results = {}
    for name, spec in specs.items():
        grid = grids.get(name) or SearchGrid.default(spec.kind)
        target = test if folds is None else int(folds)
        try:
            results[name] = [grid_search_cv(train, target, spec, grid)]
        except GlarsError as exc:
            log.warning("%s failed: %s", name, exc)
            results[name] = [None]
    return SimulationReport(algorithms=list(specs), results=results, meta=dict(meta or {}))
