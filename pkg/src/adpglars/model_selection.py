"""Prediction error, hold-out evaluation and the (alpha, k/d, t) grid search."""
from dataclasses import dataclass, field
import logging
from typing import Optional
import warnings

import numpy as np

from .errors import DimensionMismatch, EmptyGrid, GlarsError, NonConvergenceWarning
from .estimators import EstimatorKind, EstimatorSpec
from .glars_path import AdaptiveWeights, compute_weights, run_path, standardize

log = logging.getLogger(__name__)

SELECTED_TOL = 1e-10

DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(1, 11))
DEFAULT_KS = tuple(round(0.1 * i, 1) for i in range(1, 11))
DEFAULT_DS = tuple(round(0.1 * i, 1) for i in range(1, 10)) + (0.99,)


@dataclass(frozen=True)
class Dataset:
    """Raw design matrix and response."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"X shape {X.shape} does not match y length {y.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass
class EvaluationResult:
    rmse: float
    chosen_alpha: float
    chosen_shrinkage: Optional[float]
    chosen_t: float
    n_selected: int
    estimator: EstimatorSpec
    coef: np.ndarray = field(default=None, repr=False)
    intercept: float = 0.0

    @property
    def algorithm(self):
        return self.estimator.name


@dataclass(frozen=True)
class SearchGrid:
    """Hyperparameter grid; t candidates are always every breakpoint and
    segment midpoint of each fitted path."""

    alphas: tuple
    shrinkages: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "shrinkages", tuple(float(s) for s in self.shrinkages))
        if not self.alphas:
            raise EmptyGrid("alpha grid is empty")
        if any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive")

    @classmethod
    def default(cls, kind, alphas=None, ks=None, ds=None):
        kind = EstimatorKind(kind)
        alphas = DEFAULT_ALPHAS if alphas is None else alphas
        if kind.uses_k:
            return cls(alphas, DEFAULT_KS if ks is None else ks)
        if kind.uses_d:
            return cls(alphas, DEFAULT_DS if ds is None else ds)
        return cls(alphas, ())

    def points(self, kind):
        """Sorted, de-duplicated (alpha, shrinkage) pairs for ``kind``."""
        kind = EstimatorKind(kind)
        takes = kind.uses_k or kind.uses_d
        if takes and not self.shrinkages:
            raise EmptyGrid(f"{kind.value} needs a non-empty k/d grid")
        shr = sorted(set(self.shrinkages)) if takes else [None]
        return [(a, s) for a in sorted(set(self.alphas)) for s in shr]


def rmse(beta, intercept, X_new, y_new):
    """Root mean squared prediction error on new data."""
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    y_new = np.asarray(y_new, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if X_new.shape[0] < 1 or X_new.shape[0] != y_new.shape[0] or X_new.shape[1] != beta.shape[0]:
        raise DimensionMismatch(f"X_new {X_new.shape}, y_new {y_new.shape}, beta {beta.shape}")
    resid = y_new - (X_new @ beta + intercept)
    return float(np.sqrt(np.mean(resid**2)))


def _path_scores(path, std, test):
    """rmse, t and raw coefficients at every candidate point of ``path``."""
    B, t = path.candidate_points()
    coefs = (B / path.weights.w) / std.col_sds
    intercepts = std.y_mean - coefs @ std.col_means
    pred = test.X @ coefs.T + intercepts
    err = np.sqrt(np.mean((test.y[:, None] - pred) ** 2, axis=0))
    return err, t, coefs, intercepts


def _result(spec, alpha, err, t, coefs, intercepts, i):
    coef = coefs[i]
    return EvaluationResult(
        rmse=float(err[i]),
        chosen_alpha=float(alpha),
        chosen_shrinkage=spec.shrinkage,
        chosen_t=float(t[i]),
        n_selected=int(np.count_nonzero(np.abs(coef) > SELECTED_TOL)),
        estimator=spec,
        coef=coef.copy(),
        intercept=float(intercepts[i]),
    )


def _best_index(err, t):
    # lexicographic (rmse, t)
    return int(np.lexsort((t, err))[0])


def holdout_evaluate(train, test, spec, alpha, t_rule="best"):
    """Fit on ``train``, score on ``test``.

    ``t_rule`` is ``"best"`` (candidate point with the lowest test rmse),
    ``"terminal"``, or a number (the weighted L1 norm to interpolate at).
    """
    std = standardize(train.X, train.y)
    path = run_path(std, spec, alpha)
    if t_rule == "best":
        err, t, coefs, icpt = _path_scores(path, std, test)
        return _result(spec, alpha, err, t, coefs, icpt, _best_index(err, t))
    if t_rule == "terminal":
        t_target = path.terminal_t
    else:
        t_target = float(t_rule)
    beta_adp = path.coefficients_at(t_target)
    coef, icpt = std.to_original(beta_adp)
    return EvaluationResult(
        rmse=rmse(coef, icpt, test.X, test.y),
        chosen_alpha=float(alpha),
        chosen_shrinkage=spec.shrinkage,
        chosen_t=float(np.abs(beta_adp * path.weights.w).sum()),
        n_selected=int(np.count_nonzero(np.abs(coef) > SELECTED_TOL)),
        estimator=spec,
        coef=coef,
        intercept=icpt,
    )


def _kfold_indices(n, folds, seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return np.array_split(perm, folds)


def grid_search_cv(train, test_or_folds, spec, grid, seed=0):
    """Exhaustive search over alpha x shrinkage x path point.

    ``test_or_folds`` is a hold-out :class:`Dataset` (the protocol used for
    the reported experiments) or an integer number of folds. Ties go to the
    smaller alpha, then smaller shrinkage, then smaller t.
    """
    points = grid.points(spec.kind)
    if isinstance(test_or_folds, Dataset):
        return _holdout_search(train, test_or_folds, spec, points)
    return _kfold_search(train, int(test_or_folds), spec, points, seed)


def _holdout_search(train, test, spec, points):
    std = standardize(train.X, train.y)
    best = None
    best_key = None
    failures = 0
    capped = 0
    weight_src = {}
    for alpha, shrink in points:
        s = spec if shrink is None else spec.with_shrinkage(shrink)
        try:
            if shrink not in weight_src:
                weight_src[shrink] = compute_weights(std, s, 1.0).source_beta
            w = AdaptiveWeights.from_coefficients(weight_src[shrink], alpha, source_spec=s)
            # truncated-component paths can cycle; the capped path is still scored
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NonConvergenceWarning)
                path = run_path(std, s, alpha, weights=w)
        except GlarsError:
            failures += 1
            continue
        capped += not path.converged
        err, t, coefs, icpt = _path_scores(path, std, test)
        i = _best_index(err, t)
        key = (err[i], alpha, -np.inf if shrink is None else shrink, t[i])
        if best_key is None or key < best_key:
            best_key = key
            best = _result(s, alpha, err, t, coefs, icpt, i)
    if capped:
        log.debug("%s: %d grid paths hit the step cap", spec.name, capped)
    if best is None:
        raise GlarsError(f"every grid point failed for {spec.name} ({failures} failures)")
    return best


def _kfold_search(train, folds, spec, points, seed, n_fracs=51):
    if folds < 2 or folds > train.n:
        raise ValueError(f"need 2 <= folds <= n, got {folds}")
    fracs = np.linspace(0.0, 1.0, n_fracs)
    parts = _kfold_indices(train.n, folds, seed)
    best_key = None
    best_point = None
    for alpha, shrink in points:
        s = spec if shrink is None else spec.with_shrinkage(shrink)
        sse = np.zeros(n_fracs)
        try:
            for hold in parts:
                keep = np.setdiff1d(np.arange(train.n), hold)
                std = standardize(train.X[keep], train.y[keep])
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", NonConvergenceWarning)
                    path = run_path(std, s, alpha)
                for m, f in enumerate(fracs):
                    coef, icpt = std.to_original(path.coefficients_at(f * path.terminal_t))
                    sse[m] += np.sum((train.y[hold] - train.X[hold] @ coef - icpt) ** 2)
        except GlarsError:
            continue
        cv = np.sqrt(sse / train.n)
        m = int(np.argmin(cv))
        key = (cv[m], alpha, -np.inf if shrink is None else shrink, fracs[m])
        if best_key is None or key < best_key:
            best_key = key
            best_point = (s, alpha, fracs[m], cv[m])
    if best_point is None:
        raise GlarsError(f"every grid point failed for {spec.name}")
    s, alpha, frac, cv = best_point
    std = standardize(train.X, train.y)
    path = run_path(std, s, alpha)
    beta_adp = path.coefficients_at(frac * path.terminal_t)
    coef, icpt = std.to_original(beta_adp)
    return EvaluationResult(
        rmse=float(cv),
        chosen_alpha=float(alpha),
        chosen_shrinkage=s.shrinkage,
        chosen_t=float(np.abs(beta_adp * path.weights.w).sum()),
        n_selected=int(np.count_nonzero(np.abs(coef) > SELECTED_TOL)),
        estimator=s,
        coef=coef,
        intercept=icpt,
    )
