"""Adaptive generalized LARS: weights, rescaling, and the breakpoint path.

Workflow::

    std = standardize(X, y)
    path = run_path(std, EstimatorSpec(EstimatorKind.RD, d=0.7), alpha=0.9)
    beta = path.coefficients_at(t)          # standardized, adaptive scale
    coef, intercept = path.final_beta_original

The loop itself lives in :func:`adpglars._kernels.glars_path_kernel`;
:func:`compute_direction` and :func:`step_length` expose single steps for
inspection and testing.
"""
from dataclasses import dataclass, field
import enum
from functools import cached_property
from typing import NamedTuple, Optional
import warnings

import numpy as np

from . import _kernels
from .estimators import EstimatorSpec, fit_biased, restricted_transform, selector
from .errors import (
    ConstantColumn,
    DimensionMismatch,
    NonConvergenceWarning,
    OutOfRange,
    SingularGram,
    TooFewRows,
    ZeroDirection,
)

CLAMP_FLOOR = 1e-8
CONSTANT_SD = 1e-12


@dataclass(frozen=True)
class StandardizedDataset:
    """Centered/scaled design and response plus what is needed to undo it.

    Standard deviations use divisor n, so every column of ``X_std`` has
    squared norm exactly n.
    """

    X_std: np.ndarray
    y_centered: np.ndarray
    col_means: np.ndarray
    col_sds: np.ndarray
    y_mean: float

    @property
    def n(self):
        return self.X_std.shape[0]

    @property
    def p(self):
        return self.X_std.shape[1]

    def transform(self, X_raw):
        X_raw = np.asarray(X_raw, dtype=float)
        if X_raw.ndim != 2 or X_raw.shape[1] != self.p:
            raise DimensionMismatch(f"expected {self.p} columns, got shape {X_raw.shape}")
        return (X_raw - self.col_means) / self.col_sds

    def to_original(self, beta_std):
        """Map standardized-scale coefficients to (raw coefficients, intercept)."""
        beta_std = np.asarray(beta_std, dtype=float)
        coef = beta_std / self.col_sds
        intercept = self.y_mean - coef @ self.col_means
        return coef, float(intercept)


def standardize(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise TooFewRows(f"need at least 2 rows, got {X.shape[0]}")
    means = X.mean(axis=0)
    Xc = X - means
    sds = np.sqrt((Xc**2).mean(axis=0))
    bad = np.flatnonzero(sds <= CONSTANT_SD)
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    y_mean = float(y.mean())
    return StandardizedDataset(
        X_std=Xc / sds,
        y_centered=y - y_mean,
        col_means=means,
        col_sds=sds,
        y_mean=y_mean,
    )


@dataclass(frozen=True)
class AdaptiveWeights:
    """Per-variable penalty weights ``max(|beta_G|, floor) ** -alpha``."""

    w: np.ndarray
    alpha: float
    clamp_floor: float = CLAMP_FLOOR
    source_spec: Optional[EstimatorSpec] = None
    source_beta: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_coefficients(cls, beta, alpha, clamp_floor=CLAMP_FLOOR, source_spec=None):
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        beta = np.asarray(beta, dtype=float)
        w = np.maximum(np.abs(beta), clamp_floor) ** (-float(alpha))
        return cls(w=w, alpha=float(alpha), clamp_floor=clamp_floor, source_spec=source_spec, source_beta=beta)


def compute_weights(std, spec, alpha, clamp_floor=CLAMP_FLOOR):
    beta_g = fit_biased(std.X_std, std.y_centered, spec)
    return AdaptiveWeights.from_coefficients(beta_g, alpha, clamp_floor, source_spec=spec)


def scale_columns(X, weights):
    """Column j divided by ``w_j``."""
    w = weights.w if isinstance(weights, AdaptiveWeights) else np.asarray(weights, dtype=float)
    return np.asarray(X, dtype=float) / w


def unscale_columns(X_scaled, weights):
    w = weights.w if isinstance(weights, AdaptiveWeights) else np.asarray(weights, dtype=float)
    return np.asarray(X_scaled, dtype=float) * w


class EventKind(str, enum.Enum):
    ENTER = "Enter"
    DROP = "Drop"
    TERMINAL = "Terminal"


_EVENT_CODES = {
    _kernels.EV_ENTER: EventKind.ENTER,
    _kernels.EV_DROP: EventKind.DROP,
    _kernels.EV_TERMINAL: EventKind.TERMINAL,
}


class Event(NamedTuple):
    kind: EventKind
    variable: Optional[int] = None

    def __str__(self):
        if self.kind is EventKind.TERMINAL:
            return "Terminal"
        return f"{self.kind.value}({self.variable})"


@dataclass(frozen=True)
class ActiveSet:
    """Active variable indices in the order they entered."""

    indices: tuple

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("active indices must be distinct")

    def __len__(self):
        return len(self.indices)

    def embedding(self, p):
        return selector(self.indices, p)


@dataclass(frozen=True)
class PathStep:
    step_index: int
    active: ActiveSet
    beta_scaled: np.ndarray
    rho: float
    direction: np.ndarray
    event: Event
    t_weighted: float
    n_components: int = 0


class CoefficientPath:
    """Breakpoints of a piecewise-linear solution path.

    Row ``i`` of :attr:`beta_scaled` is the coefficient vector (weighted,
    standardized problem) at breakpoint ``i``; row 0 is the origin where the
    first variable enters. ``rhos[i]`` and ``directions[i]`` belong to the
    segment that ends at breakpoint ``i`` (row 0 carries ``rho = 1`` and a
    zero direction by convention).
    """

    def __init__(self, beta_scaled, directions, rhos, events, orders, n_components,
                 residual_norms, weights, standardization, spec, status):
        self.beta_scaled = beta_scaled
        self.directions = directions
        self.rhos = rhos
        self.event_codes = events[0]
        self.event_vars = events[1]
        self.orders = orders
        self.n_components = n_components
        self.residual_norms = residual_norms
        self.weights = weights
        self.standardization = standardization
        self.spec = spec
        self.status = status

    @property
    def converged(self):
        return self.status == _kernels.ST_OK

    def __len__(self):
        return self.beta_scaled.shape[0]

    @cached_property
    def t_values(self):
        return np.abs(self.beta_scaled).sum(axis=1)

    def event(self, i):
        return Event(_EVENT_CODES[int(self.event_codes[i])], None if self.event_vars[i] < 0 else int(self.event_vars[i]))

    def active_set(self, i):
        row = self.orders[i]
        return ActiveSet(tuple(int(j) for j in row[row >= 0]))

    @cached_property
    def steps(self):
        return [
            PathStep(
                step_index=i,
                active=self.active_set(i),
                beta_scaled=self.beta_scaled[i],
                rho=float(self.rhos[i]),
                direction=self.directions[i],
                event=self.event(i),
                t_weighted=float(self.t_values[i]),
                n_components=int(self.n_components[i]),
            )
            for i in range(len(self))
        ]

    @property
    def terminal_t(self):
        return float(self.t_values[-1])

    @property
    def final_beta_scaled(self):
        return self.beta_scaled[-1]

    @property
    def final_beta_adaptive(self):
        return self.beta_scaled[-1] / self.weights.w

    @property
    def final_beta_original(self):
        """(raw-scale coefficients, intercept) at the end of the path."""
        return self.standardization.to_original(self.final_beta_adaptive)

    def coefficients_at(self, t_target):
        return coefficients_at(self, t_target)

    def candidate_points(self, midpoints=True):
        """Breakpoints and (optionally) segment midpoints, in path order.

        Returns ``(beta_scaled rows, t values)``.
        """
        B = self.beta_scaled
        if midpoints and len(B) > 1:
            mids = 0.5 * (B[:-1] + B[1:])
            out = np.empty((2 * len(B) - 1, B.shape[1]))
            out[0::2] = B
            out[1::2] = mids
            B = out
        return B, np.abs(B).sum(axis=1)


def compute_direction(X_scaled, r, active, spec):
    """Direction ``G_E (E'X'XE)^{-1} E'X'r`` from the matrix formulas.

    ``active`` is an :class:`ActiveSet` or a sequence of indices.
    """
    X_scaled = np.asarray(X_scaled, dtype=float)
    idx = active.indices if isinstance(active, ActiveSet) else tuple(active)
    if not idx:
        raise ValueError("active set must be non-empty")
    p = X_scaled.shape[1]
    E = selector(idx, p)
    gram = X_scaled.T @ X_scaled
    sub = E.T @ gram @ E
    if _kernels.is_collinear(sub):
        raise SingularGram(f"active columns {list(idx)} are collinear")
    G_E = restricted_transform(spec, E, gram, clamp_h=True)
    return G_E @ np.linalg.solve(sub, E.T @ (X_scaled.T @ np.asarray(r, dtype=float)))


def step_length(X_scaled, r, active, u, beta_current, banned=-1, allow_entry=True):
    """Fraction of the direction to travel before the active set changes.

    Returns ``(rho, Event)``.
    """
    X_scaled = np.asarray(X_scaled, dtype=float)
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise ZeroDirection("direction is identically zero")
    idx = active.indices if isinstance(active, ActiveSet) else tuple(active)
    p = X_scaled.shape[1]
    mask = np.zeros(p, dtype=bool)
    mask[list(idx)] = True
    c = X_scaled.T @ np.asarray(r, dtype=float)
    a = X_scaled.T @ (X_scaled @ u)
    c_max = float(np.max(np.abs(c[mask])))
    rho, code, var = _kernels.next_event(
        c, a, c_max, np.asarray(beta_current, dtype=float), u, mask, int(banned), bool(allow_entry)
    )
    return float(rho), Event(_EVENT_CODES[int(code)], None if var < 0 else int(var))


def run_path(std, spec, alpha=1.0, weights=None, max_steps=None):
    """Adaptive GLARS path on standardized data.

    Parameters
    ----------
    std : StandardizedDataset
    spec : EstimatorSpec
        Transform used both for the initial weights and for the directions.
    alpha : float
        Exponent of the adaptive weights.
    weights : AdaptiveWeights, optional
        Use these instead of computing them from ``spec``.
    max_steps : int, optional
        Step cap; defaults to ``8 * p``.

    Returns
    -------
    CoefficientPath
        Hitting the step cap returns the partial path with a
        :class:`NonConvergenceWarning`.
    """
    if weights is None:
        weights = compute_weights(std, spec, alpha)
    elif not isinstance(weights, AdaptiveWeights):
        weights = AdaptiveWeights(w=np.asarray(weights, dtype=float), alpha=float(alpha))
    xs = scale_columns(std.X_std, weights)
    n, p = xs.shape
    max_active = min(n - 1, p)
    if max_steps is None:
        max_steps = 8 * p
    kind, k, d, h, thr = spec.kernel_args()
    betas, dirs, rhos, codes, vars_, orders, ncomp, rnorm, status = _kernels.glars_path_kernel(
        np.ascontiguousarray(xs), np.ascontiguousarray(std.y_centered), kind, k, d, h, thr, max_active, int(max_steps)
    )
    if status == _kernels.ST_SINGULAR:
        raise SingularGram(f"active-set Gram became singular after {len(rhos)} breakpoints")
    if status == _kernels.ST_ZERO:
        raise ZeroDirection("response is orthogonal to the active predictors")
    if status == _kernels.ST_MAX_STEPS:
        warnings.warn(f"path stopped at the {max_steps}-step cap before terminating", NonConvergenceWarning, stacklevel=2)
    return CoefficientPath(
        beta_scaled=betas,
        directions=dirs,
        rhos=rhos,
        events=(codes, vars_),
        orders=orders,
        n_components=ncomp,
        residual_norms=rnorm,
        weights=weights,
        standardization=std,
        spec=spec,
        status=status,
    )


def coefficients_at(path, t_target):
    """Adaptive-scale coefficients where the weighted L1 norm equals ``t_target``.

    Interpolates linearly inside the first segment whose end points bracket
    ``t_target``; at a breakpoint the breakpoint itself is returned.
    """
    t = path.t_values
    t_target = float(t_target)
    tol = 1e-12 * max(1.0, path.terminal_t)
    if t_target < -tol or t_target > path.terminal_t + tol:
        raise OutOfRange(f"t={t_target} outside [0, {path.terminal_t}]")
    B = path.beta_scaled
    for i in range(len(t)):
        if abs(t[i] - t_target) <= tol:
            return B[i] / path.weights.w
        if i + 1 < len(t):
            lo, hi = sorted((t[i], t[i + 1]))
            if lo <= t_target <= hi and hi > lo:
                frac = (t_target - t[i]) / (t[i + 1] - t[i])
                return (B[i] + frac * (B[i + 1] - B[i])) / path.weights.w
    return B[-1] / path.weights.w
