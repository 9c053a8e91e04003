"""OLS and the biased shrinkage estimators, in full and active-set form.

Each biased estimator is ``G @ beta_ols`` for a transform ``G`` built from the
Gram matrix. The matrices here are assembled literally (solves and products),
which keeps them an independent check on the spectral filters the path
kernel uses.
"""
from dataclasses import dataclass
import enum
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InvalidComponentCount, InvalidSpec, SingularGram

EIGEN_FLOOR = 1e-10
PSD_TOL = 1e-10
SYMMETRY_TOL = 1e-12
DEFAULT_H_THRESHOLD = 0.995


class EstimatorKind(str, enum.Enum):
    OLSE = "OLSE"
    RE = "RE"
    AURE = "AURE"
    LE = "LE"
    AULE = "AULE"
    PCRE = "PCRE"
    RK = "RK"
    RD = "RD"

    @property
    def code(self):
        return _KIND_CODES[self]

    @property
    def uses_k(self):
        return self in (EstimatorKind.RE, EstimatorKind.AURE, EstimatorKind.RK)

    @property
    def uses_d(self):
        return self in (EstimatorKind.LE, EstimatorKind.AULE, EstimatorKind.RD)

    @property
    def uses_components(self):
        return self in (EstimatorKind.PCRE, EstimatorKind.RK, EstimatorKind.RD)


_KIND_CODES = {
    EstimatorKind.OLSE: _kernels.OLSE,
    EstimatorKind.RE: _kernels.RE,
    EstimatorKind.AURE: _kernels.AURE,
    EstimatorKind.LE: _kernels.LE,
    EstimatorKind.AULE: _kernels.AULE,
    EstimatorKind.PCRE: _kernels.PCRE,
    EstimatorKind.RK: _kernels.RK,
    EstimatorKind.RD: _kernels.RD,
}

# report names, in table order
ALGORITHM_NAMES = {
    "adpLARS-LASSO": EstimatorKind.OLSE,
    "adpLARS-EN": EstimatorKind.RE,
    "adpLARS-AURE": EstimatorKind.AURE,
    "adpLARS-LE": EstimatorKind.LE,
    "adpLARS-AULE": EstimatorKind.AULE,
    "adpLARS-PCRE": EstimatorKind.PCRE,
    "adpLARS-rk": EstimatorKind.RK,
    "adpLARS-rd": EstimatorKind.RD,
}
KIND_TO_ALGORITHM = {kind: name for name, kind in ALGORITHM_NAMES.items()}


@dataclass(frozen=True)
class EstimatorSpec:
    """Which transform to use and its shrinkage parameters.

    ``k`` is read by RE/AURE/RK, ``d`` by LE/AULE/RD. For PCRE/RK/RD the
    component count is ``h`` when given, otherwise the smallest count whose
    cumulative eigenvalue share reaches ``h_threshold`` (1.0 keeps all).
    """

    kind: EstimatorKind = EstimatorKind.OLSE
    k: float = 0.0
    d: float = 1.0
    h: Optional[int] = None
    h_threshold: float = DEFAULT_H_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if not np.isfinite(self.k) or self.k < 0:
            raise InvalidSpec(f"ridge parameter k must be >= 0, got {self.k}")
        if not 0.0 <= self.d <= 1.0:
            raise InvalidSpec(f"Liu parameter d must lie in [0, 1], got {self.d}")
        if self.h is not None and int(self.h) < 1:
            raise InvalidComponentCount(f"component count must be >= 1, got {self.h}")
        if not 0.0 < self.h_threshold <= 1.0:
            raise InvalidSpec(f"h_threshold must lie in (0, 1], got {self.h_threshold}")

    @property
    def shrinkage(self):
        """The k or d value this kind actually uses, or None."""
        if self.kind.uses_k:
            return self.k
        if self.kind.uses_d:
            return self.d
        return None

    @property
    def name(self):
        return KIND_TO_ALGORITHM[self.kind]

    def with_shrinkage(self, value):
        if self.kind.uses_k:
            return EstimatorSpec(self.kind, k=value, d=self.d, h=self.h, h_threshold=self.h_threshold)
        if self.kind.uses_d:
            return EstimatorSpec(self.kind, k=self.k, d=value, h=self.h, h_threshold=self.h_threshold)
        return self

    def kernel_args(self):
        """(kind code, k, d, h or 0, threshold) for the path kernel."""
        return self.kind.code, float(self.k), float(self.d), int(self.h or 0), float(self.h_threshold)


@dataclass(frozen=True)
class EigenBasis:
    columns: np.ndarray
    eigenvalues: np.ndarray

    @property
    def h(self):
        return self.columns.shape[1]

    def projector(self):
        return self.columns @ self.columns.T


def check_gram(gram):
    """Validate a Gram matrix and clamp round-off negative eigenvalues.

    Returns the symmetrized matrix. Raises ``ValueError`` for asymmetric or
    clearly indefinite input.
    """
    gram = np.atleast_2d(np.asarray(gram, dtype=float))
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {gram.shape}")
    scale = max(np.abs(gram).max(), 1.0)
    if np.abs(gram - gram.T).max() > SYMMETRY_TOL * scale:
        raise ValueError("Gram matrix is not symmetric")
    gram = 0.5 * (gram + gram.T)
    vals = np.linalg.eigvalsh(gram)
    tr = max(np.trace(gram), 0.0)
    if vals[0] < -PSD_TOL * max(tr, 1.0):
        raise ValueError(f"Gram matrix is not positive semidefinite (min eigenvalue {vals[0]:.3g})")
    return gram


def _require_invertible(gram):
    vals = np.linalg.eigvalsh(gram)
    if vals[-1] <= 0 or vals[0] < EIGEN_FLOOR * vals[-1]:
        raise SingularGram(
            f"Gram matrix is singular: eigenvalue ratio {vals[0] / max(vals[-1], 1e-300):.3g} "
            f"below {EIGEN_FLOOR:g} (p > n or exact collinearity)"
        )


def fit_olse(X, y):
    """Least-squares coefficients ``(X'X)^{-1} X'y``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1 and np.ndim(y) == 1 and len(y) > 1:
        X = X.T
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    gram = X.T @ X
    _require_invertible(gram)
    return np.linalg.solve(gram, X.T @ y)


def principal_eigenvectors(gram, h=None, threshold=DEFAULT_H_THRESHOLD, clamp=False):
    """Leading eigenvectors of a Gram matrix.

    Parameters
    ----------
    gram : (q, q) array
        Symmetric positive semidefinite matrix.
    h : int, optional
        Explicit component count; overrides ``threshold``.
    threshold : float
        Cumulative eigenvalue share used when ``h`` is None.
    clamp : bool
        Cap an explicit ``h`` at ``q`` instead of raising.

    Returns
    -------
    EigenBasis
        Orthonormal columns ordered by descending eigenvalue, each with its
        largest-magnitude entry positive.
    """
    gram = check_gram(gram)
    q = gram.shape[0]
    vals, vecs = _kernels.sorted_eigh(gram)
    vals = np.where(vals < 0, 0.0, vals)
    if h is not None:
        h = int(h)
        if h < 1 or (h > q and not clamp):
            raise InvalidComponentCount(f"h={h} outside [1, {q}]")
        h = min(h, q)
    else:
        h = int(_kernels.resolve_components(vals, 0, float(threshold)))
    return EigenBasis(columns=vecs[:, :h].copy(), eigenvalues=vals[:h].copy())


def _factor_inverse(A):
    _require_invertible(A)
    return np.linalg.inv(A)


def _factor_solve(A, B):
    _require_invertible(A)
    return np.linalg.solve(A, B)


def _transform_core(spec, gram, clamp_h=False):
    """The q x q transform for ``spec`` evaluated on ``gram``."""
    q = gram.shape[0]
    eye = np.eye(q)
    kind = spec.kind
    if kind is EstimatorKind.OLSE:
        return eye
    if kind in (EstimatorKind.RE, EstimatorKind.RK):
        core = _factor_solve(gram + spec.k * eye, gram)
    elif kind is EstimatorKind.AURE:
        inv = _factor_inverse(gram + spec.k * eye)
        core = eye - spec.k**2 * (inv @ inv)
    elif kind in (EstimatorKind.LE, EstimatorKind.RD):
        core = _factor_solve(gram + eye, gram + spec.d * eye)
    elif kind is EstimatorKind.AULE:
        inv = _factor_inverse(gram + eye)
        core = eye - (1.0 - spec.d) ** 2 * (inv @ inv)
    else:
        core = eye
    if kind.uses_components:
        basis = principal_eigenvectors(gram, h=spec.h, threshold=spec.h_threshold, clamp=clamp_h)
        core = basis.projector() @ core
    return core


def full_transform(spec, gram):
    """The p x p matrix ``G`` with ``beta_biased = G @ beta_ols``."""
    return _transform_core(spec, check_gram(gram))


def fit_biased(X, y, spec):
    X = np.asarray(X, dtype=float)
    beta = fit_olse(X, y)
    return full_transform(spec, X.T @ X) @ beta


def selector(indices, p):
    """The p x q matrix whose columns are the unit vectors ``e_j``."""
    indices = np.asarray(indices, dtype=int)
    E = np.zeros((p, len(indices)))
    E[indices, np.arange(len(indices))] = 1.0
    return E


def restricted_transform(spec, embedding, gram_full, clamp_h=False):
    """Active-set transform ``G_E`` (p x q).

    The principal-component kinds are evaluated as
    ``E @ T T' @ (rest)``, with ``T`` taken from ``E' X'X E``.
    """
    E = np.asarray(embedding, dtype=float)
    if E.ndim != 2 or E.shape[1] < 1:
        raise ValueError("embedding must be a p x q selector with q >= 1")
    col_ok = np.all((E == 0) | (E == 1)) and np.all(E.sum(axis=0) == 1) and np.all(E.sum(axis=1) <= 1)
    if not col_ok:
        raise ValueError("embedding columns must be distinct standard unit vectors")
    gram_full = check_gram(gram_full)
    return E @ _transform_core(spec, E.T @ gram_full @ E, clamp_h=clamp_h)
