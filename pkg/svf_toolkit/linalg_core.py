"""
Dense complex linear algebra kernel.

Thin, validated wrappers around numpy.linalg: singular values, Hermitian
eigendecomposition, operator norm, absolute value and scalar functional
calculus. Matrices are plain complex128 numpy arrays that are frozen
(read-only) once they pass validation.
"""

import logging
import math
from typing import Callable, Dict, NamedTuple

import numpy as np

from .errors import (
    BadScalarFunctionError,
    BlockShapeError,
    NonFiniteError,
    NotHermitianError,
    NotPositiveError,
)

logger = logging.getLogger(__name__)

# Hermitian / positive / projection predicates are relative to max(1, ||a||)
STRUCTURE_TOL = 1e-12
# Reconstruction and equality checks
RECONSTRUCTION_TOL = 1e-10

ScalarFunction = Callable[[float], float]


class SVDResult(NamedTuple):
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


class HermitianEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    """Validate `a` as a square finite complex matrix and return a frozen copy."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise BlockShapeError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NonFiniteError("matrix has NaN or infinite entries")
    return _freeze(m)


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def svd(a) -> SVDResult:
    """Full SVD a = U diag(s) V*, singular values sorted descending."""
    m = as_matrix(a)
    u, s, vh = np.linalg.svd(m)
    return SVDResult(_freeze(s), _freeze(u), _freeze(vh.conj().T))


def singular_values(a) -> np.ndarray:
    """Singular values only, sorted descending."""
    return _freeze(np.linalg.svd(as_matrix(a), compute_uv=False))


def operator_norm(a) -> float:
    """Largest singular value."""
    return float(singular_values(a)[0])


def _scale(m: np.ndarray) -> float:
    return max(1.0, operator_norm(m))


def is_hermitian(a, tol: float = STRUCTURE_TOL) -> bool:
    m = as_matrix(a)
    return operator_norm(m - adjoint(m)) <= tol * _scale(m)


def hermitian_eigen(a) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending."""
    m = as_matrix(a)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    # eigh reads one triangle only; symmetrize so both contribute
    w, v = np.linalg.eigh((m + adjoint(m)) / 2)
    return HermitianEigen(_freeze(w[::-1].copy()), _freeze(v[:, ::-1].copy()))


def is_positive(a, tol: float = STRUCTURE_TOL) -> bool:
    """Positive semidefinite within a relative tolerance."""
    m = as_matrix(a)
    if not is_hermitian(m, tol):
        return False
    return float(hermitian_eigen(m).eigenvalues[-1]) >= -tol * _scale(m)


def absolute_value(a) -> np.ndarray:
    """|a| = (a*a)^(1/2), built from the SVD as V diag(s) V*."""
    s, _, v = svd(a)
    return _freeze((v * s) @ adjoint(v))


def apply_scalar_function(a, f: ScalarFunction) -> np.ndarray:
    """Apply an increasing f with f(0)=0 to a positive matrix through its eigenbasis."""
    m = as_matrix(a)
    if not is_positive(m):
        raise NotPositiveError("functional calculus needs a positive matrix")
    if f(0.0) != 0:
        raise BadScalarFunctionError(f"f(0) must be 0, got {f(0.0)!r}")
    w, v = hermitian_eigen(m)
    # Clip rounding noise below zero before evaluating f
    w = np.clip(w, 0.0, None)
    fw = np.array([float(f(float(x))) for x in w])
    if not np.isfinite(fw).all():
        raise BadScalarFunctionError("f produced non-finite values on the spectrum")
    # w is descending, so f(w) must be too
    if np.any(np.diff(fw) > RECONSTRUCTION_TOL * max(1.0, float(np.abs(fw).max()))):
        raise BadScalarFunctionError("f is not increasing on the spectrum")
    out = (v * fw) @ adjoint(v)
    return _freeze((out + adjoint(out)) / 2)


# Increasing functions on R+ with f(0) = 0
SCALAR_FUNCTIONS: Dict[str, ScalarFunction] = {
    "square": lambda t: t * t,
    "sqrt": lambda t: math.sqrt(max(t, 0.0)),
    "t_over_1_plus_t": lambda t: t / (1.0 + t),
}
