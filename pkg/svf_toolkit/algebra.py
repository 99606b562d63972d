"""
Multi-matrix C*-algebras A = M_{n_1} (+) ... (+) M_{n_k}.

Elements are tuples of frozen complex blocks. The module also owns the
projection bookkeeping (rank vectors, spectral steps of positive elements)
and the random generators used by the property battery.
"""

import itertools
import logging
from dataclasses import dataclass
from numbers import Number
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from . import linalg_core as la
from .errors import BlockShapeError, NotPositiveError, NotProjectionError, RankOutOfRangeError
from .k0_order import SimplicialClass, in_dimension_range

logger = logging.getLogger(__name__)

PROJECTION_TOL = 1e-10
# Eigenvalues closer than this (relative to max(1, ||a||)) form one spectral step
SPECTRAL_MERGE_TOL = 1e-10

Seed = Union[int, Sequence[int], np.random.Generator, None]


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    """The algebra M_{n_1} (+) ... (+) M_{n_k}."""

    block_sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes or any(n < 1 for n in sizes):
            raise BlockShapeError(f"block sizes must be a non-empty list of positive integers, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def k(self) -> int:
        return len(self.block_sizes)

    def element(self, blocks: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, tuple(blocks))

    def zero(self) -> "AlgebraElement":
        return self.element([np.zeros((n, n), dtype=np.complex128) for n in self.block_sizes])

    def unit(self) -> "AlgebraElement":
        return self.element([np.eye(n, dtype=np.complex128) for n in self.block_sizes])

    def diagonal(self, diagonals: Sequence[Sequence[complex]]) -> "AlgebraElement":
        return self.element([np.diag(np.asarray(d, dtype=np.complex128)) for d in diagonals])

    def zero_class(self) -> SimplicialClass:
        return SimplicialClass((0,) * self.k)

    def top_class(self) -> SimplicialClass:
        """Class of the unit."""
        return SimplicialClass(self.block_sizes)

    def box(self) -> Iterator[SimplicialClass]:
        """Every class of the dimension range, in lexicographic order."""
        for coords in itertools.product(*(range(n + 1) for n in self.block_sizes)):
            yield SimplicialClass(coords)

    def clamp(self, g: SimplicialClass) -> SimplicialClass:
        """Clamp a positive class componentwise into the box prod [0, n_i]."""
        return SimplicialClass(tuple(min(x, n) for x, n in zip(g.coords, self.block_sizes)))

    def coordinate_projection(self, r: SimplicialClass) -> "AlgebraElement":
        """Diagonal projection onto the first r_i basis vectors of each block."""
        _check_rank_vector(self, r)
        return self.diagonal([[1.0] * x + [0.0] * (n - x) for x, n in zip(r.coords, self.block_sizes)])


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element (a_1, ..., a_k) of a multi-matrix algebra."""

    algebra: MultiMatrixAlgebra
    blocks: Tuple[np.ndarray, ...]

    # numpy scalars must defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self):
        if len(self.blocks) != self.algebra.k:
            raise BlockShapeError(f"expected {self.algebra.k} blocks, got {len(self.blocks)}")
        blocks = tuple(la.as_matrix(b) for b in self.blocks)
        for b, n in zip(blocks, self.algebra.block_sizes):
            if b.shape != (n, n):
                raise BlockShapeError(f"block of shape {b.shape} does not fit M_{n}")
        object.__setattr__(self, "blocks", blocks)

    def _same_algebra(self, other: "AlgebraElement") -> None:
        if self.algebra.block_sizes != other.algebra.block_sizes:
            raise BlockShapeError("elements live in different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same_algebra(other)
        return self.algebra.element([x + y for x, y in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same_algebra(other)
        return self.algebra.element([x - y for x, y in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return self.algebra.element([-x for x in self.blocks])

    def __mul__(self, alpha: Number) -> "AlgebraElement":
        if not isinstance(alpha, Number):
            return NotImplemented
        return self.algebra.element([alpha * x for x in self.blocks])

    __rmul__ = __mul__

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same_algebra(other)
        return self.algebra.element([x @ y for x, y in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return self.algebra.element([la.adjoint(x) for x in self.blocks])

    def is_positive(self) -> bool:
        return all(la.is_positive(b) for b in self.blocks)

    def allclose(self, other: "AlgebraElement", tol: float = la.RECONSTRUCTION_TOL) -> bool:
        self._same_algebra(other)
        return element_norm(self - other) <= tol


@dataclass(frozen=True, eq=False)
class SpectralSteps:
    """a = sum alpha_{i-1} p_i with alpha_0 > alpha_1 > ... > 0 and cumulative classes [p^_k]."""

    algebra: MultiMatrixAlgebra
    values: Tuple[float, ...]
    cumulative_classes: Tuple[SimplicialClass, ...]
    projections: Tuple[AlgebraElement, ...]

    def __len__(self) -> int:
        return len(self.values)

    def cumulative_projection(self, k: int) -> AlgebraElement:
        """p^_k = p_1 + ... + p_k (p^_0 = 0)."""
        total = self.algebra.zero()
        for p in self.projections[:k]:
            total = total + p
        return total

    def reconstruct(self) -> AlgebraElement:
        total = self.algebra.zero()
        for alpha, p in zip(self.values, self.projections):
            total = total + alpha * p
        return total


def element_norm(a: AlgebraElement) -> float:
    """C*-norm of a direct sum: the largest block norm."""
    return max(la.operator_norm(b) for b in a.blocks)


def is_projection(p: AlgebraElement) -> bool:
    return all(
        la.operator_norm(b @ b - b) <= PROJECTION_TOL and la.operator_norm(b - la.adjoint(b)) <= PROJECTION_TOL
        for b in p.blocks
    )


def _require_projection(p: AlgebraElement) -> None:
    if not is_projection(p):
        raise NotProjectionError("element is not a projection")


def _check_rank_vector(algebra: MultiMatrixAlgebra, r: SimplicialClass) -> None:
    if not in_dimension_range(algebra, r):
        raise RankOutOfRangeError(f"rank vector {r} is outside the box {algebra.top_class()}")


def rank_vector(p: AlgebraElement) -> SimplicialClass:
    """[p]_0 as the vector of block ranks (eigenvalues above 1/2)."""
    _require_projection(p)
    return SimplicialClass(tuple(int(np.sum(la.hermitian_eigen(b).eigenvalues > 0.5)) for b in p.blocks))


def range_basis(p: AlgebraElement) -> List[np.ndarray]:
    """Orthonormal basis (as columns) of the range of each block of a projection."""
    _require_projection(p)
    bases = []
    for b in p.blocks:
        w, v = la.hermitian_eigen(b)
        bases.append(v[:, w > 0.5])
    return bases


def projection_from_basis(algebra: MultiMatrixAlgebra, bases: Sequence[np.ndarray]) -> AlgebraElement:
    """Projection onto the span of orthonormal columns, block by block."""
    blocks = []
    for basis in bases:
        p = basis @ la.adjoint(basis)
        blocks.append((p + la.adjoint(p)) / 2)
    return algebra.element(blocks)


def projection_leq(p: AlgebraElement, q: AlgebraElement, tol: float = 1e-9) -> bool:
    """p <= q for projections, i.e. qp = p."""
    return element_norm(p - q @ p) <= tol


def spectral_steps(a: AlgebraElement) -> SpectralSteps:
    """Merge the nonzero eigenvalues of a positive element across blocks into spectral steps."""
    for b in a.blocks:
        if not la.is_positive(b):
            raise NotPositiveError("spectral steps need a positive element")
    tol = SPECTRAL_MERGE_TOL * max(1.0, element_norm(a))

    # (eigenvalue, block, eigenvector) for every eigenvalue above the zero cutoff
    entries = []
    for i, b in enumerate(a.blocks):
        w, v = la.hermitian_eigen(b)
        for j, value in enumerate(w):
            if value > tol:
                entries.append((float(value), i, v[:, j]))
    entries.sort(key=lambda e: -e[0])

    clusters: List[list] = []
    for entry in entries:
        # Within tol of the largest value of the current step
        if clusters and clusters[-1][0][0] - entry[0] <= tol:
            clusters[-1].append(entry)
        else:
            clusters.append([entry])

    algebra = a.algebra
    values, classes, projections = [], [], []
    counts = [0] * algebra.k
    for cluster in clusters:
        blocks = [np.zeros((n, n), dtype=np.complex128) for n in algebra.block_sizes]
        for _, i, vec in cluster:
            blocks[i] = blocks[i] + np.outer(vec, vec.conj())
            counts[i] += 1
        values.append(float(np.mean([e[0] for e in cluster])))
        classes.append(SimplicialClass(tuple(counts)))
        projections.append(algebra.element(blocks))

    logger.debug("Spectral steps: %s distinct values", len(values))
    return SpectralSteps(algebra, tuple(values), tuple(classes), tuple(projections))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_unitary(algebra: MultiMatrixAlgebra, seed: Seed = None) -> AlgebraElement:
    rng = make_rng(seed)
    return algebra.element([haar_unitary(n, rng) for n in algebra.block_sizes])


def random_projection(algebra: MultiMatrixAlgebra, r: SimplicialClass, seed: Seed = None) -> AlgebraElement:
    """Haar conjugate of the coordinate projection with rank vector r."""
    _check_rank_vector(algebra, r)
    rng = make_rng(seed)
    blocks = []
    for x, n in zip(r.coords, algebra.block_sizes):
        u = haar_unitary(n, rng)[:, :x]
        p = u @ la.adjoint(u)
        blocks.append((p + la.adjoint(p)) / 2)
    return algebra.element(blocks)


def random_element(
    algebra: MultiMatrixAlgebra,
    seed: Seed = None,
    max_norm: float = 2.0,
    rank_deficient_prob: float = 0.1,
) -> AlgebraElement:
    """Complex Ginibre blocks scaled to ||a|| <= max_norm, sometimes rank deficient."""
    rng = make_rng(seed)
    blocks = []
    for n in algebra.block_sizes:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if rng.random() < rank_deficient_prob:
            z[:, rng.integers(0, n)] = 0
        blocks.append(z)
    a = algebra.element(blocks)
    norm = element_norm(a)
    if norm == 0:
        return a
    return (max_norm * rng.random() / norm) * a


def random_positive(
    algebra: MultiMatrixAlgebra, seed: Seed = None, max_norm: float = 2.0, rank_deficient_prob: float = 0.1
) -> AlgebraElement:
    """x*x for a random x, so the result is positive with norm <= max_norm."""
    x = random_element(algebra, seed, max_norm=np.sqrt(max_norm), rank_deficient_prob=rank_deficient_prob)
    return x.adjoint() @ x


def random_ordered_pair(algebra: MultiMatrixAlgebra, seed: Seed = None) -> Tuple[AlgebraElement, AlgebraElement]:
    """0 <= a <= b built as b = a + c*c."""
    rng = make_rng(seed)
    a = random_positive(algebra, rng)
    c = random_element(algebra, rng)
    return a, a + c.adjoint() @ c


def absolute_value(a: AlgebraElement) -> AlgebraElement:
    return a.algebra.element([la.absolute_value(b) for b in a.blocks])


def apply_scalar_function(a: AlgebraElement, f: la.ScalarFunction) -> AlgebraElement:
    return a.algebra.element([la.apply_scalar_function(b, f) for b in a.blocks])


def random_algebra(seed: Seed = None, max_blocks: int = 3, max_size: int = 6) -> MultiMatrixAlgebra:
    rng = make_rng(seed)
    k = int(rng.integers(1, max_blocks + 1))
    return MultiMatrixAlgebra(tuple(int(n) for n in rng.integers(1, max_size + 1, size=k)))


def random_class(algebra: MultiMatrixAlgebra, seed: Seed = None) -> SimplicialClass:
    """Uniform class in the box."""
    rng = make_rng(seed)
    return SimplicialClass(tuple(int(rng.integers(0, n + 1)) for n in algebra.block_sizes))

