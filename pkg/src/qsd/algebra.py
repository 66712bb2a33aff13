"""Finite-dimensional *-algebras of complex matrices, seminorms and the rigged triplet.

Algebra elements are plain ``numpy`` arrays of shape ``(d, d)`` and dtype
``complex128``.  An :class:`AlgebraInstance` fixes a basis of such matrices
together with its structure constants, so that every other module can move
freely between matrices and coordinate vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BasisError, DimensionMismatchError, InvalidDimensionError, MissingUnitError

REL_TOL = 1e-10
INDEPENDENCE_CUTOFF = 1e-12


def as_matrix(x, dim: int | None = None) -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatchError(f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def adjoint(x: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(x)).T


def op_norm(x: np.ndarray) -> float:
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if x.ndim == 1:
        return float(np.linalg.norm(x))
    nz = x != 0
    if nz.sum(axis=0).max(initial=0) <= 1 and nz.sum(axis=1).max(initial=0) <= 1:
        # at most one entry per row and column: a permutation times a diagonal
        return float(np.abs(x).max(initial=0.0))
    if x.shape[0] >= 64 and x.shape[0] == x.shape[1]:
        # largest eigenvalue of x^* x is accurate relative to ||x||^2 and much cheaper than an SVD
        g = x.conj().T @ x
        return float(np.sqrt(max(np.linalg.eigvalsh(g)[-1], 0.0)))
    return float(np.linalg.norm(x, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AlgebraInstance:
    """A *-algebra spanned by ``basis``.

    ``structure[i, j, k]`` is the coefficient of ``basis[k]`` in
    ``basis[i] @ basis[j]`` and ``star[i, k]`` that of ``basis[k]`` in
    ``basis[i]^*``.
    """

    dim: int
    basis: tuple
    has_unit: bool
    unit_index: int | None
    structure: np.ndarray
    star: np.ndarray
    labels: tuple
    closure_residual: float = 0.0
    _synthesis: np.ndarray = field(repr=False, default=None)
    _analysis: np.ndarray = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def unit(self) -> np.ndarray:
        if not self.has_unit:
            raise MissingUnitError("algebra does not contain the identity")
        if self.unit_index is not None:
            return self.basis[self.unit_index]
        return np.eye(self.dim, dtype=complex)

    def coordinates(self, x) -> np.ndarray:
        """Basis coefficients of ``x`` (least squares for elements off the span)."""
        x = as_matrix(x, self.dim)
        return self._analysis @ x.reshape(-1)

    def element(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=complex)
        if coords.shape != (self.size,):
            raise DimensionMismatchError(f"expected {self.size} coordinates, got {coords.shape}")
        return (self._synthesis @ coords).reshape(self.dim, self.dim)

    def span_residual(self, x) -> float:
        x = as_matrix(x, self.dim)
        return float(np.linalg.norm(self.element(self.coordinates(x)) - x))

    def left_multiplication(self, i: int) -> np.ndarray:
        """Matrix of ``c -> coords(basis[i] @ element(c))`` on coordinate space."""
        return self.structure[i].T

    def random_element(self, rng: np.random.Generator, normalize: bool = True) -> np.ndarray:
        c = rng.standard_normal(self.size) + 1j * rng.standard_normal(self.size)
        x = self.element(c)
        if normalize:
            x = x / np.linalg.norm(x)
        return x

    def multiplication_residual(self, i: int, j: int) -> float:
        expanded = np.tensordot(self.structure[i, j], np.asarray(self.basis), axes=1)
        return float(np.linalg.norm(self.basis[i] @ self.basis[j] - expanded))


def _build(basis, labels, dim, check_closure=True) -> AlgebraInstance:
    n = len(basis)
    synthesis = np.stack([b.reshape(-1) for b in basis], axis=1)
    s = np.linalg.svd(synthesis, compute_uv=False)
    if s[-1] <= INDEPENDENCE_CUTOFF * s[0]:
        raise BasisError(f"basis is linearly dependent (smallest singular value {s[-1]:.3e})")
    analysis = np.linalg.pinv(synthesis)

    products = np.stack([(bi @ bj).reshape(-1) for bi in basis for bj in basis], axis=1)
    structure = (analysis @ products).T.reshape(n, n, n)
    stars = np.stack([adjoint(b).reshape(-1) for b in basis], axis=1)
    star = (analysis @ stars).T

    residual = 0.0
    if check_closure:
        scale = max(1.0, max(np.linalg.norm(b) for b in basis) ** 2)
        prod_res = np.linalg.norm(synthesis @ (analysis @ products) - products, axis=0).max()
        star_res = np.linalg.norm(synthesis @ (analysis @ stars) - stars, axis=0).max()
        residual = float(max(prod_res, star_res))
        if residual > REL_TOL * scale:
            raise BasisError(f"span not closed under product and involution (residual {residual:.3e})")

    eye = np.eye(dim)
    unit_index = None
    for k, b in enumerate(basis):
        if np.linalg.norm(b - eye) <= REL_TOL * max(1.0, np.sqrt(dim)):
            unit_index = k
            break
    eye_res = np.linalg.norm(synthesis @ (analysis @ eye.reshape(-1)) - eye.reshape(-1))
    has_unit = unit_index is not None or eye_res <= REL_TOL * np.sqrt(dim)

    return AlgebraInstance(
        dim=dim,
        basis=tuple(_frozen(b) for b in basis),
        has_unit=bool(has_unit),
        unit_index=unit_index,
        structure=_frozen(structure),
        star=_frozen(star),
        labels=tuple(labels),
        closure_residual=residual,
        _synthesis=_frozen(synthesis),
        _analysis=_frozen(analysis),
    )


def build_full_matrix_algebra(d: int) -> AlgebraInstance:
    """The full matrix algebra M_d in the matrix-unit basis ``E_ij`` (row-major order)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    basis, labels = [], []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            basis.append(e)
            labels.append(f"E{i + 1}{j + 1}" if d < 10 else f"E{i + 1},{j + 1}")
    n = d * d
    # E_ij E_kl = delta_jk E_il, filled directly rather than by re-expansion.
    structure = np.zeros((n, n, n), dtype=complex)
    star = np.zeros((n, n), dtype=complex)
    for i in range(d):
        for j in range(d):
            star[i * d + j, j * d + i] = 1.0
            for l in range(d):
                structure[i * d + j, j * d + l, i * d + l] = 1.0
    identity = np.eye(n, dtype=complex)
    return AlgebraInstance(
        dim=d,
        basis=tuple(_frozen(b) for b in basis),
        has_unit=True,
        unit_index=0 if d == 1 else None,
        structure=_frozen(structure),
        star=_frozen(star),
        labels=tuple(labels),
        _synthesis=_frozen(identity),
        _analysis=_frozen(identity),
    )


def algebra_from_basis(basis: Sequence, labels: Sequence[str] | None = None) -> AlgebraInstance:
    """Validate a user basis (independence, closure) and compute its structure constants."""
    if len(basis) == 0:
        raise InvalidDimensionError("basis must not be empty")
    mats = [as_matrix(b) for b in basis]
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape != (dim, dim):
            raise DimensionMismatchError("basis matrices have different sizes")
    if labels is None:
        labels = [f"b{k}" for k in range(len(mats))]
    return _build(mats, labels, dim)


@dataclass(frozen=True, eq=False)
class RiggedTriplet:
    """Scale H_{+1} < H < H_{-1} generated by a diagonal weight S >= 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidDimensionError("triplet needs at least one weight")
        if np.any(w < 1.0):
            raise ValueError(f"triplet weights must be >= 1 (min {w.min():g})")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dim(self) -> int:
        return self.weights.size

    def S(self, power: int = 1) -> np.ndarray:
        return np.diag(self.weights.astype(complex) ** power)

    def norm(self, xi, grade: int = 0) -> float:
        """Vector norm in H_{grade}: ||S^grade xi||."""
        xi = np.asarray(xi, dtype=complex)
        return float(np.linalg.norm(self.weights ** grade * xi))


def triplet_norm(x, t: RiggedTriplet, grade_left: int, grade_right: int) -> float:
    """Spectral norm of ``S^grade_left X S^grade_right``."""
    if grade_left not in (-1, 0, 1) or grade_right not in (-1, 0, 1):
        raise ValueError("grades must lie in {-1, 0, 1}")
    x = as_matrix(x)
    if x.shape[0] != t.dim:
        raise DimensionMismatchError(f"operator is {x.shape[0]}-dimensional, triplet {t.dim}-dimensional")
    w = t.weights
    scaled = (w ** grade_left)[:, None] * x * (w ** grade_right)[None, :]
    return op_norm(scaled)


@dataclass(frozen=True, eq=False)
class Seminorm:
    """``operator``, ``frobenius`` or ``graded`` (X -> ||S^a X S^b||)."""

    kind: str = "operator"
    grades: tuple = (0, 0)
    triplet: RiggedTriplet | None = None

    def __post_init__(self):
        if self.kind not in ("operator", "frobenius", "graded"):
            raise ValueError(f"unknown seminorm kind {self.kind!r}")
        if self.kind == "graded" and self.triplet is None:
            raise ValueError("graded seminorm needs a triplet")

    def __call__(self, x) -> float:
        if self.kind == "operator":
            return op_norm(x)
        if self.kind == "frobenius":
            return float(np.linalg.norm(x))
        return triplet_norm(x, self.triplet, *self.grades)

    @property
    def name(self) -> str:
        if self.kind == "graded":
            return f"graded({self.grades[0]},{self.grades[1]})"
        return self.kind


OPERATOR_NORM = Seminorm("operator")
FROBENIUS_NORM = Seminorm("frobenius")


def graded_family(t: RiggedTriplet) -> list[Seminorm]:
    """All nine graded seminorms attached to ``t``."""
    return [Seminorm("graded", (a, b), t) for a in (-1, 0, 1) for b in (-1, 0, 1)]


def cyclic_subspace_dim(operators: Sequence[np.ndarray], xi, tol: float = 1e-10) -> int:
    """Dimension of the smallest subspace containing ``xi`` and invariant under ``operators``."""
    xi = np.asarray(xi, dtype=complex)
    basis = np.zeros((xi.size, 0), dtype=complex)

    def extend(basis, vecs):
        added = False
        for v in vecs:
            v = v - basis @ (basis.conj().T @ v)
            nv = np.linalg.norm(v)
            if nv > tol:
                basis = np.column_stack([basis, v / nv])
                added = True
        return basis, added

    basis, _ = extend(basis, [xi])
    frontier = list(basis.T)
    while frontier:
        candidates = [op @ v for v in frontier for op in operators]
        before = basis.shape[1]
        basis, _ = extend(basis, candidates)
        frontier = list(basis[:, before:].T)
    return basis.shape[1]
