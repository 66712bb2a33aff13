"""*-derivations on an :class:`~qsd.algebra.AlgebraInstance` and checks of their axioms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraInstance, adjoint, as_matrix
from .errors import DimensionMismatchError, MissingUnitError, NotSelfAdjointError

SELF_ADJOINT_TOL = 1e-12
DEFAULT_SEED = 0


@dataclass(frozen=True, eq=False)
class Derivation:
    """A linear map on ``algebra``.

    Exactly one of ``generator`` (inner form, ``x -> i[H, x]``) and
    ``images`` (tabulated form, one image per basis element, extended
    linearly) is set.
    """

    algebra: AlgebraInstance
    generator: np.ndarray | None = None
    images: tuple | None = None

    @property
    def is_inner(self) -> bool:
        return self.generator is not None

    def __call__(self, x) -> np.ndarray:
        x = as_matrix(x, self.algebra.dim)
        if self.generator is not None:
            h = self.generator
            return 1j * (h @ x - x @ h)
        coords = self.algebra.coordinates(x)
        return np.tensordot(coords, np.asarray(self.images), axes=1)

    def basis_images(self) -> list[np.ndarray]:
        if self.images is not None:
            return list(self.images)
        return [self(b) for b in self.algebra.basis]

    def image_coordinates(self) -> np.ndarray:
        """Column ``i`` holds the basis coordinates of ``delta(basis[i])``."""
        return np.stack([self.algebra.coordinates(y) for y in self.basis_images()], axis=1)

    def __add__(self, other: "Derivation") -> "Derivation":
        if other.algebra is not self.algebra:
            raise DimensionMismatchError("derivations live on different algebras")
        if self.is_inner and other.is_inner:
            return Derivation(self.algebra, generator=self.generator + other.generator)
        imgs = [a + b for a, b in zip(self.basis_images(), other.basis_images())]
        return tabulated_derivation(self.algebra, imgs)

    def scaled(self, t: float) -> "Derivation":
        if self.is_inner:
            return Derivation(self.algebra, generator=t * self.generator)
        return tabulated_derivation(self.algebra, [t * y for y in self.images])


def inner_derivation(H, algebra: AlgebraInstance | None = None) -> Derivation:
    """``x -> i(Hx - xH)``; on the full matrix algebra unless ``algebra`` is given."""
    from .algebra import build_full_matrix_algebra

    H = as_matrix(H)
    asym = float(np.max(np.abs(H - adjoint(H)))) if H.size else 0.0
    if asym > SELF_ADJOINT_TOL * max(1.0, float(np.max(np.abs(H)))):
        raise NotSelfAdjointError(asym)
    if algebra is None:
        algebra = build_full_matrix_algebra(H.shape[0])
    elif algebra.dim != H.shape[0]:
        raise DimensionMismatchError(f"generator is {H.shape[0]}-dimensional, algebra {algebra.dim}")
    H = np.array(H)
    H.setflags(write=False)
    return Derivation(algebra, generator=H)


def tabulated_derivation(algebra: AlgebraInstance, images: Sequence) -> Derivation:
    if len(images) != algebra.size:
        raise DimensionMismatchError(f"need {algebra.size} images, got {len(images)}")
    imgs = []
    for y in images:
        y = np.array(as_matrix(y, algebra.dim))
        y.setflags(write=False)
        imgs.append(y)
    return Derivation(algebra, images=tuple(imgs))


def zero_derivation(algebra: AlgebraInstance) -> Derivation:
    z = np.zeros((algebra.dim, algebra.dim), dtype=complex)
    return tabulated_derivation(algebra, [z] * algebra.size)


@dataclass
class CheckReport:
    """Outcome of a residual-based check: ``passed`` iff every residual is below ``tol``."""

    name: str
    passed: bool
    tol: float
    residuals: dict = field(default_factory=dict)
    witness: dict | None = None
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v:.3e}" for k, v in self.residuals.items())
        msg = f"{self.name}: {status} ({parts})"
        if self.witness and not self.passed:
            msg += f" witness={self.witness}"
        return msg


def derivation_unit_image(delta: Derivation) -> np.ndarray:
    """``delta(1)``, which vanishes for every map obeying the Leibniz rule."""
    if not delta.algebra.has_unit:
        raise MissingUnitError("algebra has no unit")
    return delta(delta.algebra.unit)


def _rel(residual: np.ndarray, *scales: float) -> float:
    return float(np.linalg.norm(residual)) / max(1.0, *scales)


def check_star_derivation(
    delta: Derivation, samples: int = 20, tol: float = 1e-10, seed: int = DEFAULT_SEED
) -> CheckReport:
    """Residuals of the *-derivation axioms.

    Star compatibility and Leibniz are tested on all basis elements/pairs
    plus ``samples`` random ones; linearity on ``samples`` random
    combinations; the graded Leibniz rule with a random left factor and a
    basis right factor.  Residuals are Frobenius norms divided by
    ``max(1, ||x|| ||y||)``.
    """
    alg = delta.algebra
    rng = np.random.default_rng(seed)
    basis = alg.basis
    images = delta.basis_images()
    n = alg.size

    worst = {"star": (0.0, None), "linearity": (0.0, None), "leibniz": (0.0, None), "graded_leibniz": (0.0, None)}

    def record(key, value, where):
        if value > worst[key][0]:
            worst[key] = (value, where)

    for i, b in enumerate(basis):
        r = delta(adjoint(b)) - adjoint(images[i])
        record("star", _rel(r, np.linalg.norm(b)), (alg.labels[i],))

    # Leibniz over all basis pairs, vectorized over the right factor.
    B = np.asarray(basis)
    D = np.asarray(images)
    struct = alg.structure
    for i in range(n):
        prod_imgs = np.tensordot(struct[i], D, axes=([1], [0]))  # delta(b_i b_j) for all j
        res = prod_imgs - B[i] @ D - D[i] @ B
        norms = np.linalg.norm(res.reshape(n, -1), axis=1)
        scales = np.linalg.norm(B[i]) * np.linalg.norm(B.reshape(n, -1), axis=1)
        rel = norms / np.maximum(1.0, scales)
        j = int(np.argmax(rel))
        record("leibniz", float(rel[j]), (alg.labels[i], alg.labels[j]))

    for s in range(samples):
        x = alg.random_element(rng)
        y = alg.random_element(rng)
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        dx, dy = delta(x), delta(y)
        record("star", _rel(delta(adjoint(x)) - adjoint(dx), 1.0), ("sample", s))
        record("linearity", _rel(delta(a * x + b * y) - a * dx - b * dy, abs(a), abs(b)), ("sample", s))
        record("leibniz", _rel(delta(x @ y) - x @ dy - dx @ y, 1.0), ("sample", s))
        k = int(rng.integers(n))
        r = delta(x @ basis[k]) - x @ images[k] - dx @ basis[k]
        record("graded_leibniz", _rel(r, np.linalg.norm(basis[k])), ("sample", s, alg.labels[k]))

    residuals = {k: v[0] for k, v in worst.items()}
    if alg.has_unit:
        residuals["unit_image"] = float(np.linalg.norm(derivation_unit_image(delta)))
    passed = all(v < tol for v in residuals.values())
    witness = None
    if not passed:
        key = max(residuals, key=residuals.get)
        where = worst[key][1] if key in worst else ("unit",)
        witness = {"axiom": key, "at": list(where), "residual": residuals[key]}
    leibniz_pair = worst["leibniz"][1]
    return CheckReport(
        name="star-derivation",
        passed=passed,
        tol=tol,
        residuals=residuals,
        witness=witness,
        seed=seed,
        details={"samples": samples, "leibniz_worst_pair": list(leibniz_pair) if leibniz_pair else None},
    )
