"""GNS construction from a positive functional and the functional/form bounds.

Inner products are linear in the first argument: ``<u, v> = v^H u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraInstance, Seminorm, adjoint, as_matrix, OPERATOR_NORM
from .derivations import DEFAULT_SEED, Derivation
from .errors import DegenerateSpaceError, DimensionMismatchError, IndefiniteFunctionalError

GRAM_CUTOFF = 1e-12
POSITIVITY_TOL = 1e-12
BOUND_SAMPLES = 200


def inner(u, v) -> complex:
    return complex(np.vdot(v, u))


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    """``f(x) = <x xi0, xi0>`` (vector state) or ``f(x) = tr(rho x)`` (density form)."""

    algebra: AlgebraInstance
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        if self.vector is not None:
            v = self.vector
            return complex(np.vdot(v, x @ v))
        return complex(np.trace(self.density @ x))

    def positivity_residual(self, samples: int = 100, seed: int = DEFAULT_SEED) -> tuple[float, float]:
        """(most negative ``f(x*x)``, worst ``|f(x*) - conj f(x)|``) over random ``x``."""
        rng = np.random.default_rng(seed)
        lowest, herm = 0.0, 0.0
        for _ in range(samples):
            x = self.algebra.random_element(rng)
            lowest = min(lowest, self(adjoint(x) @ x).real)
            herm = max(herm, abs(self(adjoint(x)) - np.conj(self(x))))
        return lowest, herm


def vector_state(algebra: AlgebraInstance, xi0, normalize: bool = False) -> PositiveFunctional:
    xi0 = np.asarray(xi0, dtype=complex).reshape(-1)
    if xi0.size != algebra.dim:
        raise DimensionMismatchError(f"vector has {xi0.size} components, algebra acts on C^{algebra.dim}")
    nrm = np.linalg.norm(xi0)
    if normalize and nrm > 0:
        xi0 = xi0 / nrm
    elif abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"vector state must have unit norm (got {nrm:.6g})")
    xi0 = np.array(xi0)
    xi0.setflags(write=False)
    return PositiveFunctional(algebra, vector=xi0)


def density_functional(algebra: AlgebraInstance, rho) -> PositiveFunctional:
    rho = np.array(as_matrix(rho, algebra.dim))
    if np.max(np.abs(rho - adjoint(rho)), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(rho))):
        raise IndefiniteFunctionalError(np.nan)
    w = np.linalg.eigvalsh(rho)
    if w.size and w[0] < -POSITIVITY_TOL * max(1.0, abs(w[-1])):
        raise IndefiniteFunctionalError(w[0])
    rho.setflags(write=False)
    return PositiveFunctional(algebra, density=rho)


def trace_state(algebra: AlgebraInstance) -> PositiveFunctional:
    return density_functional(algebra, np.eye(algebra.dim) / algebra.dim)


@dataclass(frozen=True, eq=False)
class SesquilinearForm:
    """``phi(a, b) = sum_ij a_i conj(b_j) gram[i, j]`` over basis coordinates.

    Built from a functional, ``gram[i, j] = f(b_j^* b_i)`` so that
    ``phi(a, b) = f(b^* a)``.
    """

    algebra: AlgebraInstance
    gram: np.ndarray
    functional: PositiveFunctional | None = None

    def __call__(self, a, b) -> complex:
        if self.functional is not None:
            return self.functional(adjoint(b) @ a)
        alg = self.algebra
        return complex(alg.coordinates(a) @ self.gram @ np.conj(alg.coordinates(b)))


def form_from_functional(f: PositiveFunctional) -> SesquilinearForm:
    alg = f.algebra
    n = alg.size
    gram = np.empty((n, n), dtype=complex)
    for i, bi in enumerate(alg.basis):
        for j, bj in enumerate(alg.basis):
            gram[i, j] = f(adjoint(bj) @ bi)
    gram.setflags(write=False)
    return SesquilinearForm(alg, gram, f)


def form_from_gram(algebra: AlgebraInstance, gram) -> SesquilinearForm:
    gram = np.array(gram, dtype=complex)
    if gram.shape != (algebra.size, algebra.size):
        raise DimensionMismatchError(f"Gram tensor must be {algebra.size}x{algebra.size}")
    gram.setflags(write=False)
    return SesquilinearForm(algebra, gram)


@dataclass(frozen=True, eq=False)
class GnsResult:
    """Quotient Hilbert space C^r with ``lambda_map`` (r x n on coordinates) and ``rep[i] = pi(b_i)``."""

    algebra: AlgebraInstance
    hilbert_dim: int
    lambda_map: np.ndarray
    rep: tuple
    cyclic_vector: np.ndarray
    null_rank: int
    eigenvalues: np.ndarray
    form: SesquilinearForm

    def lam(self, x) -> np.ndarray:
        return self.lambda_map @ self.algebra.coordinates(x)

    def pi(self, x) -> np.ndarray:
        c = self.algebra.coordinates(x)
        return np.tensordot(c, np.asarray(self.rep), axes=1)

    def pi_coords(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=complex), np.asarray(self.rep), axes=1)

    @property
    def lambda_pinv(self) -> np.ndarray:
        return np.linalg.pinv(self.lambda_map)


def _phase_fix(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first component with |.| > tol of every column made real positive
    u = u.copy()
    for k in range(u.shape[1]):
        col = u[:, k]
        idx = np.flatnonzero(np.abs(col) > tol * max(1.0, np.abs(col).max()))
        if idx.size:
            z = col[idx[0]]
            u[:, k] = col * (abs(z) / z)
    return u


def gns_from_form(phi: SesquilinearForm) -> GnsResult:
    alg = phi.algebra
    G = np.asarray(phi.gram)
    G = 0.5 * (G + adjoint(G))
    w, U = np.linalg.eigh(G)
    order = np.argsort(-w, kind="stable")
    w, U = w[order], U[:, order]
    top = w[0] if w.size else 0.0
    if top <= 0.0 or np.max(np.abs(G)) == 0.0:
        raise DegenerateSpaceError("functional vanishes: GNS space is zero-dimensional")
    if w[-1] < -max(POSITIVITY_TOL, 1e-10 * top):
        raise IndefiniteFunctionalError(w[-1])
    keep = w > GRAM_CUTOFF * top
    r = int(keep.sum())
    w_r = w[keep]
    U_r = _phase_fix(U[:, keep])
    # <lam(a), lam(b)> = a^T G conj(b)  with  G = U diag(w) U^H
    L = np.sqrt(w_r)[:, None] * U_r.T
    L_pinv = np.conj(U_r) / np.sqrt(w_r)[None, :]
    rep = []
    for i in range(alg.size):
        P = L @ alg.left_multiplication(i) @ L_pinv
        P.setflags(write=False)
        rep.append(P)
    xi = L @ alg.coordinates(alg.unit)
    L.setflags(write=False)
    xi.setflags(write=False)
    return GnsResult(
        algebra=alg,
        hilbert_dim=r,
        lambda_map=L,
        rep=tuple(rep),
        cyclic_vector=xi,
        null_rank=alg.size - r,
        eigenvalues=w,
        form=phi,
    )


def gns_construct(f: PositiveFunctional) -> GnsResult:
    """GNS triple of ``f``: quotient by the null space of ``(a, b) -> f(b^* a)``."""
    return gns_from_form(form_from_functional(f))


def reconstruction_residual(g: GnsResult, f: PositiveFunctional) -> float:
    """max over basis x of ``|f(x) - <pi(x) xi, xi>|``."""
    xi = g.cyclic_vector
    return max(abs(f(b) - inner(P @ xi, xi)) for b, P in zip(g.algebra.basis, g.rep))


def cyclic_rank(g: GnsResult) -> int:
    vecs = np.stack([P @ g.cyclic_vector for P in g.rep], axis=1)
    if vecs.size == 0:
        return 0
    s = np.linalg.svd(vecs, compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0]))


def gns_intertwiner(g1: GnsResult, g2: GnsResult) -> np.ndarray:
    """Unitary ``U`` with ``U lam1(x) = lam2(x)`` for two GNS triples of the same form."""
    return g2.lambda_map @ g1.lambda_pinv


def intertwining_residual(g1: GnsResult, g2: GnsResult) -> float:
    U = gns_intertwiner(g1, g2)
    r = float(np.linalg.norm(adjoint(U) @ U - np.eye(g1.hilbert_dim))) if U.shape[0] == U.shape[1] else np.inf
    r = max(r, float(np.linalg.norm(U @ g1.cyclic_vector - g2.cyclic_vector)))
    for P1, P2 in zip(g1.rep, g2.rep):
        r = max(r, float(np.linalg.norm(U @ P1 @ adjoint(U) - P2)))
    return r


@dataclass
class BoundReport:
    """Empirical constants over a seeded sample (never claimed as suprema)."""

    name: str
    seminorm: str
    kappa: float
    empirical_C: float
    candidate_C: float | None = None
    passed: bool | None = None
    witness: dict | None = None
    invariance_residual: float | None = None
    samples: int = 0
    seed: int = DEFAULT_SEED
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        s = f"{self.name} [{self.seminorm}]: kappa={self.kappa:.6g} empirical C={self.empirical_C:.6g}"
        if self.invariance_residual is not None:
            s += f" invariance={self.invariance_residual:.3e}"
        if self.candidate_C is not None:
            s += f" candidate C={self.candidate_C:g} -> {'PASS' if self.passed else 'FAIL'}"
            if not self.passed and self.witness:
                s += f" witness={self.witness.get('label')}"
        return s


def sample_elements(alg: AlgebraInstance, samples: int = BOUND_SAMPLES, seed: int = DEFAULT_SEED):
    """All basis elements followed by ``samples`` seeded random unit-Frobenius elements."""
    rng = np.random.default_rng(seed)
    out = [(lbl, b) for lbl, b in zip(alg.labels, alg.basis)]
    out += [(f"sample{k}", alg.random_element(rng)) for k in range(samples)]
    return out


def _ratio_sup(pairs):
    """max num/den with num, den >= 0; num > 0 with den == 0 gives inf."""
    best, where = 0.0, None
    for label, num, den in pairs:
        if num <= 1e-13 * max(1.0, den):
            continue
        ratio = np.inf if den <= 1e-300 else num / den
        if ratio > best:
            best, where = ratio, label
    return best, where


def _bound_check(rows, candidate, tol):
    """rows: (label, lhs, rhs_without_C).  Pass iff lhs <= C * rhs + tol for all rows."""
    if candidate is None:
        return None, None
    worst, witness = 0.0, None
    for label, lhs, rhs in rows:
        excess = lhs - candidate * rhs
        if excess > tol * max(1.0, lhs) and excess > worst:
            worst, witness = excess, {"label": label, "lhs": lhs, "rhs": candidate * rhs}
    return witness is None, witness


def verify_functional_bounds(
    f: PositiveFunctional,
    delta: Derivation,
    p: Seminorm = OPERATOR_NORM,
    candidate_C: float | None = None,
    samples: int = BOUND_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
) -> BoundReport:
    """Fit ``f(x*x) <= kappa p(x)^2`` and ``|f(delta x)| <= C (sqrt f(x*x) + sqrt f(xx*))``."""
    if delta.algebra is not f.algebra and delta.algebra.dim != f.algebra.dim:
        raise DimensionMismatchError("functional and derivation on different algebras")
    kappa_rows, c_rows = [], []
    for label, x in sample_elements(f.algebra, samples, seed):
        fxx = max(f(adjoint(x) @ x).real, 0.0)
        fxxs = max(f(x @ adjoint(x)).real, 0.0)
        kappa_rows.append((label, fxx, p(x) ** 2))
        c_rows.append((label, abs(f(delta(x))), np.sqrt(fxx) + np.sqrt(fxxs)))
    kappa, _ = _ratio_sup(kappa_rows)
    C, where = _ratio_sup(c_rows)
    passed, witness = _bound_check(c_rows, candidate_C, tol)
    return BoundReport(
        name="functional-bounds",
        seminorm=p.name,
        kappa=kappa,
        empirical_C=C,
        candidate_C=candidate_C,
        passed=passed,
        witness=witness,
        samples=len(c_rows),
        seed=seed,
        details={"empirical_C_at": where},
    )


def verify_form_properties(
    phi: SesquilinearForm,
    delta: Derivation,
    p: Seminorm = OPERATOR_NORM,
    C: float | None = None,
    samples: int = BOUND_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
) -> BoundReport:
    """Invariance ``phi(ax, y) = phi(x, a*y)``, continuity constant and the derivation bound."""
    alg = phi.algebra
    rng = np.random.default_rng(seed + 1)
    inv = 0.0
    for _ in range(samples):
        a, x, y = (alg.random_element(rng) for _ in range(3))
        inv = max(inv, abs(phi(a @ x, y) - phi(x, adjoint(a) @ y)))

    elems = sample_elements(alg, samples, seed)
    one = alg.unit
    kappa_rows, c_rows = [], []
    for k, (label, a) in enumerate(elems):
        label_b, b = elems[(k * 7 + 3) % len(elems)]
        kappa_rows.append(((label, label_b), abs(phi(a, b)), p(a) * p(b)))
        paa = max(phi(a, a).real, 0.0)
        pss = max(phi(adjoint(a), adjoint(a)).real, 0.0)
        c_rows.append((label, abs(phi(delta(a), one)), np.sqrt(paa) + np.sqrt(pss)))
    kappa, _ = _ratio_sup(kappa_rows)
    Cemp, where = _ratio_sup(c_rows)
    passed, witness = _bound_check(c_rows, C, tol)
    return BoundReport(
        name="form-properties",
        seminorm=p.name,
        kappa=kappa,
        empirical_C=Cemp,
        candidate_C=C,
        passed=passed,
        witness=witness,
        invariance_residual=inv,
        samples=len(c_rows),
        seed=seed,
        details={"empirical_C_at": where},
    )
