"""Implementing operators for induced derivations on a GNS space.

Two independent routes produce a symmetric ``H`` with
``pi(delta(x)) = i[H, pi(x)]``:

* :func:`construct_implementing_operator` builds the Riesz representer of
  ``x -> i phi(delta(x), 1)`` on the pair subspace of ``H (+) conj(H)`` and
  assembles ``H lam(x) = -i lam(delta(x)) + pi(x) eta``;
* :func:`solve_implementing_operator_ls` solves the commutator equations by
  least squares over Hermitian matrices.

``H`` is only determined modulo the commutant of the representation, so
every check compares commutators, never ``H`` itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import RiggedTriplet, adjoint, op_norm, triplet_norm
from .derivations import DEFAULT_SEED, CheckReport, Derivation, check_star_derivation
from .errors import DerivationAxiomError, InducedMapUndefinedError, NotSpatialError
from .gns import (
    GnsResult,
    PositiveFunctional,
    SesquilinearForm,
    gns_construct,
    sample_elements,
)

RIESZ_CUTOFF = 1e-12
COMMUTANT_CUTOFF = 1e-10
LS_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class SpatialitySolution:
    H: np.ndarray
    eta: np.ndarray
    riesz_pair: tuple | None
    gauge: str
    commutant_dim: int
    residuals: dict = field(default_factory=dict)

    def graded_norm(self, t: RiggedTriplet) -> float:
        """``||S^-1 H S^-1||``; reported only, no threshold is attached to it."""
        return triplet_norm(self.H, t, -1, -1)


def induced_images(delta: Derivation, g: GnsResult) -> list[np.ndarray]:
    """``pi(delta(b_i))`` for every basis element."""
    D = delta.image_coordinates()
    return [g.pi_coords(D[:, i]) for i in range(D.shape[1])]


def _require_derivation(delta: Derivation, tol: float = 1e-9):
    report = check_star_derivation(delta, samples=4, tol=tol)
    if not report.passed:
        raise DerivationAxiomError(report)


def _check_induced_map(delta: Derivation, g: GnsResult, tol: float):
    """``pi(x) = 0`` must imply ``pi(delta(x)) = 0``."""
    n = g.algebra.size
    R = np.stack([P.reshape(-1) for P in g.rep], axis=1)
    if R.size == 0:
        return
    s = np.linalg.svd(R, compute_uv=False)
    kernel = null_space(R, COMMUTANT_CUTOFF) if s[0] > 0 else np.eye(n)
    if kernel.shape[1] == 0:
        return
    D = delta.image_coordinates()
    images = np.stack([g.pi_coords(D[:, i]).reshape(-1) for i in range(n)], axis=1)
    K = images @ kernel
    norms = np.linalg.norm(K, axis=0)
    k = int(np.argmax(norms))
    if norms[k] > tol * max(1.0, np.linalg.norm(images)):
        raise InducedMapUndefinedError(g.algebra.element(kernel[:, k]), norms[k])


def null_space(M: np.ndarray, rcond: float) -> np.ndarray:
    """Orthonormal null-space basis from a thin SVD (scipy's version builds the full left factor)."""
    m, n = M.shape
    if m < n:
        M = np.vstack([M, np.zeros((n - m, n), dtype=M.dtype)])
    _, s, vh = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > rcond * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def pair_embedding(g: GnsResult) -> np.ndarray:
    """Columns ``[lam(b_i); conj(lam(b_i^*))]``: the pair map into ``H (+) conj(H)`` as C^{2r}.

    ``v -> conj(v)`` identifies ``conj(H)`` isometrically and linearly with C^r.
    """
    alg = g.algebra
    L = g.lambda_map
    top = L
    bottom = np.conj(L @ alg.star.T)
    return np.vstack([top, bottom])


def construct_implementing_operator(
    delta: Derivation,
    g: GnsResult,
    phi: SesquilinearForm | None = None,
    tol: float = 1e-9,
    check_axioms: bool = True,
) -> SpatialitySolution:
    alg = g.algebra
    phi = phi if phi is not None else g.form
    if check_axioms:
        _require_derivation(delta)
    _check_induced_map(delta, g, tol)

    r, n = g.hilbert_dim, alg.size
    one = alg.unit
    images = delta.basis_images()
    F = np.array([1j * phi(images[i], one) for i in range(n)])

    # Riesz representer zeta in range(W) with <w_i, zeta> = F_i, i.e. W^H zeta = conj(F).
    W = pair_embedding(g)
    gram = adjoint(W) @ W
    coeff = scipy.linalg.pinv(gram, rtol=RIESZ_CUTOFF) @ np.conj(F)
    zeta = W @ coeff
    mismatch = adjoint(W) @ zeta - np.conj(F)
    scale = max(1.0, float(np.linalg.norm(F)), float(np.linalg.norm(W)))
    if np.linalg.norm(mismatch) > tol * scale:
        null = null_space(W, RIESZ_CUTOFF)
        c = null @ np.conj(null.T @ F) if null.size else np.conj(mismatch)
        raise NotSpatialError(alg.element(c / max(np.linalg.norm(c), 1e-300)), np.linalg.norm(mismatch))

    xi1 = zeta[:r]
    xi2 = np.conj(zeta[r:])
    eta = (xi2 - xi1) / 2

    L = g.lambda_map
    D = delta.image_coordinates()
    K = -1j * (L @ D) + np.stack([P @ eta for P in g.rep], axis=1)
    H = K @ g.lambda_pinv
    well_defined = float(np.linalg.norm(K - H @ L))
    symmetry = float(np.linalg.norm(H - adjoint(H)))
    cyclic = float(np.linalg.norm(H @ g.cyclic_vector - eta - (-1j) * g.lam(delta(one))))
    return SpatialitySolution(
        H=H,
        eta=eta,
        riesz_pair=(xi1, xi2),
        gauge="riesz-construction",
        commutant_dim=commutant_basis(g).shape[1],
        residuals={
            "riesz_consistency": float(np.linalg.norm(mismatch)),
            "symmetry": symmetry,
            "well_defined": well_defined,
            "cyclic_vector": cyclic,
        },
    )


def _hermitian_basis(r: int) -> list[np.ndarray]:
    """Frobenius-orthonormal real basis of the r x r Hermitian matrices."""
    out = []
    for k in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[k, k] = 1.0
        out.append(e)
    s = 1 / np.sqrt(2)
    for k in range(r):
        for l in range(k + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[k, l] = e[l, k] = s
            out.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[k, l], e[l, k] = -1j * s, 1j * s
            out.append(e)
    return out


def solve_implementing_operator_ls(delta: Derivation, g: GnsResult) -> SpatialitySolution:
    """Minimum-Frobenius-norm Hermitian minimizer of sum_i ||pi(delta b_i) - i[H, pi(b_i)]||_F^2."""
    r = g.hilbert_dim
    reps = list(g.rep)
    targets = induced_images(delta, g)
    herm = _hermitian_basis(r)
    cols = []
    for B in herm:
        col = np.concatenate([(1j * (B @ P - P @ B)).reshape(-1) for P in reps])
        cols.append(np.concatenate([col.real, col.imag]))
    A = np.stack(cols, axis=1)
    y = np.concatenate([t.reshape(-1) for t in targets])
    y = np.concatenate([y.real, y.imag])
    t, *_ = np.linalg.lstsq(A, y, rcond=LS_CUTOFF)
    H = np.tensordot(t, np.asarray(herm), axes=1) if herm else np.zeros((0, 0), dtype=complex)
    res = A @ t - y
    residual = float(np.linalg.norm(res))
    return SpatialitySolution(
        H=H,
        eta=H @ g.cyclic_vector,
        riesz_pair=None,
        gauge="min-frobenius",
        commutant_dim=commutant_basis(g).shape[1],
        residuals={"least_squares": residual, "symmetry": float(np.linalg.norm(H - adjoint(H)))},
    )


def commutant_basis(g: GnsResult, cutoff: float = COMMUTANT_CUTOFF) -> np.ndarray:
    """Orthonormal columns spanning ``{vec(K) : [K, pi(b_i)] = 0 for all i}`` (row-major vec)."""
    r = g.hilbert_dim
    eye = np.eye(r)
    blocks = [np.kron(eye, P.T) - np.kron(P, eye) for P in g.rep]
    M = np.vstack(blocks)
    return null_space(M, cutoff)


def commutant_distance(X: np.ndarray, basis: np.ndarray) -> float:
    """``||X - P_comm(X)||_F``."""
    v = X.reshape(-1)
    return float(np.linalg.norm(v - basis @ (adjoint(basis) @ v)))


def verify_spatiality(delta: Derivation, g: GnsResult, H, tol: float = 1e-9) -> CheckReport:
    """max over basis x of ``||pi(delta x) - i[H, pi(x)]||`` and the constant ``C = ||H xi0||``."""
    H = np.asarray(H, dtype=complex)
    targets = induced_images(delta, g)
    worst, where = 0.0, None
    for label, P, T in zip(g.algebra.labels, g.rep, targets):
        res = op_norm(T - 1j * (H @ P - P @ H))
        if res > worst or where is None:
            worst, where = res, label
    C = float(np.linalg.norm(H @ g.cyclic_vector))
    passed = worst < tol
    return CheckReport(
        name="spatiality",
        passed=passed,
        tol=tol,
        residuals={"commutator": worst},
        witness=None if passed else {"at": [where], "residual": worst},
        details={"C": C},
    )


def check_perturbation(
    delta0: Derivation,
    deltap: Derivation,
    f: PositiveFunctional,
    samples: int = 200,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-9,
) -> CheckReport:
    """Dominance ``|f(delta_p x)| <= |f(delta_0 x)|`` and spatiality of ``delta_0 + delta_p``.

    When dominance holds on the sample, the doubled bound
    ``|f(delta x)| <= 2C(sqrt f(x*x) + sqrt f(xx*))`` with ``C = ||H_0 xi||`` is
    checked on the same sample and both solvers are run on the sum.
    """
    delta = delta0 + deltap
    report = check_star_derivation(delta, samples=8, tol=tol)
    if not report.passed:
        raise DerivationAxiomError(report)

    elems = sample_elements(f.algebra, samples, seed)
    dom_worst, dom_witness = 0.0, None
    for label, x in elems:
        excess = abs(f(deltap(x))) - abs(f(delta0(x)))
        if excess > tol and excess > dom_worst:
            dom_worst, dom_witness = excess, label
    dominance = dom_witness is None

    residuals = {"dominance_excess": dom_worst}
    details = {"dominance": dominance, "samples": len(elems), "seed": seed}
    witness = None if dominance else {"axiom": "dominance", "at": [dom_witness], "residual": dom_worst}
    passed = dominance
    if dominance:
        g = gns_construct(f)
        sol0 = construct_implementing_operator(delta0, g, check_axioms=False)
        C = float(np.linalg.norm(sol0.H @ g.cyclic_vector))
        worst = 0.0
        for label, x in elems:
            lhs = abs(f(delta(x)))
            rhs = 2 * C * (np.sqrt(max(f(adjoint(x) @ x).real, 0)) + np.sqrt(max(f(x @ adjoint(x)).real, 0)))
            worst = max(worst, lhs - rhs)
        riesz = construct_implementing_operator(delta, g, check_axioms=False)
        ls = solve_implementing_operator_ls(delta, g)
        res_riesz = verify_spatiality(delta, g, riesz.H, tol).residuals["commutator"]
        res_ls = verify_spatiality(delta, g, ls.H, tol).residuals["commutator"]
        residuals.update(
            {"combined_bound_excess": max(worst, 0.0), "riesz_commutator": res_riesz, "ls_commutator": res_ls}
        )
        details["C0"] = C
        passed = worst <= tol and res_riesz < tol and res_ls < tol
    return CheckReport(
        name="perturbation",
        passed=passed,
        tol=tol,
        residuals=residuals,
        witness=witness,
        seed=seed,
        details=details,
    )
