"""Diagnostics for cutoff families of inner derivations ``delta_n = i[H_n, .]``.

The representation is the identity map on C^d; every verdict about a limit
is finite-sweep evidence, and reports say so.

Stopping rules:

* Cauchy at tolerance: the increments of the last quarter of the index
  range are all below ``tol``.
* diverging: strictly increasing over the last half of the range and either
  exceeding 10x the initial value or showing no deceleration (last-half
  increments non-decreasing).
* tends to zero: the last quarter is below ``tol``, or the upper envelope
  ``max_{m >= k} v_m`` strictly decreases across the quarter points and ends
  at most half its initial value.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraInstance, RiggedTriplet, Seminorm, adjoint, as_matrix, op_norm, OPERATOR_NORM
from .derivations import DEFAULT_SEED, Derivation, tabulated_derivation
from .errors import DimensionMismatchError, MissingLimitError, NotConvergedError, NotSelfAdjointError
from .models import BosonModel, alternating_pattern, boson_cutoff, embedded_spin_hamiltonian, product_state, up_pattern

CSV_VERSION = "qsd-report-v1"
CSV_COLUMNS = ("n", "norm_Hn_xi0", "cauchy_increment", "weak_gap_max")
DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class CutoffFamily:
    generators: tuple
    cyclic_vector: np.ndarray
    limit_generator: np.ndarray | None = None
    indices: tuple = ()
    algebra: AlgebraInstance | None = None
    triplet: RiggedTriplet | None = None
    name: str = "explicit"

    def __post_init__(self):
        if not self.generators:
            raise ValueError("cutoff family needs at least one generator")
        gens = tuple(as_matrix(h) for h in self.generators)
        d = gens[0].shape[0]
        for h in gens + ((as_matrix(self.limit_generator),) if self.limit_generator is not None else ()):
            if h.shape != (d, d):
                raise DimensionMismatchError("generators of a family must share one dimension")
            asym = float(np.max(np.abs(h - adjoint(h))))
            if asym > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
                raise NotSelfAdjointError(asym)
        xi = np.asarray(self.cyclic_vector, dtype=complex).reshape(-1)
        if xi.size != d:
            raise DimensionMismatchError("cyclic vector dimension differs from generators")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "cyclic_vector", xi)
        if not self.indices:
            object.__setattr__(self, "indices", tuple(range(1, len(gens) + 1)))

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def derivations(self) -> list[Derivation]:
        from .derivations import inner_derivation

        return [inner_derivation(h, self.algebra) for h in self.generators]


def boson_family(model: BosonModel, lmax: int, occupation=0, with_limit: bool = True) -> CutoffFamily:
    """``H_L = Q_L H Q_L`` for L = 0..lmax with cyclic vector a number state."""
    gens = tuple(boson_cutoff(model, L) for L in range(lmax + 1))
    return CutoffFamily(
        generators=gens,
        cyclic_vector=model.number_state(occupation),
        limit_generator=model.H if with_limit else None,
        indices=tuple(range(lmax + 1)),
        triplet=model.triplet(),
        name="boson",
    )


def boson_probes(model: BosonModel) -> list[np.ndarray]:
    return [np.eye(model.dim, dtype=complex), *model.a_ops, *model.adag_ops]


def spin_family(vmax: int, state: str = "up", with_limit: bool = False) -> CutoffFamily:
    """``H_V`` on the first V of ``vmax`` sites, V = 1..vmax; limit (if requested) is 0."""
    pattern = up_pattern(vmax) if state == "up" else alternating_pattern(vmax)
    gens = tuple(np.diag(embedded_spin_hamiltonian(V, vmax)).astype(complex) for V in range(1, vmax + 1))
    limit = np.zeros_like(gens[0]) if with_limit else None
    return CutoffFamily(gens, product_state(pattern), limit, tuple(range(1, vmax + 1)), name=f"spin-{state}")


def spin_probes(vmax: int) -> list[np.ndarray]:
    """Identity and sigma_1 on the first and last site."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)

    def site(op, k):
        out = np.array([[1.0]], dtype=complex)
        for j in range(vmax):
            out = np.kron(out, op if j == k else np.eye(2))
        return out

    probes = [np.eye(2 ** vmax, dtype=complex), site(sx, 0)]
    if vmax > 1:
        probes.append(site(sx, vmax - 1))
    return probes


# ---------------------------------------------------------------------------
# sequence verdicts


def is_diverging(values: Sequence[float], factor: float = DIVERGENCE_FACTOR) -> bool:
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return True
    if v.size < 3:
        return False
    half = v[(v.size - 1) // 2:]
    steps = np.diff(half)
    scale = max(1.0, float(np.abs(v).max()))
    if not np.all(steps > 1e-12 * scale):
        return False
    if v[-1] > factor * v[0]:
        return True
    return bool(np.all(np.diff(steps) >= -1e-12 * scale))


def tends_to_zero(values: Sequence[float], tol: float = 1e-10) -> bool:
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return False
    q = max(1, v.size // 4)
    if np.all(v[-q:] < tol):
        return True
    if v.size < 4:
        return False
    envelope = np.maximum.accumulate(v[::-1])[::-1]
    points = [0, v.size // 4, v.size // 2, (3 * v.size) // 4]
    env = envelope[points]
    return bool(np.all(np.diff(env) < 0) and env[-1] <= 0.5 * env[0])


def settle_index(values: Sequence[float], tol: float) -> int | None:
    """First position after which every value is below ``tol`` (None if the last one is not)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0 or not v[-1] < tol:
        return None
    above = np.flatnonzero(~(v < tol))
    return 0 if above.size == 0 else int(above[-1]) + 1


def cauchy_at_tolerance(increments: Sequence[float], tol: float) -> bool:
    inc = np.asarray(increments, dtype=float)
    if inc.size == 0:
        return True
    q = max(1, math.ceil(inc.size / 4))
    return bool(np.all(inc[-q:] < tol))


# ---------------------------------------------------------------------------
# reports


@dataclass
class SweepReport:
    family: str
    indices: list
    norm_Hn_xi0: list
    cauchy_increment: list
    limit_residual: list | None
    weak_gap_max: list | None
    strong_gap_minus1: list | None
    running_sup: list
    sup: float
    nondecreasing: bool
    nonincreasing: bool
    diverging: bool
    tends_to_zero: bool
    hypotheses: dict
    tol: float
    stopping_rule: str = "cauchy: last-quarter increments < tol; divergence: finite-sweep evidence"

    def rows(self):
        for k, n in enumerate(self.indices):
            yield (
                n,
                self.norm_Hn_xi0[k],
                self.cauchy_increment[k],
                None if self.weak_gap_max is None else self.weak_gap_max[k],
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {CSV_VERSION}\n")
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.rows():
            buf.write(",".join(_csv_cell(v) for v in row) + "\n")
        return buf.getvalue()

    def summary(self) -> str:
        verdict = "diverging (finite-sweep evidence)" if self.diverging else "bounded on sweep"
        lines = [
            f"sweep {self.family}: {len(self.indices)} indices, sup ||H_n xi0|| = {self.sup:.6g} ({verdict})",
            f"  final ||H_n xi0|| = {self.norm_Hn_xi0[-1]:.6g}; tends to zero: {self.tends_to_zero}",
        ]
        for k, v in self.hypotheses.items():
            lines.append(f"  hypothesis {k}: {'holds' if v else 'fails'}")
        return "\n".join(lines)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _commutator_norm(H, x, xi=None) -> float:
    if np.count_nonzero(H - np.diag(np.diagonal(H))) == 0:
        h = np.diagonal(H)
        c = 1j * (h[:, None] * x - x * h[None, :])
    else:
        c = 1j * (H @ x - x @ H)
    return op_norm(c) if xi is None else float(np.linalg.norm(c @ xi))


def sweep_cutoff(
    fam: CutoffFamily,
    probes: Sequence[np.ndarray],
    tol: float = 1e-10,
    increment_norm: str = "operator",
) -> SweepReport:
    """Per-index ``||H_n xi0||``, Cauchy increments over probes and, with a limit, limit gaps.

    ``increment_norm="state"`` measures increments as ``||(delta_n - delta_{n+1})(x) xi0||``.
    """
    xi = fam.cyclic_vector
    gens = fam.generators
    probes = [as_matrix(p, fam.dim) for p in probes]
    vec = xi if increment_norm == "state" else None
    norms = [float(np.linalg.norm(h @ xi)) for h in gens]
    incs = []
    for k in range(len(gens)):
        if k + 1 < len(gens):
            diff = gens[k] - gens[k + 1]
            incs.append(max((_commutator_norm(diff, x, vec) for x in probes), default=0.0))
        else:
            incs.append(None)
    limit_res = weak = strong = None
    if fam.limit_generator is not None:
        H = fam.limit_generator
        limit_res, weak, strong = [], [], []
        pxi = [x @ xi for x in probes]
        for h in gens:
            diff = h - H
            limit_res.append(max((_commutator_norm(diff, x, vec) for x in probes), default=0.0))
            moved = [diff @ v for v in pxi]
            weak.append(max((abs(np.vdot(w, m)) for m in moved for w in pxi), default=0.0))
            if fam.triplet is not None:
                strong.append(max((fam.triplet.norm(m, -1) for m in moved), default=0.0))
        if fam.triplet is None:
            strong = None
    running = list(np.maximum.accumulate(norms))
    sup = float(running[-1])
    finite_incs = [v for v in incs if v is not None]
    diverging = is_diverging(norms)
    hyp = {
        "(i) cauchy": cauchy_at_tolerance(finite_incs, tol),
        "(ii) spatial": True,
        "(iii) sup bounded": not diverging,
    }
    arr = np.asarray(norms)
    return SweepReport(
        family=fam.name,
        indices=list(fam.indices),
        norm_Hn_xi0=norms,
        cauchy_increment=incs,
        limit_residual=limit_res,
        weak_gap_max=weak,
        strong_gap_minus1=strong,
        running_sup=[float(v) for v in running],
        sup=sup,
        nondecreasing=bool(np.all(np.diff(arr) >= -tol)),
        nonincreasing=bool(np.all(np.diff(arr) <= tol)),
        diverging=diverging,
        tends_to_zero=tends_to_zero(norms, tol),
        hypotheses=hyp,
        tol=tol,
    )


@dataclass
class ConvergenceReport:
    indices: list
    hypothesis_gaps: list
    conclusion_gaps: list
    hypothesis_index: int | None
    conclusion_index: int | None
    hypothesis_diverging: bool
    conclusion_diverging: bool
    tol: float

    def summary(self) -> str:
        def verdict(idx, div):
            if idx is not None:
                return f"below tol from n = {self.indices[idx]}"
            return "diverging (finite-sweep evidence)" if div else "not below tol on sweep"

        return (
            f"weak convergence: hypothesis {verdict(self.hypothesis_index, self.hypothesis_diverging)}; "
            f"conclusion {verdict(self.conclusion_index, self.conclusion_diverging)}"
        )


def check_weak_convergence(
    fam: CutoffFamily,
    x_probes: Sequence[np.ndarray],
    z_probes: Sequence[np.ndarray] | None = None,
    tol: float = 1e-10,
) -> ConvergenceReport:
    """Tabulate ``|<(H_n - H) xi0, x xi0>|`` and ``|<(H_n - H) x xi0, z xi0>|`` over n."""
    if fam.limit_generator is None:
        raise MissingLimitError("weak-convergence check needs a limit generator")
    z_probes = x_probes if z_probes is None else z_probes
    xi = fam.cyclic_vector
    H = fam.limit_generator
    xv = [as_matrix(x, fam.dim) @ xi for x in x_probes]
    zv = [as_matrix(z, fam.dim) @ xi for z in z_probes]
    hyp, concl = [], []
    for h in fam.generators:
        diff = h - H
        d0 = diff @ xi
        hyp.append(max((abs(np.vdot(v, d0)) for v in xv), default=0.0))
        if xv and zv:
            moved = np.stack([diff @ v for v in xv], axis=1)
            Z = np.stack(zv, axis=1)
            concl.append(float(np.abs(adjoint(Z) @ moved).max()))
        else:
            concl.append(0.0)
    return ConvergenceReport(
        indices=list(fam.indices),
        hypothesis_gaps=[float(v) for v in hyp],
        conclusion_gaps=concl,
        hypothesis_index=settle_index(hyp, tol),
        conclusion_index=settle_index(concl, tol),
        hypothesis_diverging=is_diverging(hyp),
        conclusion_diverging=is_diverging(concl),
        tol=tol,
    )


@dataclass
class UniformityReport:
    kappas: list
    sup_kappa: float
    uniform: bool
    bound: float | None
    passed: bool
    p: str
    q: str
    samples: int
    seed: int

    def summary(self) -> str:
        s = f"uniform continuity [{self.p} <= kappa {self.q}]: sup kappa_n = {self.sup_kappa:.12g}, "
        s += "uniform" if self.uniform else "not uniform (kappa_n diverging, finite-sweep evidence)"
        if self.bound is not None:
            s += f"; bound {self.bound:g} -> {'PASS' if self.passed else 'FAIL'}"
        return s


def check_uniform_continuity(
    deltas: Sequence[Derivation],
    p: Seminorm = OPERATOR_NORM,
    q: Seminorm = OPERATOR_NORM,
    bound: float | None = None,
    samples: int = 100,
    seed: int = DEFAULT_SEED,
) -> UniformityReport:
    """Smallest ``kappa_n`` with ``p(delta_n(x)) <= kappa_n q(x)`` on a shared seeded sample."""
    from .gns import sample_elements

    if not deltas:
        raise ValueError("need at least one derivation")
    alg = deltas[0].algebra
    for d in deltas:
        if d.algebra is not alg and d.algebra.dim != alg.dim:
            raise DimensionMismatchError("derivations on different algebras")
    elems = [x for _, x in sample_elements(alg, samples, seed)]
    qs = [q(x) for x in elems]
    kappas = []
    for d in deltas:
        k = 0.0
        for x, qx in zip(elems, qs):
            px = p(d(x))
            if px <= 1e-14:
                continue
            k = max(k, np.inf if qx <= 1e-300 else px / qx)
        kappas.append(float(k))
    sup = float(max(kappas))
    uniform = bool(np.isfinite(sup) and not is_diverging(kappas))
    passed = uniform and (bound is None or sup <= bound * (1 + 1e-12))
    return UniformityReport(kappas, sup, uniform, bound, passed, p.name, q.name, len(elems), seed)


def cauchy_profile(deltas: Sequence[Derivation]) -> list[float]:
    """max over basis of ``||delta_n(b) - delta_{n+1}(b)||`` for consecutive n."""
    imgs = [np.asarray(d.basis_images()) for d in deltas]
    return [max(op_norm(a - b) for a, b in zip(x, y)) for x, y in zip(imgs, imgs[1:])]


def tau_cauchy_limit(deltas: Sequence[Derivation], tol: float = 1e-8) -> Derivation:
    """Tabulated limit: average of the basis images over the final quarter once it is Cauchy."""
    if not deltas:
        raise ValueError("sequence must be nonempty")
    if len(deltas) == 1:
        return tabulated_derivation(deltas[0].algebra, deltas[0].basis_images())
    inc = cauchy_profile(deltas)
    if not cauchy_at_tolerance(inc, tol):
        raise NotConvergedError(inc, tol)
    q = max(1, math.ceil(len(inc) / 4))
    tail = deltas[len(deltas) - 1 - q:]
    mean = np.mean([np.asarray(d.basis_images()) for d in tail], axis=0)
    return tabulated_derivation(deltas[0].algebra, list(mean))


def limit_exists_on(deltas: Sequence[Derivation], elements: Sequence[np.ndarray], tol: float) -> list[bool]:
    """Per element: is ``delta_n(x)`` Cauchy at tolerance?"""
    out = []
    for x in elements:
        vals = [d(x) for d in deltas]
        inc = [op_norm(a - b) for a, b in zip(vals, vals[1:])]
        out.append(cauchy_at_tolerance(inc, tol))
    return out


def spin_closed_form_sweep(vmax: int, state: str = "up", tol: float = 1e-10) -> SweepReport:
    """``||H_V Phi||`` for V = 1..vmax from magnetization bookkeeping alone.

    Without operators there are no Cauchy increments; only hypothesis (iii) is judged.
    """
    pattern = up_pattern(vmax) if state == "up" else alternating_pattern(vmax)
    partial = np.cumsum(pattern).astype(float)
    volumes = np.arange(1, vmax + 1, dtype=float)
    norms = (partial ** 2 / volumes).tolist()
    diverging = is_diverging(norms)
    running = np.maximum.accumulate(norms)
    arr = np.asarray(norms)
    return SweepReport(
        family=f"spin-{state} (closed form)",
        indices=list(range(1, vmax + 1)),
        norm_Hn_xi0=norms,
        cauchy_increment=[None] * vmax,
        limit_residual=None,
        weak_gap_max=None,
        strong_gap_minus1=None,
        running_sup=running.tolist(),
        sup=float(running[-1]),
        nondecreasing=bool(np.all(np.diff(arr) >= -tol)),
        nonincreasing=bool(np.all(np.diff(arr) <= tol)),
        diverging=diverging,
        tends_to_zero=tends_to_zero(norms, tol),
        hypotheses={"(iii) sup bounded": not diverging},
        tol=tol,
    )
