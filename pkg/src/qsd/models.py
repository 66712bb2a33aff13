"""Truncated free-boson model and the all-to-all (mean-field) spin model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import RiggedTriplet, adjoint
from .errors import DimensionCapError, InvalidDimensionError

BOSON_DIM_CAP = 4096
SPIN_TENSOR_CAP = 12


def ladder(n_max: int) -> np.ndarray:
    """Annihilation operator on span{|0>, ..., |n_max>}: a|k> = sqrt(k)|k-1>."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


@dataclass(frozen=True, eq=False)
class BosonModel:
    n_modes: int
    n_max: int
    a_ops: tuple
    adag_ops: tuple
    H: np.ndarray
    occupations: np.ndarray  # (dim, n_modes) occupation numbers of each basis state

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def numbers(self) -> np.ndarray:
        """Total boson number of every basis state."""
        return self.occupations.sum(axis=1)

    @property
    def S(self) -> np.ndarray:
        return np.diag((self.numbers + 1).astype(complex))

    def triplet(self) -> RiggedTriplet:
        return RiggedTriplet(self.numbers + 1.0)

    def number_state(self, occupation: int | Sequence[int]) -> np.ndarray:
        """Basis vector with the given occupations; an integer M means M bosons in mode 1."""
        if np.isscalar(occupation):
            occ = [int(occupation)] + [0] * (self.n_modes - 1)
        else:
            occ = [int(v) for v in occupation]
        if len(occ) != self.n_modes or min(occ) < 0 or max(occ) > self.n_max:
            raise ValueError(f"occupation {occ} outside the truncated space")
        idx = 0
        for v in occ:
            idx = idx * (self.n_max + 1) + v
        e = np.zeros(self.dim, dtype=complex)
        e[idx] = 1.0
        return e

    def ccr_defect(self) -> list[np.ndarray]:
        """``[a_i, a_i^dag] - 1`` per mode; nonzero only where mode i sits at n_max."""
        eye = np.eye(self.dim)
        return [a @ ad - ad @ a - eye for a, ad in zip(self.a_ops, self.adag_ops)]

    def ccr_report(self) -> dict:
        defects = self.ccr_defect()
        top_mask = [self.occupations[:, i] == self.n_max for i in range(self.n_modes)]
        off_top = max(float(np.abs(D[~m][:, ~m]).max(initial=0.0)) for D, m in zip(defects, top_mask))
        on_top = max(float(np.abs(np.diag(D)[m]).max(initial=0.0)) for D, m in zip(defects, top_mask))
        cross = 0.0
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                if i != j:
                    a, ad = self.a_ops[i], self.adag_ops[j]
                    cross = max(cross, float(np.abs(a @ ad - ad @ a).max()))
        return {"off_top_level": off_top, "top_level": on_top, "cross_mode": cross}


def build_boson_model(n_modes: int, n_max: int, cap: int = BOSON_DIM_CAP) -> BosonModel:
    if n_modes < 1 or n_max < 1:
        raise InvalidDimensionError("n_modes and n_max must be >= 1")
    dim = (n_max + 1) ** n_modes
    if dim > cap:
        raise DimensionCapError(f"(n_max+1)^n_modes = {dim} exceeds cap {cap}")
    a1 = ladder(n_max)
    eye1 = np.eye(n_max + 1)
    a_ops, adag_ops = [], []
    for i in range(n_modes):
        op = np.array([[1.0]], dtype=complex)
        for j in range(n_modes):
            op = np.kron(op, a1 if i == j else eye1)
        a_ops.append(op)
        adag_ops.append(adjoint(op))
    occ = np.array(np.unravel_index(np.arange(dim), (n_max + 1,) * n_modes)).T
    H = np.diag(occ.sum(axis=1).astype(complex))
    return BosonModel(n_modes, n_max, tuple(a_ops), tuple(adag_ops), H, occ)


def number_projection(m: BosonModel, L: int) -> np.ndarray:
    return np.diag((m.numbers <= L).astype(complex))


def boson_cutoff(m: BosonModel, L: int) -> np.ndarray:
    """``Q_L H Q_L`` with ``Q_L`` the projection on total number <= L."""
    if L < 0:
        raise ValueError("cutoff L must be >= 0")
    keep = (m.numbers <= L).astype(float)
    return np.diag(keep * m.numbers).astype(complex)


# ---------------------------------------------------------------------------
# spins

UP, DOWN = 1, -1
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_UP = np.array([1.0, 0.0])
_DOWN = np.array([0.0, 1.0])


def up_pattern(volume: int) -> np.ndarray:
    return np.ones(volume, dtype=int)


def alternating_pattern(volume: int) -> np.ndarray:
    """down, up, down, ... starting at site 1."""
    return np.where(np.arange(volume) % 2 == 0, DOWN, UP)


def spin_local_perturbation(pattern, flips: Iterable[int]) -> np.ndarray:
    """Flip the spins at the listed 0-based sites."""
    out = np.array(pattern, dtype=int, copy=True)
    flips = list(flips)
    if any(k < 0 or k >= out.size for k in flips):
        raise IndexError(f"flip sites {flips} outside 0..{out.size - 1}")
    out[flips] *= -1
    return out


def closed_form_eigenvalue(pattern) -> float:
    """H_V eigenvalue of a product state: (sum of spins)^2 / |V|."""
    s = np.asarray(pattern)
    return float(int(s.sum()) ** 2) / s.size


def sigma3_site(volume: int, site: int) -> sp.csr_matrix:
    op = sp.identity(1, format="csr")
    for k in range(volume):
        op = sp.kron(op, _SZ if k == site else sp.identity(2), format="csr")
    return op


def product_state(pattern) -> np.ndarray:
    v = np.array([1.0])
    for s in pattern:
        v = np.kron(v, _UP if s == UP else _DOWN)
    return v.astype(complex)


@dataclass(frozen=True, eq=False)
class SpinModel:
    """``H_V = (1/|V|) sum_{i,j} s3^i s3^j`` in tensor or closed (magnetization) form."""

    volume: int
    representation: str
    sigma3: tuple = ()
    sigma3_V: sp.csr_matrix | None = None
    H_V: sp.csr_matrix | None = None

    def eigenvalue(self, pattern) -> float:
        pattern = np.asarray(pattern)
        if pattern.size != self.volume:
            raise ValueError(f"pattern has {pattern.size} sites, model {self.volume}")
        if self.representation == "closed":
            return closed_form_eigenvalue(pattern)
        psi = product_state(pattern)
        return float(np.vdot(psi, self.H_V @ psi).real)

    def apply(self, pattern):
        """``H_V`` on a product state: (eigenvalue, pattern) in closed form, a vector in tensor form."""
        if self.representation == "closed":
            return closed_form_eigenvalue(pattern), np.asarray(pattern)
        return self.H_V @ product_state(pattern)

    def magnetization_norm(self, pattern) -> float:
        """``||sigma3_V Phi||`` for the normalized product state Phi."""
        if self.representation == "closed":
            return abs(int(np.sum(pattern))) / self.volume
        return float(np.linalg.norm(self.sigma3_V @ product_state(pattern)))


def build_spin_model(volume: int, representation: str = "tensor", cap: int = SPIN_TENSOR_CAP) -> SpinModel:
    if volume < 1:
        raise InvalidDimensionError("volume must be >= 1")
    if representation == "closed":
        return SpinModel(volume, "closed")
    if representation != "tensor":
        raise ValueError(f"unknown representation {representation!r}")
    if volume > cap:
        raise DimensionCapError(f"tensor form limited to {cap} sites, got {volume}")
    sig = tuple(sigma3_site(volume, k) for k in range(volume))
    total = sig[0].copy()
    for s in sig[1:]:
        total = total + s
    sigma3_V = (total / volume).tocsr()
    H = (total @ total / volume).tocsr()
    return SpinModel(volume, "tensor", sig, sigma3_V, H)


def embedded_spin_hamiltonian(volume: int, total_sites: int) -> np.ndarray:
    """Diagonal of ``H_V`` (first ``volume`` sites) acting on ``total_sites`` spins."""
    states = np.arange(2 ** total_sites)
    spins = 1 - 2 * ((states[:, None] >> (total_sites - 1 - np.arange(total_sites))[None, :]) & 1)
    m = spins[:, :volume].sum(axis=1)
    return (m ** 2 / volume).astype(float)
