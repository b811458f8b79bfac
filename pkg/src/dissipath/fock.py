"""Determinant spaces and second-quantized operators as dense matrices.

Spin orbitals are ordered orbital-major with alpha before beta, so spin
orbital ``2*p + sigma`` holds spatial orbital ``p`` with spin ``sigma``
(0 = alpha, 1 = beta). Fermionic signs follow the parity of occupied
spin orbitals below the acted index.
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, IndexOrderError, ShapeError
from .kernels import excitation_table

MAX_SPIN_ORBITALS = 62


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        M = self.entries
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ShapeError(f"operator must be square, got {M.shape}")
        if self.hermitian:
            dev = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
            if dev > 1e-12:
                raise ShapeError(f"operator flagged hermitian but |M - M^dag| = {dev:.2e}")

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class DeterminantSpace:
    n_spin_orbitals: int
    n_electrons: int
    dets: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return len(self.dets)

    def index(self, det):
        """Position of bitmask ``det`` or -1 if absent (binary search)."""
        i = int(np.searchsorted(self.dets, det))
        return i if i < self.dim and self.dets[i] == det else -1

    @cached_property
    def _table(self):
        p, q, row, col, sign = excitation_table(self.dets, self.n_spin_orbitals)
        keep = row >= 0
        p, q, row, col, sign = p[keep], q[keep], row[keep], col[keep], sign[keep]
        key = p * self.n_spin_orbitals + q
        order = np.argsort(key, kind="stable")
        key, row, col, sign = key[order], row[order], col[order], sign[order]
        bounds = np.searchsorted(key, np.arange(self.n_spin_orbitals**2 + 1))
        return row, col, sign, bounds

    def hop(self, p, q):
        """Sparse matrix of a_p^dag a_q (spin-orbital indices)."""
        row, col, sign, bounds = self._table
        k = p * self.n_spin_orbitals + q
        lo, hi = bounds[k], bounds[k + 1]
        return sp.csr_matrix((sign[lo:hi], (row[lo:hi], col[lo:hi])), shape=(self.dim, self.dim))

    def spatial_excitation(self, p, q):
        """Sparse E_pq = sum_sigma a_{p sigma}^dag a_{q sigma}."""
        return self.hop(2 * p, 2 * q) + self.hop(2 * p + 1, 2 * q + 1)

    def occupations(self):
        """(D, n_so) 0/1 array of spin-orbital occupations."""
        bits = np.arange(self.n_spin_orbitals, dtype=np.int64)
        return ((self.dets[:, None] >> bits[None, :]) & 1).astype(np.int64)


def enumerate_determinants(n_spin_orbitals, n_electrons):
    if not 0 <= n_spin_orbitals <= MAX_SPIN_ORBITALS:
        raise DomainError(f"n_spin_orbitals must be in [0, {MAX_SPIN_ORBITALS}]")
    if not 0 <= n_electrons <= n_spin_orbitals:
        raise DomainError(f"n_electrons={n_electrons} must lie in [0, n_spin_orbitals={n_spin_orbitals}]")
    dets = [sum(1 << i for i in occ) for occ in combinations(range(n_spin_orbitals), n_electrons)]
    return DeterminantSpace(n_spin_orbitals, n_electrons, np.array(sorted(dets), dtype=np.int64))


def build_hamiltonian(mo, space):
    """Dense FCI Hamiltonian.

    Uses H = e_core + sum_pq h'_pq E_pq + 1/2 sum_pqrs (pq|rs) E_pq E_rs with
    h'_pq = h_pq - 1/2 sum_r (pr|rq).
    """
    n = mo.n_orb
    if space.n_spin_orbitals != 2 * n:
        raise ShapeError(f"space has {space.n_spin_orbitals} spin orbitals, integrals have {2 * n}")
    D = space.dim
    H = np.eye(D) * mo.e_core
    if space.n_electrons == 0:
        return OperatorMatrix(H.astype(complex), hermitian=True)
    E = [[space.spatial_excitation(p, q) for q in range(n)] for p in range(n)]
    hprime = mo.h - 0.5 * np.einsum("prrq->pq", mo.g)
    acc = sp.csr_matrix((D, D))
    for p in range(n):
        for q in range(n):
            G = sp.csr_matrix((D, D))
            for r in range(n):
                for s in range(n):
                    if mo.g[p, q, r, s] != 0.0:
                        G = G + mo.g[p, q, r, s] * E[r][s]
            acc = acc + hprime[p, q] * E[p][q] + 0.5 * (E[p][q] @ G)
    H = H + acc.toarray()
    H = 0.5 * (H + H.T)
    return OperatorMatrix(H.astype(complex), hermitian=True)


def build_bilinear(i, j, flavor, space):
    """Number-conserving hop: X = c_i^dag c_j + h.c., Y = i(c_i^dag c_j - c_j^dag c_i)."""
    if not i < j:
        raise IndexOrderError(f"bilinear needs i < j, got ({i}, {j})")
    if not 0 <= i < j < space.n_spin_orbitals:
        raise IndexOrderError(f"indices ({i}, {j}) outside 0..{space.n_spin_orbitals - 1}")
    fwd = space.hop(i, j).toarray()
    flavor = flavor.upper()
    if flavor == "X":
        M = fwd + fwd.T
    elif flavor == "Y":
        M = 1j * (fwd - fwd.T)
    else:
        raise DomainError(f"flavor must be 'X' or 'Y', got {flavor!r}")
    return OperatorMatrix(M.astype(complex), hermitian=True)


def bilinear_jump_set(space, pairs=None, flavors=("X", "Y")):
    """All (i, j, flavor) bilinears; default pairs are every i < j."""
    if pairs is None:
        pairs = list(combinations(range(space.n_spin_orbitals), 2))
    labels, ops = [], []
    for i, j in pairs:
        for fl in flavors:
            labels.append((int(i), int(j), fl))
            ops.append(build_bilinear(i, j, fl, space).entries)
    return labels, ops


def number_operator(space):
    occ = space.occupations()
    return OperatorMatrix(np.diag(occ.sum(axis=1)).astype(complex), hermitian=True)


def sz_operator(space):
    occ = space.occupations()
    sz = 0.5 * (occ[:, 0::2].sum(axis=1) - occ[:, 1::2].sum(axis=1))
    return OperatorMatrix(np.diag(sz).astype(complex), hermitian=True)


def s2_operator(space):
    """Total spin S^2 = S_- S_+ + S_z (S_z + 1)."""
    n = space.n_spin_orbitals // 2
    Sp = sum(space.hop(2 * p, 2 * p + 1) for p in range(n)) if n else sp.csr_matrix((space.dim, space.dim))
    sz = np.real(np.diag(sz_operator(space).entries))
    S2 = (Sp.T @ Sp).toarray() + np.diag(sz * (sz + 1))
    return OperatorMatrix(S2.astype(complex), hermitian=True)
