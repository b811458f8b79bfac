"""Hermitian eigendecomposition and spectrum-derived quantities."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, qr

from .errors import ContractError, ShapeError


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return len(self.energies)

    @property
    def ground(self):
        return self.vectors[:, 0]


@dataclass(frozen=True)
class GapInfo:
    delta: float
    delta_res: float
    eps_res: float
    k: int = 0


def spectral_norm(M):
    """Largest singular value."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _fix_phase(V):
    idx = np.argmax(np.abs(V) - 1e-12 * np.arange(V.shape[0])[:, None], axis=0)
    ph = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(ph) / ph)[None, :]


def _canonical_block(V):
    """Deterministic orthonormal basis for the span of V's columns."""
    m = V.shape[1]
    _, _, piv = qr(V.conj().T, pivoting=True, mode="economic")
    rows = np.sort(piv[:m])
    B = V @ np.linalg.inv(V[rows, :])
    Q, _ = np.linalg.qr(B)
    return Q


def eigendecompose(H, degeneracy_tol=1e-9):
    """Full eigendecomposition with deterministic phases and degenerate bases.

    ``H`` may be an :class:`~dissipath.fock.OperatorMatrix` (its hermitian
    flag must be set) or a plain array, which is checked for hermiticity.
    """
    if hasattr(H, "entries"):
        if not H.hermitian:
            raise ContractError("eigendecompose needs an operator flagged hermitian")
        M = H.entries
    else:
        M = np.asarray(H)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ShapeError(f"square matrix expected, got {M.shape}")
        if M.size and np.max(np.abs(M - M.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
            raise ContractError("matrix is not hermitian")
    E, V = eigh(M)
    V = V.astype(complex)
    scale = max(1.0, np.max(np.abs(E))) if E.size else 1.0
    start = 0
    while start < len(E):
        stop = start + 1
        while stop < len(E) and E[stop] - E[stop - 1] <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            V[:, start:stop] = _canonical_block(V[:, start:stop])
        start = stop
    return EigenSystem(np.asarray(E, dtype=float), _fix_phase(V))


def gaps(eig, eps_res=0.0):
    E = eig.energies
    if len(E) < 2:
        raise ShapeError("gaps need at least two levels")
    delta = float(E[1] - E[0])
    k = int(np.searchsorted(E, E[0] + eps_res, side="right") - 1)
    delta_res = float(E[k + 1] - (E[0] + eps_res)) if k + 1 < len(E) else np.inf
    return GapInfo(delta=delta, delta_res=delta_res, eps_res=float(eps_res), k=k)


def _check_pair(a, b):
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch {a.dim} vs {b.dim}")


def ground_overlap(eig_a, eig_b):
    """|<E0(a)|E0(b)>|^2."""
    _check_pair(eig_a, eig_b)
    return float(abs(np.vdot(eig_a.vectors[:, 0], eig_b.vectors[:, 0])) ** 2)


def low_energy_projector(eig, eps_res=0.0):
    k = gaps(eig, eps_res).k if eig.dim > 1 else 0
    V = eig.vectors[:, : k + 1]
    return V @ V.conj().T


def projector_distance(eig_a, eig_b, eps_res=0.0):
    _check_pair(eig_a, eig_b)
    return spectral_norm(low_energy_projector(eig_a, eps_res) - low_energy_projector(eig_b, eps_res))


def compute_ipr(state, tol=1e-10):
    """Inverse participation ratio in the determinant basis and N_eff = 1/IPR."""
    c = np.asarray(state)
    norm = np.vdot(c, c).real
    if abs(norm - 1.0) > tol:
        raise ContractError(f"state must be normalized (norm^2 = {norm:.12f})")
    ipr = float(np.sum(np.abs(c) ** 4))
    return ipr, 1.0 / ipr
