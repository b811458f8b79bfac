"""Closed-shell Roothaan SCF with DIIS and an adaptive level shift."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from ..errors import UnsupportedSpinError, InputError


@dataclass(frozen=True)
class ScfResult:
    C: np.ndarray
    eps: np.ndarray
    e_hf: float
    converged: bool
    n_occ: int
    n_iter: int = 0
    density: np.ndarray = None


def lowdin(S):
    w, U = eigh(S)
    if w[0] <= 0:
        raise InputError("overlap matrix is not positive definite")
    return (U / np.sqrt(w)) @ U.T


def _fock(hcore, eri, D):
    J = np.einsum("mnls,ls->mn", eri, D, optimize=True)
    K = np.einsum("mlns,ls->mn", eri, D, optimize=True)
    return hcore + J - 0.5 * K


def _diis_extrapolate(focks, errors):
    n = len(focks)
    B = -np.ones((n + 1, n + 1))
    B[n, n] = 0.0
    for i in range(n):
        for j in range(i + 1):
            B[i, j] = B[j, i] = np.vdot(errors[i], errors[j]).real
    rhs = np.zeros(n + 1)
    rhs[n] = -1.0
    try:
        coef = np.linalg.solve(B, rhs)[:n]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(c * F for c, F in zip(coef, focks))


def _semicanonical(F, C, n_occ):
    """Diagonalize F separately in the occupied and virtual blocks."""
    blocks = []
    eps = []
    for sl in (slice(0, n_occ), slice(n_occ, C.shape[1])):
        Cb = C[:, sl]
        if Cb.shape[1] == 0:
            continue
        e, U = eigh(Cb.T @ F @ Cb)
        blocks.append(Cb @ U)
        eps.append(e)
    return np.hstack(blocks), np.concatenate(eps)


def run_rhf(
    ints,
    n_electrons,
    guess_density=None,
    max_iter=200,
    diis_space=8,
    level_shift=0.2,
    shift_gap=0.05,
    e_tol=1e-10,
    d_tol=1e-9,
):
    """Restricted Hartree-Fock.

    Parameters
    ----------
    ints : IntegralSet
    n_electrons : int
        Even electron count.
    guess_density : ndarray, optional
        AO density (trace with S equal to ``n_electrons``) used instead of
        the core-Hamiltonian guess. Handy for continuation along a path.
    level_shift : float
        Virtual-space shift applied whenever the current HOMO-LUMO gap is
        below ``shift_gap``. Set to 0 to disable.
    """
    if n_electrons % 2:
        raise UnsupportedSpinError(f"restricted closed-shell SCF needs an even electron count, got {n_electrons}")
    n_ao = ints.n_ao
    if not 0 <= n_electrons <= 2 * n_ao:
        raise InputError(f"n_electrons={n_electrons} outside [0, {2 * n_ao}]")
    n_occ = n_electrons // 2
    S, hcore, eri = ints.S, ints.hcore, ints.eri
    X = lowdin(S)

    def diagonalize(F):
        e, Cp = eigh(X.T @ F @ X)
        return e, X @ Cp

    if n_occ == 0:
        eps, C = diagonalize(hcore)
        return ScfResult(C, eps, ints.e_nuc, True, 0, 0, np.zeros_like(S))

    if guess_density is None:
        _, C = diagonalize(hcore)
        D = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    else:
        D = np.array(guess_density, dtype=float)

    focks, errs = [], []
    e_old = None
    best = None
    converged = False
    for it in range(1, max_iter + 1):
        F = _fock(hcore, eri, D)
        e_tot = 0.5 * np.sum(D * (hcore + F)) + ints.e_nuc
        err = X.T @ (F @ D @ S - S @ D @ F) @ X
        err_norm = np.linalg.norm(err)
        if best is None or err_norm < best[0]:
            best = (err_norm, D, e_tot, F)

        focks.append(F)
        errs.append(err)
        if len(focks) > diis_space:
            focks.pop(0)
            errs.pop(0)
        F_use = _diis_extrapolate(focks, errs) if len(focks) > 1 else F

        e_cur, _ = diagonalize(F_use)
        if level_shift > 0 and n_occ < n_ao and e_cur[n_occ] - e_cur[n_occ - 1] < shift_gap:
            # raise the virtual space of the current density
            F_use = F_use + level_shift * (S - 0.5 * S @ D @ S)
        _, C = diagonalize(F_use)
        D_new = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T

        dD = np.max(np.abs(D_new - D))
        dE = abs(e_tot - e_old) if e_old is not None else np.inf
        D, e_old = D_new, e_tot
        if dD <= d_tol and dE <= e_tol:
            converged = True
            break

    if not converged:
        _, D, _, _ = best
    F = _fock(hcore, eri, D)
    e_tot = 0.5 * np.sum(D * (hcore + F)) + ints.e_nuc
    # recover orbitals spanning D's occupied space, then semicanonicalize
    w, V = eigh(X.T @ S @ D @ S @ X)
    Cocc = X @ V[:, ::-1][:, :n_occ]
    Cvir = X @ V[:, ::-1][:, n_occ:]
    C, eps = _semicanonical(F, np.hstack([Cocc, Cvir]), n_occ)
    return ScfResult(C, eps, float(e_tot), converged, n_occ, it, D)
