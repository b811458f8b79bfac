"""Single-step propagators for the dissipative dynamics.

* ``apply_exact_step``: adaptive integration of the master equation.
* ``superoperator_step``: dense exponential of the column-stacked
  superoperator (small dimensions only; used as an oracle).
* ``apply_strang_step``: ancilla-kick splitting channel.
* ``qdrift_step``: one randomly sampled jump per step.
"""
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, expm

from ..errors import ContractError, DomainError, IntegratorFailure
from .jumps import LindbladGenerator, kick_schedule, to_eigenbasis

TRACE_DRIFT_MAX = 1e-9
POSITIVITY_FLOOR = -1e-6

_LOGS = []


@contextmanager
def channel_hygiene():
    """Collect ``(where, trace_error, min_eigenvalue)`` for every step output.

    The trace error is measured before renormalization, so it reflects the
    propagator itself.
    """
    log = []
    _LOGS.append(log)
    try:
        yield log
    finally:
        _LOGS.remove(log)


def _record(where, raw_trace, min_eig):
    for log in _LOGS:
        log.append((where, abs(raw_trace - 1.0), float(min_eig)))


@dataclass(frozen=True)
class DensityState:
    rho: np.ndarray
    basis: object = None  # tag of the eigenbasis the matrix is expressed in

    def __post_init__(self):
        r = self.rho
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ContractError(f"density matrix must be square, got {r.shape}")

    @classmethod
    def pure(cls, psi, basis=None):
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), basis)

    @classmethod
    def basis_state(cls, j, dim, basis=None):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1.0
        return cls.pure(e, basis)

    @property
    def dim(self):
        return self.rho.shape[0]

    def populations(self):
        return np.real(np.diag(self.rho)).copy()

    def check(self, herm_tol=1e-10, trace_tol=1e-10, pos_tol=1e-8):
        r = self.rho
        herm = np.max(np.abs(r - r.conj().T))
        tr = abs(np.trace(r) - 1.0)
        mn = np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0]
        if herm > herm_tol or tr > trace_tol or mn < -pos_tol:
            raise ContractError(f"invalid density matrix: herm {herm:.1e}, trace {tr:.1e}, min eig {mn:.1e}")
        return True


def _finalize(rho, basis, where):
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_DRIFT_MAX:
        raise IntegratorFailure(f"{where}: trace drifted to {tr:.12f}")
    rho = rho / tr
    mn = np.linalg.eigvalsh(rho)[0]
    _record(where, tr, mn)
    if mn < POSITIVITY_FLOOR:
        raise IntegratorFailure(f"{where}: positivity lost (min eigenvalue {mn:.2e})")
    return DensityState(rho, basis)


def apply_exact_step(state, gen, tau, rtol=1e-12, atol=1e-14):
    """rho -> exp(tau L) rho by DOP853 with tight tolerances."""
    if tau < 0:
        raise DomainError("tau must be non-negative")
    if state.dim != gen.dim:
        raise ContractError("state and generator dimensions differ")
    if tau == 0:
        return DensityState(state.rho.copy(), state.basis)
    D = state.dim

    def rhs(_, y):
        return gen.apply(y.reshape(D, D)).ravel()

    sol = solve_ivp(rhs, (0.0, tau), state.rho.astype(complex).ravel(), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=[tau])
    if not sol.success:
        raise IntegratorFailure(f"adaptive integration failed: {sol.message}")
    return _finalize(sol.y[:, -1].reshape(D, D), state.basis, "exact step")


def lindblad_superoperator(Ks):
    """Column-stacking superoperator: vec(A X B) = (B^T kron A) vec(X)."""
    Ks = [np.asarray(K) for K in Ks]
    D = Ks[0].shape[0]
    I = np.eye(D)
    L = np.zeros((D * D, D * D), dtype=complex)
    for K in Ks:
        KdK = K.conj().T @ K
        L += np.kron(K.conj(), K) - 0.5 * np.kron(I, KdK) - 0.5 * np.kron(KdK.T, I)
    return L


def superoperator_step(state, gen_or_Ks, tau, max_dim=16):
    Ks = gen_or_Ks.Ks if isinstance(gen_or_Ks, LindbladGenerator) else gen_or_Ks
    D = state.dim
    if D > max_dim:
        raise DomainError(f"superoperator oracle limited to dim <= {max_dim}")
    v = expm(tau * lindblad_superoperator(Ks)) @ state.rho.reshape(-1, order="F")
    rho = v.reshape(D, D, order="F")
    if _LOGS:
        _record("superoperator step", np.trace(rho).real, np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return DensityState(rho, state.basis)


def square_wave_jump(A_eig, energies, spec):
    """K_SW = sum_k c_k A(-kT) evaluated mode by mode in the eigenbasis."""
    W = energies[:, None] - energies[None, :]
    K = np.zeros_like(A_eig, dtype=complex)
    for kick in kick_schedule(spec, 1.0):
        K += kick.c_k * np.exp(1j * W * kick.k * spec.period_time) * A_eig
    return K


def strang_unitary_column(A_eig, energies, spec, tau):
    """First block column of W(sqrt(tau)), shape (2D, D).

    Each kick exp(-i (sqrt(tau)/2) h_k) with h_k = (conj(c)|0><1| + c|1><0|) (x) A_k
    is applied in closed form from one eigendecomposition of A:
    exp(-i x m (x) A_k) = I (x) cos(x|c| A_k) - i (m/|c|) (x) sin(x|c| A_k),
    where A_k = P_k A P_k^dag and P_k = diag(exp(i E k T)).
    """
    D = len(energies)
    a, Wv = eigh(A_eig)
    x = np.sqrt(tau) / 2
    kicks = kick_schedule(spec, tau)
    Tp = spec.period_time

    def kick(col, kk):
        c = kk.c_k
        r = abs(c)
        P = np.exp(1j * energies * kk.k * Tp)
        cosA = (Wv * np.cos(x * r * a)) @ Wv.conj().T
        sinA = (Wv * np.sin(x * r * a)) @ Wv.conj().T
        cosK = (P[:, None] * cosA) * P.conj()[None, :]
        sinK = (P[:, None] * sinA) * P.conj()[None, :]
        top, bot = col[:D], col[D:]
        # m/|c| = [[0, conj(c)/|c|], [c/|c|, 0]]
        new_top = cosK @ top - 1j * (np.conj(c) / r) * (sinK @ bot)
        new_bot = cosK @ bot - 1j * (c / r) * (sinK @ top)
        return np.vstack([new_top, new_bot])

    col = np.vstack([np.eye(D, dtype=complex), np.zeros((D, D), dtype=complex)])
    order = kicks + kicks[::-1]
    for kk in reversed(order):  # rightmost factor acts first
        col = kick(col, kk)
    return col


def apply_strang_step(state, A, eig, spec, tau, in_eigenbasis=False):
    """Ancilla-traced splitting channel for one hermitian source operator A.

    ``A`` is given in the determinant basis unless ``in_eigenbasis``.
    """
    if spec.kind != "square":
        raise DomainError("the splitting channel needs a square-wave filter")
    if tau <= 0:
        raise DomainError("tau must be positive")
    A_eig = np.asarray(getattr(A, "entries", A)) if in_eigenbasis else to_eigenbasis(A, eig)
    col = strang_unitary_column(A_eig, eig.energies, spec, tau)
    D = state.dim
    U0, U1 = col[:D], col[D:]
    rho = U0 @ state.rho @ U0.conj().T + U1 @ state.rho @ U1.conj().T
    return _finalize(rho, state.basis, "splitting step")


class CounterStream:
    """Reproducible uniform draws indexed by (seed, counter)."""

    def __init__(self, seed):
        self.seed = int(seed)

    def uniform(self, counter, size=None):
        ss = np.random.SeedSequence([self.seed, int(counter)])
        return np.random.default_rng(ss).random(size)


def _sample(weights, u):
    return int(min(np.searchsorted(np.cumsum(weights), u, side="right"), len(weights) - 1))


def check_weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise DomainError("qDRIFT weights must be positive and sum to 1")
    return w


def qdrift_step(state, gen, tau, seed, counter=0, weights=None, rescale=False):
    """Apply exp(tau L_a) for one jump a drawn from ``weights``.

    With ``rescale=True`` the sampled generator is L_a / mu_a, so the
    averaged channel tracks exp(tau L) of the full generator; otherwise it
    tracks exp(tau sum_a mu_a L_a).

    Returns ``(state, a)``.
    """
    n = len(gen.jumps)
    if n == 0:
        raise ContractError("empty jump set")
    w = check_weights(np.full(n, 1.0 / n) if weights is None else weights, n)
    a = _sample(w, CounterStream(seed).uniform(counter))
    if tau == 0:
        return DensityState(state.rho.copy(), state.basis), a
    t = tau / w[a] if rescale else tau
    return apply_exact_step(state, gen.subset(a), t), a
