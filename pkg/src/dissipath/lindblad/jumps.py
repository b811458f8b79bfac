"""Filtered jump operators and purely dissipative generators."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, FrequencyRangeError, ShapeError
from .filters import FilterSpec, filter_response


@dataclass(frozen=True)
class FilteredJump:
    K: np.ndarray  # energy eigenbasis
    leakage: float
    source: tuple = None
    spec: FilterSpec = None
    excited_leakage: float = None


@dataclass(frozen=True)
class KickSpec:
    k: int
    c_k: complex
    axis: str
    theta: float
    phi: float


def bohr_frequencies(energies, zero_tol=1e-10):
    """omega_jk = E_j - E_k, with numerically degenerate pairs snapped to 0."""
    E = np.asarray(energies, dtype=float)
    W = E[:, None] - E[None, :]
    scale = max(1.0, float(np.max(np.abs(E)))) if E.size else 1.0
    W[np.abs(W) <= zero_tol * scale] = 0.0
    return W


def to_eigenbasis(A, eig):
    M = A.entries if hasattr(A, "entries") else np.asarray(A)
    if M.shape != (eig.dim, eig.dim):
        raise ShapeError(f"operator shape {M.shape} does not match eigensystem dim {eig.dim}")
    V = eig.vectors
    return V.conj().T @ M @ V


def build_filtered_jump(A, eig, spec, source=None, scale=1.0):
    """K_jk = f(E_j - E_k) (V^dag A V)_jk.

    ``leakage`` is ||K|E0>||. ``excited_leakage`` drops the diagonal
    ground component, i.e. ||(1 - |E0><E0|) K |E0>||, which is the part
    that actually moves population out of the ground state.
    """
    if hasattr(A, "hermitian") and not A.hermitian:
        raise ContractError("jump source must be hermitian")
    Ae = to_eigenbasis(A, eig) * scale
    W = bohr_frequencies(eig.energies)
    if spec.kind == "square" and np.max(np.abs(W)) >= spec.omega_period / 2:
        raise FrequencyRangeError(
            f"spectral width {np.max(np.abs(W)):.4g} >= Omega/2 = {spec.omega_period / 2:.4g}; "
            "choose Omega >= 4 ||H||"
        )
    F = filter_response(spec, W.ravel()).reshape(W.shape)
    K = F * Ae
    col = K[:, 0]
    return FilteredJump(
        K=K,
        leakage=float(np.linalg.norm(col)),
        source=source,
        spec=spec,
        excited_leakage=float(np.linalg.norm(col[1:])),
    )


@dataclass
class LindbladGenerator:
    """Purely dissipative generator L(rho) = sum_a K_a rho K_a^dag - 1/2 {K_a^dag K_a, rho}."""

    jumps: list
    eig: object
    coherent_term_included: bool = field(default=False, init=False)

    def __post_init__(self):
        if not self.jumps:
            raise ContractError("generator needs at least one jump")
        D = self.eig.dim
        for j in self.jumps:
            if j.K.shape != (D, D):
                raise ShapeError("all jumps must live in the generator's eigenbasis")
        self.Ks = np.stack([j.K for j in self.jumps])
        self.G = np.einsum("aji,ajk->ik", self.Ks.conj(), self.Ks)
        # When every K_a is a real matrix times a phase (real eigenvectors,
        # real filter), the dissipator only needs the real matrices B_a.
        self._real = None
        B = []
        for K in self.Ks:
            i = np.argmax(np.abs(K))
            ph = K.flat[i] / abs(K.flat[i]) if abs(K.flat[i]) > 0 else 1.0
            Bk = K / ph
            if np.max(np.abs(Bk.imag)) > 1e-14 * max(1.0, np.max(np.abs(Bk))):
                break
            B.append(Bk.real)
        else:
            self._real = np.stack(B)
        n = len(self.jumps)
        src = self.Ks if self._real is None else self._real
        # stacked layouts so each evaluation is two large matrix products
        self._Kcat = src.reshape(n * D, D)
        self._Kwide = src.transpose(1, 0, 2).reshape(D, n * D)

    @property
    def dim(self):
        return self.eig.dim

    def _jump_term(self, X):
        D, n = X.shape[0], len(self.jumps)
        Y = (self._Kcat @ X).reshape(n, D, D).transpose(1, 0, 2).reshape(D, n * D)
        return Y @ self._Kwide.conj().T

    def apply(self, rho):
        if self._real is not None:
            jump = self._jump_term(np.ascontiguousarray(rho.real)) + 1j * self._jump_term(np.ascontiguousarray(rho.imag))
        else:
            jump = self._jump_term(rho)
        return jump - 0.5 * (self.G @ rho + rho @ self.G)

    def subset(self, idx):
        return LindbladGenerator([self.jumps[i] for i in np.atleast_1d(idx)], self.eig)

    def strength(self):
        """lambda = sum_a (2 ||K_a||^2 + ||K_a^dag K_a||) in spectral norms."""
        tot = 0.0
        for K in self.Ks:
            nk = np.linalg.norm(K, 2)
            tot += 2 * nk**2 + np.linalg.norm(K.conj().T @ K, 2)
        return float(tot)


def kick_schedule(spec, tau):
    """Per-mode kicks for the ancilla splitting: axis X for k=0, Y otherwise."""
    from .filters import filter_fourier_coeffs

    ks, cs = filter_fourier_coeffs(spec.n_omega, spec.omega_period)
    out = []
    for k, c in zip(ks, cs):
        if abs(c) < 1e-15:
            continue
        axis = "X" if k == 0 else "Y"
        # signed phase: c = |c| e^{i phi}, phi in {0, +-pi/2}
        phi = 0.0 if k == 0 else float(np.sign(c.imag)) * np.pi / 2
        out.append(KickSpec(int(k), complex(c), axis, float(np.sqrt(tau) * abs(c) / 2), phi))
    return out
