"""Frequency filters that keep cooling (negative Bohr frequency) transitions.

Three families are provided:

* ``ideal``: the one-sided step, 1 for omega < 0 and 0 otherwise.
* ``square``: the Dirichlet partial sum of the periodized step with period
  Omega and modes k = -N..N.
* ``gevrey``: a time-truncated step (support [-T_G, T_G]) averaged over a
  Gevrey-class bump on the band [-w, 0]. Smoothness of the bump makes the
  leakage fall faster than any power of T_G.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre, sici

from ..errors import DomainError, FrequencyRangeError


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "ideal"  # ideal | square | gevrey
    n_omega: int = 100
    omega_period: float = 4.0
    alpha: float = 1.5
    width: float = 100.0  # T_G, 1/hartree
    m_s: int = 64
    band: float = 0.1  # bump support [-band, 0], hartree
    c_gevrey: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ideal", "square", "gevrey"):
            raise DomainError(f"unknown filter kind {self.kind!r}")
        if self.n_omega < 1:
            raise DomainError("n_omega must be >= 1")
        if self.omega_period <= 0:
            raise DomainError("omega_period must be positive")
        if self.alpha <= 1:
            raise DomainError("Gevrey exponent alpha must exceed 1")
        if self.m_s < 3:
            raise DomainError("m_s must be >= 3")
        if self.width <= 0 or self.band <= 0:
            raise DomainError("width and band must be positive")

    @property
    def period_time(self):
        """T = 2 pi / Omega, the time shift between neighbouring modes."""
        return 2.0 * np.pi / self.omega_period

    @property
    def support(self):
        """Total one-sided time support: T_N = (N + 1/2) T for square waves, T_G for Gevrey."""
        if self.kind == "square":
            return (self.n_omega + 0.5) * self.period_time
        if self.kind == "gevrey":
            return self.width
        return np.inf


def filter_fourier_coeffs(n_omega, omega_period, n_quad=None):
    """Fourier coefficients c_k, k = -N..N, of the periodized one-sided step.

    c_k = (1/Omega) int_{-Omega/2}^{0} exp(-2 pi i k w / Omega) dw, evaluated
    with Gauss-Legendre quadrature on the half period. Exact symmetries are
    then imposed (c_0 real, c_k purely imaginary for k != 0).
    """
    if n_omega < 0 or omega_period <= 0:
        raise DomainError("need n_omega >= 0 and omega_period > 0")
    n_quad = n_quad or max(64, 2 * n_omega + 64)
    x, w = roots_legendre(n_quad)
    # map [-1, 1] -> phase theta in [-pi, 0]; dw / Omega = dtheta / (2 pi)
    theta = 0.5 * np.pi * (x - 1.0)
    wt = 0.5 * np.pi * w / (2.0 * np.pi)
    k = np.arange(-n_omega, n_omega + 1)
    c = np.exp(-1j * np.outer(k, theta)) @ wt
    c = np.where(k == 0, c.real + 0j, 1j * c.imag)
    return k, c


def square_wave_coeff_exact(k):
    """Closed form of the step coefficients, used as an independent check."""
    k = np.asarray(k)
    out = np.zeros(k.shape, dtype=complex)
    out[k == 0] = 0.5
    odd = k % 2 == 1
    out[odd] = 1j / (np.pi * k[odd])
    return out


_coeff_cache = {}


def _coeffs(spec):
    key = (spec.n_omega, spec.omega_period)
    if key not in _coeff_cache:
        _coeff_cache[key] = filter_fourier_coeffs(*key)
    return _coeff_cache[key]


def _bump(x, alpha):
    """Unnormalized Gevrey-class bump on (0, 1)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    t = x[inside] * (1.0 - x[inside])
    out[inside] = np.exp(-(t ** (-1.0 / (alpha - 1.0))))
    return out


def _gevrey_nodes(spec):
    x, w = roots_legendre(spec.m_s)
    u = 0.5 * (x + 1.0)
    phi = _bump(u, spec.alpha) * 0.5 * w
    phi = phi / phi.sum()
    return -spec.band * u, phi  # nodes nu in [-band, 0], weights sum to 1


def truncated_step(omega, T):
    """Response of the one-sided step with its kernel cut to |t| <= T: 1/2 - Si(omega T)/pi."""
    si, _ = sici(np.asarray(omega, dtype=float) * T)
    return 0.5 - si / np.pi


def filter_response(spec, omega, check_alias=True):
    """Complex response f(omega) of a filter, vectorized over ``omega``."""
    omega = np.asarray(omega, dtype=float)
    if spec.kind == "ideal":
        return (omega < 0).astype(complex)
    if spec.kind == "square":
        if check_alias and np.any(np.abs(omega) >= spec.omega_period / 2):
            raise FrequencyRangeError(
                f"|omega| reaches {np.max(np.abs(omega)):.4g} >= Omega/2 = {spec.omega_period / 2:.4g}; "
                "choose Omega >= 4 ||H||"
            )
        k, c = _coeffs(spec)
        phase = np.exp(1j * spec.period_time * np.multiply.outer(omega, k))
        return phase @ c
    nu, phi = _gevrey_nodes(spec)
    vals = truncated_step(np.subtract.outer(omega, nu), spec.width)
    return (vals @ phi).astype(complex)


def dirichlet_envelope(delta, T):
    """sup_{omega >= delta} |f_T(omega)| <= 2 / (pi delta T)."""
    return 2.0 / (np.pi * delta * T)


def time_support(spec, delta, eps_leak, dt=None):
    """Time support needed for leakage ``eps_leak`` at gap ``delta``.

    Returns ``(T, n_samples)``; ``n_samples`` is T/dt (None without dt).
    """
    if delta <= 0:
        raise DomainError("gap must be positive")
    if not 0 < eps_leak < 1:
        raise DomainError("eps_leak must lie in (0, 1)")
    if spec.kind == "square":
        T = 2.0 / (np.pi * delta * eps_leak)
    elif spec.kind == "gevrey":
        T = spec.c_gevrey / delta * np.log(1.0 / eps_leak) ** spec.alpha
    else:
        T = 0.0
    return T, (None if dt is None else T / dt)
