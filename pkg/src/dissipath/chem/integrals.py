"""Analytic integrals over contracted s-type Gaussians.

All primitive quantities are evaluated with broadcasting over primitive
tuples and then contracted to AOs with a (n_ao, n_prim) coefficient map.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from ..errors import InputError


@dataclass(frozen=True)
class IntegralSet:
    S: np.ndarray
    Tkin: np.ndarray
    Vnuc: np.ndarray
    eri: np.ndarray  # chemist order (mu nu|lam sig)
    e_nuc: float

    @property
    def hcore(self):
        return self.Tkin + self.Vnuc

    @property
    def n_ao(self):
        return self.S.shape[0]


_SERIES_CUT = 1e-3


def boys_f0(x):
    """Boys function F0(x) = int_0^1 exp(-x t^2) dt.

    Uses ``sqrt(pi/x) erf(sqrt x) / 2`` above a small cutoff and a Taylor
    series (six terms, relative error below 1e-20) below it.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _SERIES_CUT
    xs = x[small]
    # sum_k (-x)^k / (k! (2k+1))
    out[small] = 1.0 - xs / 3.0 + xs**2 / 10.0 - xs**3 / 42.0 + xs**4 / 216.0 - xs**5 / 1320.0
    xl = x[~small]
    rt = np.sqrt(xl)
    out[~small] = 0.5 * np.sqrt(np.pi) * erf(rt) / rt
    return out


def _contraction_map(basis):
    ao, cen, exps, coefs = basis.primitives()
    M = np.zeros((basis.n_ao, len(ao)))
    M[ao, np.arange(len(ao))] = coefs
    return M, cen, exps


def _check_centers(basis, geometry):
    n = len(geometry.atoms)
    for sh in basis.shells:
        if not 0 <= sh.center < n:
            raise InputError(f"shell center {sh.center} outside geometry with {n} atoms")


def _pair_data(ea, Ra, eb, Rb):
    p = ea[:, None] + eb[None, :]
    mu = ea[:, None] * eb[None, :] / p
    d2 = np.sum((Ra[:, None, :] - Rb[None, :, :]) ** 2, axis=-1)
    P = (ea[:, None, None] * Ra[:, None, :] + eb[None, :, None] * Rb[None, :, :]) / p[..., None]
    return p, mu, d2, P


def overlap_between(basis_a, geom_a, basis_b, geom_b):
    """AO overlap <chi_mu(geom_a)|chi_nu(geom_b)> for two (possibly different) geometries."""
    _check_centers(basis_a, geom_a)
    _check_centers(basis_b, geom_b)
    Ma, ca, ea = _contraction_map(basis_a)
    Mb, cb, eb = _contraction_map(basis_b)
    p, mu, d2, _ = _pair_data(ea, geom_a.coords[ca], eb, geom_b.coords[cb])
    Sp = (np.pi / p) ** 1.5 * np.exp(-mu * d2)
    return Ma @ Sp @ Mb.T


def compute_integrals(basis, geometry):
    _check_centers(basis, geometry)
    e_nuc = geometry.nuclear_repulsion()
    M, cen, exps = _contraction_map(basis)
    R = geometry.coords[cen]
    p, mu, d2, P = _pair_data(exps, R, exps, R)
    K = np.exp(-mu * d2)

    Sp = (np.pi / p) ** 1.5 * K
    Tp = mu * (3.0 - 2.0 * mu * d2) * Sp

    Vp = np.zeros_like(Sp)
    for Z, C in zip(geometry.charges, geometry.coords):
        pc2 = np.sum((P - C) ** 2, axis=-1)
        Vp -= Z * (2.0 * np.pi / p) * K * boys_f0(p * pc2)

    # (ab|cd) = 2 pi^(5/2) / (p q sqrt(p+q)) K_ab K_cd F0(rho |P-Q|^2)
    pp = p[:, :, None, None]
    qq = p[None, None, :, :]
    pq2 = np.sum((P[:, :, None, None, :] - P[None, None, :, :, :]) ** 2, axis=-1)
    rho = pp * qq / (pp + qq)
    Gp = (
        2.0 * np.pi**2.5 / (pp * qq * np.sqrt(pp + qq))
        * K[:, :, None, None] * K[None, None, :, :]
        * boys_f0(rho * pq2)
    )

    S = M @ Sp @ M.T
    T = M @ Tp @ M.T
    V = M @ Vp @ M.T
    eri = np.einsum("ia,jb,kc,ld,abcd->ijkl", M, M, M, M, Gp, optimize=True)
    sym = lambda A: 0.5 * (A + A.T)
    return IntegralSet(S=sym(S), Tkin=sym(T), Vnuc=sym(V), eri=eri, e_nuc=float(e_nuc))
