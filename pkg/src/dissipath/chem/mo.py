"""Transformation of AO integrals into a molecular-orbital basis."""
from dataclasses import dataclass

import numpy as np

from ..errors import GaugeError, ShapeError


@dataclass(frozen=True)
class MOIntegrals:
    h: np.ndarray
    g: np.ndarray  # chemist order (pq|rs)
    e_core: float

    @property
    def n_orb(self):
        return self.h.shape[0]

    def __post_init__(self):
        n = self.h.shape[0]
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n):
            raise ShapeError(f"inconsistent integral shapes {self.h.shape} and {self.g.shape}")
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.g)) and np.isfinite(self.e_core)):
            raise ShapeError("integrals contain non-finite entries")


def transform_to_mo(ints, C, tol=1e-6):
    C = np.asarray(C, dtype=float)
    dev = np.max(np.abs(C.T @ ints.S @ C - np.eye(C.shape[1]))) if C.size else 0.0
    if dev > tol:
        raise GaugeError(dev)
    h = C.T @ ints.hcore @ C
    g = np.einsum("mp,nq,lr,ks,mnlk->pqrs", C, C, C, C, ints.eri, optimize=True)
    return MOIntegrals(h=0.5 * (h + h.T), g=g, e_core=float(ints.e_nuc))
