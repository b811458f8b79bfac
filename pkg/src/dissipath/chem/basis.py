"""Bundled STO-3G basis for hydrogen (s shells only)."""
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..errors import InputError, UnsupportedElementError


@dataclass(frozen=True)
class Shell:
    center: int
    exponents: np.ndarray  # 1/bohr^2
    coefficients: np.ndarray  # include primitive normalization


@dataclass(frozen=True)
class AOBasis:
    shells: tuple

    @property
    def n_ao(self):
        return len(self.shells)

    def primitives(self):
        """Flattened primitive data: (ao index, center index, exponent, coefficient)."""
        ao, cen, exps, coefs = [], [], [], []
        for i, sh in enumerate(self.shells):
            for a, c in zip(sh.exponents, sh.coefficients):
                ao.append(i)
                cen.append(sh.center)
                exps.append(a)
                coefs.append(c)
        return np.array(ao), np.array(cen), np.array(exps, dtype=float), np.array(coefs, dtype=float)


def _load_sto3g_h():
    text = resources.files("dissipath.chem").joinpath("data/sto3g_h.json").read_text()
    data = json.loads(text)
    return np.array(data["exponents"], dtype=float), np.array(data["coefficients"], dtype=float)


def normalized_contraction(exponents, coefficients):
    """Fold primitive normalization into ``coefficients`` and renormalize the contraction."""
    exponents = np.asarray(exponents, dtype=float)
    c = np.asarray(coefficients, dtype=float) * (2.0 * exponents / np.pi) ** 0.75
    p = exponents[:, None] + exponents[None, :]
    self_overlap = c @ ((np.pi / p) ** 1.5) @ c
    return c / np.sqrt(self_overlap)


def build_sto3g_basis(geometry):
    if not geometry.atoms:
        raise InputError("empty geometry")
    for atom in geometry.atoms:
        if atom.charge != 1:
            raise UnsupportedElementError(atom.symbol)
    exps, coefs = _load_sto3g_h()
    c = normalized_contraction(exps, coefs)
    return AOBasis(tuple(Shell(i, exps.copy(), c.copy()) for i in range(len(geometry.atoms))))
