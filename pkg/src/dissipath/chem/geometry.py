"""Molecular geometries (positions in bohr) and XYZ file I/O."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError

ANGSTROM_TO_BOHR = 1.8897261254578281

_CHARGES = {"H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "Ne": 10}


@dataclass(frozen=True)
class Atom:
    symbol: str
    charge: int
    position: tuple  # bohr


@dataclass(frozen=True)
class Geometry:
    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise InputError("geometry needs at least one atom")
        for atom in self.atoms:
            if atom.charge < 1:
                raise InputError(f"nuclear charge must be >= 1, got {atom.charge} for {atom.symbol}")
            if len(atom.position) != 3 or not np.all(np.isfinite(atom.position)):
                raise InputError(f"non-finite position for {atom.symbol}")

    @classmethod
    def from_symbols(cls, symbols, coords, unit="bohr"):
        coords = np.asarray(coords, dtype=float).reshape(-1, 3)
        scale = ANGSTROM_TO_BOHR if unit.lower().startswith("ang") else 1.0
        atoms = []
        for sym, xyz in zip(symbols, coords):
            sym = sym.capitalize()
            if sym not in _CHARGES:
                raise InputError(f"unknown element symbol {sym!r}")
            atoms.append(Atom(sym, _CHARGES[sym], tuple(float(v) * scale for v in xyz)))
        return cls(tuple(atoms))

    @property
    def coords(self):
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def charges(self):
        return np.array([a.charge for a in self.atoms], dtype=float)

    @property
    def symbols(self):
        return [a.symbol for a in self.atoms]

    def transformed(self, rotation=None, shift=None):
        xyz = self.coords
        if rotation is not None:
            xyz = xyz @ np.asarray(rotation, dtype=float).T
        if shift is not None:
            xyz = xyz + np.asarray(shift, dtype=float)
        return Geometry.from_symbols(self.symbols, xyz)

    def nuclear_repulsion(self):
        from ..errors import SingularGeometryError

        xyz, Z = self.coords, self.charges
        e = 0.0
        for i in range(len(Z)):
            for j in range(i):
                r = np.linalg.norm(xyz[i] - xyz[j])
                if r < 1e-8:
                    raise SingularGeometryError(f"atoms {j} and {i} coincide; nuclear repulsion diverges")
                e += Z[i] * Z[j] / r
        return e


def read_xyz(path):
    """Read an XYZ file (ångström) into a :class:`Geometry`."""
    lines = Path(path).read_text().splitlines()
    try:
        n = int(lines[0].split()[0])
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: first line must hold the atom count") from exc
    symbols, coords = [], []
    for lineno, line in enumerate(lines[2 : 2 + n], start=3):
        parts = line.split()
        if len(parts) < 4:
            raise InputError(f"{path}:{lineno}: expected 'element x y z'")
        symbols.append(parts[0])
        try:
            coords.append([float(v) for v in parts[1:4]])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: non-numeric coordinate") from exc
    if len(symbols) != n:
        raise InputError(f"{path}: expected {n} atoms, found {len(symbols)}")
    return Geometry.from_symbols(symbols, coords, unit="angstrom")


def write_xyz(geometry, path, comment=""):
    xyz = geometry.coords / ANGSTROM_TO_BOHR
    rows = [str(len(geometry.atoms)), comment]
    rows += [f"{s:2s} {x: .12f} {y: .12f} {z: .12f}" for s, (x, y, z) in zip(geometry.symbols, xyz)]
    Path(path).write_text("\n".join(rows) + "\n")
