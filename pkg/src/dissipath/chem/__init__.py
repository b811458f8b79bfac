"""Minimal-basis electronic structure for hydrogen clusters."""
from .basis import AOBasis, Shell, build_sto3g_basis
from .fcidump import read_fcidump, write_fcidump
from .geometry import ANGSTROM_TO_BOHR, Atom, Geometry, read_xyz, write_xyz
from .integrals import IntegralSet, boys_f0, compute_integrals, overlap_between
from .mo import MOIntegrals, transform_to_mo
from .scf import ScfResult, lowdin, run_rhf

__all__ = [
    "ANGSTROM_TO_BOHR", "AOBasis", "Atom", "Geometry", "IntegralSet", "MOIntegrals", "ScfResult", "Shell",
    "boys_f0", "build_sto3g_basis", "compute_integrals", "lowdin", "overlap_between", "read_fcidump",
    "read_xyz", "run_rhf", "transform_to_mo", "write_fcidump", "write_xyz",
]
