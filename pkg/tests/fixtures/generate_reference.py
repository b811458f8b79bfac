"""Regenerate ``pyscf_reference.json``.

Run once offline with PySCF available (it is not a runtime or test
dependency of the package)::

    PYTHONPATH=/path/to/pyscf python tests/fixtures/generate_reference.py
"""
import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, scf

ANGSTROM = 1.8897261254578281


def _fix_signs(C):
    C = C.copy()
    for k in range(C.shape[1]):
        j = np.argmax(np.abs(C[:, k]))
        if C[j, k] < 0:
            C[:, k] *= -1
    return C


def h2(r_bohr):
    mol = gto.M(atom=[("H", (0, 0, 0)), ("H", (0, 0, r_bohr))], unit="Bohr",
                basis="sto-3g", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    C = _fix_signs(mf.mo_coeff)
    h = C.T @ mf.get_hcore() @ C
    g = ao2mo.restore(1, ao2mo.full(mol, C), C.shape[1])
    e_fci, _ = fci.FCI(mf, C).kernel()
    return {
        "r_bohr": r_bohr,
        "S": mol.intor("int1e_ovlp").tolist(),
        "T": mol.intor("int1e_kin").tolist(),
        "V": mol.intor("int1e_nuc").tolist(),
        "eri": mol.intor("int2e").tolist(),
        "e_nuc": mol.energy_nuc(),
        "e_hf": mf.e_tot,
        "C": C.tolist(),
        "mo_h": h.tolist(),
        "mo_g": g.tolist(),
        "e_fci": e_fci,
    }


def h4(lam, a=1.2):
    X, Y = a / np.sqrt(lam), a * np.sqrt(lam)
    atoms = [("H", (sx * X / 2, sy * Y / 2, 0.0)) for sx in (1, -1) for sy in (1, -1)]
    mol = gto.M(atom=atoms, unit="Angstrom", basis="sto-3g", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    cis = fci.FCI(mf)
    cis.nroots = 4
    e, _ = cis.kernel()
    return {"lambda": lam, "a": a, "e_hf": mf.e_tot, "e_fci_singlets": list(e),
            "e_nuc": mol.energy_nuc()}


if __name__ == "__main__":
    out = {
        "h2_1p4_bohr": h2(1.4),
        "h2_0p735_angstrom": h2(0.735 * ANGSTROM),
        "h4_rect_lambda_0p6": h4(0.6),
        "h4_square": h4(1.0),
    }
    path = Path(__file__).with_name("pyscf_reference.json")
    path.write_text(json.dumps(out, indent=1))
    print(path)
