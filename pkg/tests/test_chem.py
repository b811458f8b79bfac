import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from dissipath.chem import (
    Geometry,
    MOIntegrals,
    boys_f0,
    build_sto3g_basis,
    compute_integrals,
    read_fcidump,
    read_xyz,
    run_rhf,
    transform_to_mo,
    write_fcidump,
    write_xyz,
)
from dissipath.errors import (
    FcidumpParseError,
    GaugeError,
    InputError,
    ShapeError,
    SingularGeometryError,
    UnsupportedElementError,
    UnsupportedSpinError,
)
from dissipath.fock import build_hamiltonian, enumerate_determinants
from dissipath.path import H4Rectangle
from dissipath.spectral import eigendecompose


def h2(r_bohr):
    g = Geometry.from_symbols(["H", "H"], [[0, 0, 0], [0, 0, r_bohr]])
    return g, compute_integrals(build_sto3g_basis(g), g)


@pytest.mark.parametrize("key", ["h2_1p4_bohr", "h2_0p735_angstrom"])
def test_h2_integrals_match_reference(reference, key):
    ref = reference[key]
    _, ints = h2(ref["r_bohr"])
    for name, mine in (("S", ints.S), ("T", ints.Tkin), ("V", ints.Vnuc), ("eri", ints.eri)):
        np.testing.assert_allclose(mine, ref[name], atol=1e-10, err_msg=name)
    assert ints.e_nuc == pytest.approx(ref["e_nuc"], abs=1e-12)


@pytest.mark.parametrize("key", ["h2_1p4_bohr", "h2_0p735_angstrom"])
def test_h2_scf_and_fci_match_reference(reference, key):
    ref = reference[key]
    _, ints = h2(ref["r_bohr"])
    scf = run_rhf(ints, 2)
    assert scf.converged
    assert scf.e_hf == pytest.approx(ref["e_hf"], abs=1e-10)
    # MO coefficients agree up to a sign per column
    C_ref = np.array(ref["C"])
    signs = np.sign(np.sum(scf.C * C_ref, axis=0))
    np.testing.assert_allclose(scf.C * signs, C_ref, atol=1e-8)
    mo = transform_to_mo(ints, scf.C * signs)
    np.testing.assert_allclose(mo.h, ref["mo_h"], atol=1e-10)
    np.testing.assert_allclose(mo.g, ref["mo_g"], atol=1e-10)
    e = eigendecompose(build_hamiltonian(mo, enumerate_determinants(4, 2))).energies[0]
    assert e == pytest.approx(ref["e_fci"], abs=1e-10)


@pytest.mark.parametrize("key", ["h4_rect_lambda_0p6", "h4_square"])
def test_h4_matches_reference(reference, key):
    ref = reference[key]
    kind = H4Rectangle(a=ref["a"])
    s = np.log(ref["lambda"] / kind.lam_min) / np.log(kind.lam_max / kind.lam_min)
    assert kind.lam(s) == pytest.approx(ref["lambda"], abs=1e-14)
    g = kind.geometry(s)
    ints = compute_integrals(build_sto3g_basis(g), g)
    # the reference used a bohr constant differing in the ninth digit
    assert ints.e_nuc == pytest.approx(ref["e_nuc"], abs=1e-8)
    scf = run_rhf(ints, 4)
    assert scf.e_hf == pytest.approx(ref["e_hf"], abs=1e-8)
    space = enumerate_determinants(8, 4)
    E = eigendecompose(build_hamiltonian(transform_to_mo(ints, scf.C), space)).energies
    # every reference singlet appears in the full spectrum
    for e in ref["e_fci_singlets"]:
        assert np.min(np.abs(E - e)) < 1e-8


def test_boys_function_small_and_large_arguments():
    from scipy.integrate import quad

    for x in (0.0, 1e-6, 5e-4, 1e-3, 0.3, 2.0, 30.0):
        ref = quad(lambda t: np.exp(-x * t * t), 0, 1, epsabs=1e-15)[0]
        assert boys_f0(np.array([x]))[0] == pytest.approx(ref, rel=1e-12)


def test_overlap_is_positive_definite_with_unit_diagonal():
    g = H4Rectangle().geometry(0.3)
    S = compute_integrals(build_sto3g_basis(g), g).S
    np.testing.assert_allclose(np.diag(S), 1.0, atol=1e-12)
    np.testing.assert_allclose(S, S.T, atol=1e-15)
    assert np.linalg.eigvalsh(S).min() > 0


def test_eri_has_eightfold_symmetry():
    g = H4Rectangle().geometry(0.5)
    eri = compute_integrals(build_sto3g_basis(g), g).eri
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)):
        np.testing.assert_allclose(eri, eri.transpose(perm), atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(
    angles=st.tuples(*[st.floats(-np.pi, np.pi)] * 3),
    shift=st.tuples(*[st.floats(-3, 3)] * 3),
)
def test_energies_invariant_under_rigid_motion(angles, shift):
    g = H4Rectangle().geometry(0.4)
    moved = g.transformed(Rotation.from_euler("xyz", angles).as_matrix(), np.array(shift))
    e = [run_rhf(compute_integrals(build_sto3g_basis(x), x), 4).e_hf for x in (g, moved)]
    assert e[0] == pytest.approx(e[1], abs=1e-9)


def test_non_hydrogen_is_rejected():
    g = Geometry.from_symbols(["He"], [[0, 0, 0]])
    with pytest.raises(UnsupportedElementError):
        build_sto3g_basis(g)


def test_coincident_atoms_are_rejected():
    g = Geometry.from_symbols(["H", "H"], [[0, 0, 0], [0, 0, 0]])
    with pytest.raises(SingularGeometryError):
        g.nuclear_repulsion()


def test_odd_electron_count_is_rejected():
    _, ints = h2(1.4)
    with pytest.raises(UnsupportedSpinError):
        run_rhf(ints, 1)


def test_non_orthonormal_orbitals_are_rejected():
    _, ints = h2(1.4)
    with pytest.raises(GaugeError):
        transform_to_mo(ints, np.eye(2))


def test_mo_integral_shapes_are_validated():
    with pytest.raises(ShapeError):
        MOIntegrals(np.zeros((2, 2)), np.zeros((3, 3, 3, 3)), 0.0)


def test_xyz_round_trip(tmp_path):
    g = H4Rectangle().geometry(0.25)
    write_xyz(g, tmp_path / "h4.xyz", comment="h4")
    back = read_xyz(tmp_path / "h4.xyz")
    assert back.symbols == g.symbols
    np.testing.assert_allclose(back.coords, g.coords, atol=1e-12)


def test_xyz_bad_count(tmp_path):
    (tmp_path / "bad.xyz").write_text("3\n\nH 0 0 0\nH 0 0 1\n")
    with pytest.raises(InputError):
        read_xyz(tmp_path / "bad.xyz")


def test_fcidump_round_trip_is_exact(tmp_path):
    g = H4Rectangle().geometry(0.7)
    ints = compute_integrals(build_sto3g_basis(g), g)
    mo = transform_to_mo(ints, run_rhf(ints, 4).C)
    write_fcidump(tmp_path / "FCIDUMP", mo, 4)
    back, ne, meta = read_fcidump(tmp_path / "FCIDUMP")
    assert ne == 4 and meta["MS2"] == 0
    assert np.array_equal(back.h, mo.h)
    assert back.e_core == mo.e_core
    # the file stores one entry per symmetry class; the reader restores the rest
    np.testing.assert_allclose(back.g, mo.g, atol=1e-15)


def hubbard_fcidump(t, U):
    return "\n".join([
        " &FCI NORB=2, NELEC=2, MS2=0,",
        "  ORBSYM=1,1,",
        "  ISYM=1,",
        " &END",
        f" {U!r} 1 1 1 1",
        f" {U!r} 2 2 2 2",
        f" {-t!r} 2 1 0 0",
        " 0.0 0 0 0 0",
    ]) + "\n"


def test_two_site_hubbard_from_fcidump(tmp_path):
    t, U = 1.0, 4.0
    (tmp_path / "FCIDUMP").write_text(hubbard_fcidump(t, U))
    mo, ne, _ = read_fcidump(tmp_path / "FCIDUMP")
    space = enumerate_determinants(4, ne)
    H = build_hamiltonian(mo, space).entries
    # Sz = 0 block in the basis {|up1 dn1>, |up1 dn2>, |dn1 up2>, |up2 dn2>}: the
    # two doubly occupied states cost U, hopping connects them to the singly
    # occupied ones with amplitude -t (up to determinant signs).
    occ = space.occupations()
    sz0 = [i for i, d in enumerate(space.dets) if bin(int(d) & 0b0101).count("1") == 1]
    block = H[np.ix_(sz0, sz0)]
    doubly = [k for k, i in enumerate(sz0) if occ[i][:2].sum() == 2 or occ[i][2:].sum() == 2]
    assert sorted(np.round(np.diag(block).real, 12)) == [0.0, 0.0, U, U]
    assert all(np.diag(block)[k].real == pytest.approx(U) for k in doubly)
    assert np.allclose(np.sort(np.abs(block[np.triu_indices(4, 1)])), [0, 0, t, t, t, t])
    E = np.linalg.eigvalsh(block)
    exact = sorted([U / 2 - np.sqrt(U**2 / 4 + 4 * t * t), 0.0, U, U / 2 + np.sqrt(U**2 / 4 + 4 * t * t)])
    np.testing.assert_allclose(E, exact, atol=1e-12)


@pytest.mark.parametrize(
    "text, line",
    [
        ("garbage\n", 1),
        (" &FCI NORB=2, NELEC=2,\n 1.0 1 1 1 1\n", 2),
        (" &FCI NORB=2, NELEC=2,\n &END\n 1.0 1 1 1\n", 3),
        (" &FCI NORB=2, NELEC=2,\n &END\n 1.0 1 1 1 1\n x 1 1 1 1\n", 4),
        (" &FCI NORB=2, NELEC=2,\n &END\n 1.0 3 1 1 1\n", 3),
        (" &FCI NORB=2, NELEC=2,\n &END\n 1.0 1 0 1 1\n", 3),
        (" &FCI NELEC=2,\n &END\n", 1),
    ],
)
def test_fcidump_errors_report_line(tmp_path, text, line):
    (tmp_path / "FCIDUMP").write_text(text)
    with pytest.raises(FcidumpParseError) as err:
        read_fcidump(tmp_path / "FCIDUMP")
    assert err.value.line == line
