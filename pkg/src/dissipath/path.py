"""Reaction paths: the H4 rectangle family, orbital gauge alignment,
Davis-Kahan profiles and mesh selection."""
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .chem import (
    ANGSTROM_TO_BOHR,
    Geometry,
    build_sto3g_basis,
    compute_integrals,
    overlap_between,
    read_fcidump,
    run_rhf,
    transform_to_mo,
)
from .errors import (
    GapClosureError,
    GaugeDiscontinuityError,
    InputError,
    NumericalOverlapError,
    ResolutionError,
)
from .fock import build_hamiltonian, enumerate_determinants
from .spectral import eigendecompose, gaps, spectral_norm


@dataclass(frozen=True)
class H4Rectangle:
    a: float = 1.2  # angstrom
    lam_min: float = 0.6
    lam_max: float = 1.6
    n_electrons: int = 4

    def __post_init__(self):
        if not (0 < self.lam_min < self.lam_max):
            raise InputError(f"need 0 < lam_min < lam_max, got {self.lam_min}, {self.lam_max}")
        if self.a <= 0:
            raise InputError(f"side length must be positive, got {self.a}")

    def lam(self, s):
        return self.lam_min ** (1.0 - s) * self.lam_max**s

    def geometry(self, s):
        return h4_geometry(s, self.a, self.lam_min, self.lam_max)

    def square_s(self):
        """Coordinate where lambda(s) = 1 (None if the square is not on the path)."""
        if not self.lam_min <= 1.0 <= self.lam_max:
            return None
        return np.log(1.0 / self.lam_min) / np.log(self.lam_max / self.lam_min)


@dataclass(frozen=True)
class FcidumpSequence:
    files: tuple


@dataclass(frozen=True)
class ReactionPathSpec:
    kind: object = field(default_factory=H4Rectangle)
    s_start: float = 0.0
    s_end: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.s_start < self.s_end <= 1.0):
            raise InputError(f"need 0 <= s_start < s_end <= 1, got {self.s_start}, {self.s_end}")


def transition_state_s(kind, force_half=False):
    """TS coordinate: the exact square by default, or 0.5 on request."""
    if force_half:
        return 0.5
    s = kind.square_s()
    if s is None:
        raise InputError("the square geometry is not on this path")
    return float(s)


def h4_geometry(s, a=1.2, lam_min=0.6, lam_max=1.6):
    """Four H atoms at (+-X/2, +-Y/2, 0), X = a/sqrt(lam), Y = a sqrt(lam), lam = lam_min^(1-s) lam_max^s."""
    if not 0.0 <= s <= 1.0:
        raise InputError(f"s must lie in [0, 1], got {s}")
    lam = lam_min ** (1.0 - s) * lam_max**s
    X = a / np.sqrt(lam)
    Y = a * np.sqrt(lam)
    xyz = np.array([[X, Y, 0], [-X, Y, 0], [-X, -Y, 0], [X, -Y, 0]]) * 0.5
    return Geometry.from_symbols(["H"] * 4, xyz, unit="angstrom")


class PathPoint:
    """One geometry along a path with its orbitals and FCI Hamiltonian.

    The eigensystem is computed lazily.
    """

    def __init__(self, s, geometry, scf, mo, H, basis=None, n_electrons=None):
        self.s = float(s)
        self.geometry = geometry
        self.scf = scf
        self.mo = mo
        self.H = H
        self.basis = basis
        self.n_electrons = n_electrons

    @cached_property
    def eig(self):
        return eigendecompose(self.H)

    @property
    def C(self):
        return self.scf.C

    def with_orbitals(self, C):
        """Rebuild MO integrals and H in a new orbital gauge."""
        ints = compute_integrals(self.basis, self.geometry)
        mo = transform_to_mo(ints, C)
        space = enumerate_determinants(2 * mo.n_orb, self.n_electrons)
        return PathPoint(self.s, self.geometry, replace(self.scf, C=C), mo, build_hamiltonian(mo, space),
                         self.basis, self.n_electrons)


def compute_point(geometry, s, n_electrons, guess_density=None):
    basis = build_sto3g_basis(geometry)
    ints = compute_integrals(basis, geometry)
    scf = run_rhf(ints, n_electrons, guess_density=guess_density)
    mo = transform_to_mo(ints, scf.C)
    space = enumerate_determinants(2 * mo.n_orb, n_electrons)
    return PathPoint(s, geometry, scf, mo, build_hamiltonian(mo, space), basis, n_electrons)


def build_path_points(kind, s_values):
    """Electronic structure at each s; each SCF starts from its predecessor's density."""
    s_values = np.asarray(s_values, dtype=float)
    if np.any(np.diff(s_values) <= 0):
        raise InputError("s values must be strictly increasing")
    if isinstance(kind, FcidumpSequence):
        return fcidump_points(kind, s_values)
    points, D = [], None
    for s in s_values:
        p = compute_point(kind.geometry(s), s, kind.n_electrons, guess_density=D)
        D = p.scf.density
        points.append(p)
    return points


def fcidump_points(kind, s_values):
    if len(kind.files) != len(s_values):
        raise InputError(f"{len(kind.files)} FCIDUMP files for {len(s_values)} s values")
    out = []
    for s, f in zip(s_values, kind.files):
        mo, ne, _ = read_fcidump(f)
        space = enumerate_determinants(2 * mo.n_orb, ne)
        out.append(PathPoint(s, None, None, mo, build_hamiltonian(mo, space), None, ne))
    return out


def procrustes_rotation(M, k=None, tol=1e-8):
    """Rotation R making M R symmetric positive semidefinite (closest to identity).

    With M = U diag(sigma) V^T, R = V U^T. Raises when the block is rank
    deficient (sigma_min < tol).
    """
    U, sig, Vt = np.linalg.svd(M)
    if sig.size and sig[-1] < tol:
        raise GaugeDiscontinuityError(-1 if k is None else k, float(sig[-1]))
    return Vt.T @ U.T


def aligned_coefficients(C, geom, basis, C_ref, geom_ref, basis_ref, n_occ, k=None):
    """Rotate occupied and virtual blocks of ``C`` toward ``C_ref``."""
    S = overlap_between(basis_ref, geom_ref, basis, geom)  # <chi(ref)|chi(this)>
    out = C.copy()
    for sl in (slice(0, n_occ), slice(n_occ, C.shape[1])):
        if C[:, sl].shape[1] == 0:
            continue
        M = C_ref[:, sl].T @ S @ C[:, sl]
        out[:, sl] = C[:, sl] @ procrustes_rotation(M, k)
    return out


def align_gauge(points):
    """Backward Procrustes sweep: the last point fixes the gauge."""
    if len(points) < 2:
        raise InputError("alignment needs at least two points")
    out = list(points)
    for k in range(len(points) - 2, -1, -1):
        cur, ref = out[k], out[k + 1]
        C = aligned_coefficients(cur.C, cur.geometry, cur.basis, ref.C, ref.geometry, ref.basis, cur.scf.n_occ, k)
        out[k] = cur.with_orbitals(C)
    return out


def occupied_overlap_matrix(p, q):
    """M_occ = C_q^occ^T S_{q,p} C_p^occ between two path points."""
    n = p.scf.n_occ
    S = overlap_between(q.basis, q.geometry, p.basis, p.geometry)
    return q.C[:, :n].T @ S @ p.C[:, :n]


def overlap_from_principal_angles(M):
    """Cosines of principal angles and the determinant overlap prod cos^2."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    sig = np.linalg.svd(M, compute_uv=False) if M.size else np.array([])
    if np.any(sig > 1.0 + 1e-8):
        raise NumericalOverlapError(f"singular value {sig.max():.12f} exceeds 1: blocks are not orthonormal")
    sig = np.clip(sig, 0.0, 1.0)
    return sig, float(np.prod(sig**2))


@dataclass
class DKProfile:
    s: np.ndarray
    g: np.ndarray
    C_DK: float
    L_H: float
    ds_fd: float


class AlignedFamily:
    """H(s) in a gauge aligned to a fixed reference point.

    ``hamiltonian(s)`` solves the SCF at ``s`` (continuing from the
    reference density) and rotates its orbitals toward the reference, so
    the family is smooth around the reference coordinate.
    """

    def __init__(self, kind, reference):
        self.kind = kind
        self.ref = reference

    def point(self, s):
        p = compute_point(self.kind.geometry(s), s, self.kind.n_electrons, guess_density=self.ref.scf.density)
        C = aligned_coefficients(p.C, p.geometry, p.basis, self.ref.C, self.ref.geometry, self.ref.basis,
                                 p.scf.n_occ)
        return p.with_orbitals(C)

    def hamiltonian(self, s):
        return self.point(s).H.entries


def _central_difference(H_at, s, ds, lo, hi):
    a, b = max(lo, s - ds), min(hi, s + ds)
    return spectral_norm(H_at(b) - H_at(a)) / (b - a)


def dk_density(H_at, s, ds=1e-3, gap=None, lo=0.0, hi=1.0, richardson=True, max_halvings=4):
    """g(s) = ||dH/ds||_2 / Delta(s) by central differences.

    Parameters
    ----------
    H_at : callable
        Maps s to a dense Hamiltonian in a smooth gauge.
    gap : float, optional
        Delta(s); computed from ``H_at(s)`` when omitted.
    richardson : bool
        Halve the step until successive estimates agree to 1%.

    Returns
    -------
    (g, ds_used)
    """
    if gap is None:
        gap = gaps(eigendecompose(H_at(s))).delta
    if gap <= 1e-10:
        raise GapClosureError(f"spectral gap {gap:.3e} at s={s} is closed")
    d = _central_difference(H_at, s, ds, lo, hi)
    used = ds
    if richardson:
        for _ in range(max_halvings):
            d2 = _central_difference(H_at, s, used / 2, lo, hi)
            if abs(d2 - d) <= 0.01 * max(abs(d2), 1e-14):
                d = d2
                used /= 2
                break
            d, used = d2, used / 2
    return d / gap, used


def compute_cdk(s, g):
    s, g = np.asarray(s, dtype=float), np.asarray(g, dtype=float)
    if len(s) < 3:
        raise InputError("need at least three samples")
    if np.any(np.diff(s) <= 0):
        raise InputError("profile samples must be strictly increasing in s")
    return float(np.trapezoid(g, s))


def estimate_lipschitz(s, Hs):
    """max over sample pairs of ||H(s) - H(s')||_2 / |s - s'|."""
    s = np.asarray(s, dtype=float)
    if len(s) < 3:
        raise InputError("need at least three samples")
    if np.any(np.diff(s) <= 0):
        raise InputError("samples must be strictly increasing in s")
    best = 0.0
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            best = max(best, spectral_norm(Hs[j] - Hs[i]) / (s[j] - s[i]))
    return best


def choose_nh(C_DK, eps_E, c=1.0):
    if eps_E <= 0:
        raise InputError("eps_E must be positive")
    return max(2, int(np.ceil(c * C_DK**2 / eps_E)))


def equal_mass_mesh(s, g, N_H):
    """N_H coordinates splitting the cumulative mass of g into equal parts.

    The cumulative mass is the trapezoid integral, interpolated linearly
    between samples.
    """
    s, g = np.asarray(s, dtype=float), np.asarray(g, dtype=float)
    if np.any(np.diff(s) <= 0):
        raise InputError("profile samples must be strictly increasing in s")
    if N_H < 2:
        raise InputError("N_H must be at least 2")
    if N_H > len(s):
        raise ResolutionError(
            f"N_H={N_H} exceeds the {len(s)} profile samples; sample the profile more densely"
        )
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(s))])
    if cum[-1] <= 0:
        return np.linspace(s[0], s[-1], N_H)
    targets = np.linspace(0.0, cum[-1], N_H)
    # flat stretches make cum non-strictly increasing; interpolate on the unique part
    keep = np.concatenate([[True], np.diff(cum) > 0])
    out = np.interp(targets, cum[keep], s[keep])
    out[0], out[-1] = s[0], s[-1]
    return out


def interval_masses(s, g, mesh):
    """Trapezoid mass of g between consecutive mesh coordinates."""
    s, g = np.asarray(s, dtype=float), np.asarray(g, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(s))])
    return np.diff(np.interp(mesh, s, cum))


@dataclass
class PathMesh:
    points: list
    dk: DKProfile = None

    @property
    def N_H(self):
        return len(self.points)

    @property
    def s(self):
        return np.array([p.s for p in self.points])

    def to_json(self, path=None):
        rows = []
        for i, p in enumerate(self.points):
            gi = gaps(p.eig)
            row = {"s": p.s, "E0": float(p.eig.energies[0]), "delta": gi.delta}
            if p.geometry is not None:
                row["geometry_angstrom"] = (p.geometry.coords / ANGSTROM_TO_BOHR).tolist()
                row["symbols"] = p.geometry.symbols
            if self.dk is not None and len(self.dk.g) == self.N_H:
                row["g"] = float(self.dk.g[i])
            rows.append(row)
        doc = {"N_H": self.N_H, "points": rows}
        if self.dk is not None:
            doc["C_DK"] = self.dk.C_DK
            doc["L_H"] = self.dk.L_H
            doc["ds_fd"] = self.dk.ds_fd
        text = json.dumps(doc, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def build_mesh(kind, s_values, with_profile=True, ds=1e-3):
    """Aligned mesh at ``s_values`` with g sampled at every mesh point."""
    pts = align_gauge(build_path_points(kind, s_values))
    mesh = PathMesh(pts)
    if with_profile and len(pts) >= 3:
        mesh.dk = mesh_profile(kind, pts, ds)
    return mesh


def mesh_profile(kind, pts, ds=1e-3):
    g, used = [], ds
    lo, hi = pts[0].s, pts[-1].s
    for p in pts:
        fam = AlignedFamily(kind, p)
        val, used = dk_density(fam.hamiltonian, p.s, ds, gap=gaps(p.eig).delta, lo=lo, hi=hi)
        g.append(val)
    s = np.array([p.s for p in pts])
    return DKProfile(s, np.array(g), compute_cdk(s, g), estimate_lipschitz(s, [p.H.entries for p in pts]), used)


def interval_bound(kind, left, right, n_sub=8, ds=1e-3):
    """2 * int g ds over [left.s, right.s] in the gauge aligned to ``right``.

    At s = left.s this family coincides with the backward-aligned mesh
    gauge, so the bound applies directly to the mesh projectors.
    """
    fam = AlignedFamily(kind, right)
    sub = np.linspace(left.s, right.s, n_sub + 1)
    g = []
    for s in sub:
        H = fam.hamiltonian(s)
        gap = gaps(eigendecompose(H)).delta
        if gap <= 1e-10:
            raise GapClosureError(f"spectral gap closes at s={s}")
        d = _central_difference(fam.hamiltonian, s, ds, 0.0, 1.0)
        g.append(d / gap)
    return 2.0 * float(np.trapezoid(g, sub)), sub, np.array(g)
