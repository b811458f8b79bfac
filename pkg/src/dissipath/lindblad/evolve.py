"""Cooling a warm start along a sequence of Hamiltonians."""
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DomainError
from ..fock import enumerate_determinants
from .jumps import LindbladGenerator, build_filtered_jump
from .steppers import DensityState, apply_exact_step, apply_strang_step, qdrift_step


@dataclass
class TrajectoryRecord:
    index: int
    s: float
    E0: float
    dE: float
    infidelity: float
    n_steps: int
    ground_populations: list = field(default_factory=list)


@dataclass
class Trajectory:
    records: list
    final_state: np.ndarray  # determinant basis

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self, path):
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["geometry_index", "s", "E0", "dE", "infidelity", "N_T"])
            for r in self.records:
                w.writerow([r.index, *(repr(float(v)) for v in (r.s, r.E0, r.dE, r.infidelity)), r.n_steps])


def default_jump_sources(point, pairs=None, flavors=("X", "Y")):
    from ..fock import bilinear_jump_set

    space = enumerate_determinants(2 * point.mo.n_orb, point.n_electrons)
    return bilinear_jump_set(space, pairs, flavors)


def build_generator(eig, sources, spec, labels=None, scale=1.0):
    labels = labels or [None] * len(sources)
    jumps = [build_filtered_jump(A, eig, spec, source=lab, scale=scale) for A, lab in zip(sources, labels)]
    return LindbladGenerator(jumps, eig)


def evolve_along_path(points, sources, spec, tau, n_steps, stepper="exact", initial=None, labels=None,
                      seed=0, scale=1.0, track_ground=False, callback=None):
    """Apply ``n_steps`` cooling steps at each path point in turn.

    Parameters
    ----------
    points : sequence of PathPoint
        Gauge-aligned points sharing one determinant space.
    sources : list of ndarray
        Hermitian jump sources in the determinant basis.
    n_steps : int or sequence of int
        Steps per point, either shared or one entry per point.
    stepper : {"exact", "strang", "qdrift"}
    initial : ndarray, optional
        Determinant-basis density matrix; defaults to the ground state of
        the first point.
    scale : float
        Global jump-strength factor.
    """
    steps = np.asarray(n_steps) if np.ndim(n_steps) else np.full(len(points), int(n_steps))
    if len(steps) != len(points):
        raise DomainError(f"{len(steps)} step counts for {len(points)} points")
    if tau <= 0 or np.any(steps < 1):
        raise DomainError("need tau > 0 and at least one step per point")
    if stepper not in ("exact", "strang", "qdrift"):
        raise DomainError(f"unknown stepper {stepper!r}")
    if stepper == "strang" and spec.kind != "square":
        raise DomainError("the splitting stepper needs a square-wave filter")
    if initial is None:
        psi = points[0].eig.vectors[:, 0]
        rho = np.outer(psi, psi.conj())
    else:
        rho = np.asarray(initial, dtype=complex)
    records = []
    counter = 0
    for i, p in enumerate(points):
        V, E = p.eig.vectors, p.eig.energies
        state = DensityState(V.conj().T @ rho @ V, basis=i)
        gen = build_generator(p.eig, sources, spec, labels, scale)
        pops = []
        for _ in range(int(steps[i])):
            if stepper == "exact":
                state = apply_exact_step(state, gen, tau)
            elif stepper == "qdrift":
                state, _ = qdrift_step(state, gen, tau, seed, counter, rescale=True)
                counter += 1
            else:
                # one splitting channel per source, each for the full step
                for A in sources:
                    state = apply_strang_step(state, A * scale, p.eig, spec, tau)
            if track_ground:
                pops.append(float(state.rho[0, 0].real))
        rho_e = state.rho
        dE = abs(float(np.sum(np.real(np.diag(rho_e)) * E)) - float(E[0]))
        rec = TrajectoryRecord(i, float(p.s), float(E[0]), dE, 1.0 - float(rho_e[0, 0].real), int(steps[i]), pops)
        records.append(rec)
        if callback:
            callback(rec)
        rho = V @ rho_e @ V.conj().T
    return Trajectory(records, rho)


def transport_infidelity(points):
    """Infidelity at each point of the first point's ground state carried without cooling."""
    psi = points[0].eig.vectors[:, 0]
    return np.array([1.0 - abs(np.vdot(p.eig.vectors[:, 0], psi)) ** 2 for p in points])
