"""Leakage measurements on model Hamiltonians with a prescribed gap."""
import numpy as np

from ..spectral import EigenSystem
from .jumps import build_filtered_jump


def gapped_model(dim, delta, h_norm=1.0, seed=0):
    """Diagonal H with E_0 = 0, E_1 = delta, the rest uniform in [delta, h_norm],
    and a random hermitian source A with ||A||_2 = 1.

    Returns ``(EigenSystem, A)`` with A already in the eigenbasis.
    """
    rng = np.random.default_rng(seed)
    E = np.sort(np.concatenate([[0.0, delta, h_norm], rng.uniform(delta, h_norm, dim - 3)]))
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    A = X + X.conj().T
    A /= np.linalg.norm(A, 2)
    return EigenSystem(E, np.eye(dim, dtype=complex)), A


def measured_leakage(A, eig, spec):
    """(excited, full) leakage of the filtered jump built from A."""
    fj = build_filtered_jump(A, eig, spec)
    return fj.excited_leakage, fj.leakage


def running_min(values):
    return np.minimum.accumulate(np.asarray(values, dtype=float))


def log_concavity_violation(x, y):
    """Largest increase of successive log-log slopes of (x, y); <= 0 means concave."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slopes = np.diff(ly) / np.diff(lx)
    return float(np.max(np.diff(slopes))) if len(slopes) > 1 else 0.0
