"""Markov chains induced by filtered jumps on the energy eigenbasis.

Covers the transition kernel, energy layers, the downhill-drift check,
hitting-time sampling and the tail bound, and transition-graph export.
"""
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta

from .errors import ContractError, DomainError
from .kernels import hitting_times

LAYER_SLACK = 1e-12


@dataclass(frozen=True)
class MarkovKernel:
    P: np.ndarray
    gamma: np.ndarray
    absorbing: bool = True

    @property
    def dim(self):
        return self.P.shape[0]


@dataclass(frozen=True)
class LayerPartition:
    delta_e_layer: float
    layers: np.ndarray
    L_mu: int = None
    eta: float = None


@dataclass(frozen=True)
class DriftReport:
    p_min_achieved: float
    downhill_mass: np.ndarray
    window: np.ndarray
    violators: list = field(default_factory=list)
    delta_e_layer: float = None


@dataclass
class HittingStats:
    samples: np.ndarray
    capped: np.ndarray
    seed: int
    mu: np.ndarray

    def tail(self, t):
        """Empirical Pr(tau_0 > t)."""
        return float(np.mean(self.samples > t))

    def cdf(self, ts):
        s = np.sort(self.samples)
        return np.searchsorted(s, np.asarray(ts), side="right") / len(s)


def kernel_from_gamma(gamma):
    gamma = np.asarray(gamma, dtype=float)
    D = gamma.shape[0]
    row = gamma.sum(axis=1)
    P = np.zeros_like(gamma)
    live = row > 0
    P[live] = gamma[live] / row[live, None]
    P[~live, np.flatnonzero(~live)] = 1.0  # dead rows stay put
    P[0] = 0.0
    P[0, 0] = 1.0
    if D:
        P = P / P.sum(axis=1, keepdims=True)
    return MarkovKernel(P, gamma, True)


def kernel_from_jumps(jumps, eig=None):
    """P_{j->k} proportional to Gamma_{j->k} = sum_a |<k|K_a|j>|^2."""
    Ks = np.stack([j.K if hasattr(j, "K") else np.asarray(j) for j in jumps])
    gamma = np.sum(np.abs(Ks) ** 2, axis=0).T  # gamma[j, k] = sum_a |K_a[k, j]|^2
    return kernel_from_gamma(gamma)


def layer_partition(energies, delta_e_layer):
    """L(j) = ceil((E_j - E_0) / Delta E_layer)."""
    if delta_e_layer <= 0:
        raise DomainError("layer width must be positive")
    E = np.asarray(getattr(energies, "energies", energies), dtype=float)
    L = np.ceil((E - E[0]) / delta_e_layer - LAYER_SLACK).astype(int)
    L = np.maximum(L, 0)
    return LayerPartition(float(delta_e_layer), L)


def warm_start_radius(mu, partition, eta):
    """Smallest L with Pr_mu(L(J) > L) <= eta."""
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < -1e-15) or abs(mu.sum() - 1.0) > 1e-9:
        raise DomainError("mu must be a probability vector")
    L = partition.layers
    for r in range(int(L.max()) + 1):
        if mu[L > r].sum() <= eta + 1e-15:
            return r
    return int(L.max())


def with_radius(partition, mu, eta):
    return LayerPartition(partition.delta_e_layer, partition.layers, warm_start_radius(mu, partition, eta), eta)


def populated_window(mu, floor=1e-6):
    """Default drift window: excited states with population above ``floor``."""
    mu = np.asarray(mu, dtype=float)
    idx = np.flatnonzero(mu > floor)
    return idx[idx != 0]


def check_uniform_drift(kernel, energies, delta_e_layer, window=None, threshold=None):
    """Downhill mass sum_{k: E_k <= E_j - Delta E_layer} P_{j->k} per state.

    ``window`` restricts the minimum to a set of excited indices (default:
    all j != 0). States below ``threshold`` are reported as violators.
    """
    E = np.asarray(getattr(energies, "energies", energies), dtype=float)
    P = kernel.P
    D = len(E)
    mass = np.zeros(D)
    for j in range(1, D):
        down = E <= E[j] - delta_e_layer + LAYER_SLACK
        mass[j] = P[j, down].sum()
    win = np.arange(1, D) if window is None else np.asarray([j for j in window if j != 0], dtype=int)
    p_min = float(np.clip(mass[win].min(), 0.0, 1.0)) if win.size else 1.0
    viol = [int(j) for j in win if threshold is not None and mass[j] < threshold]
    return DriftReport(p_min, mass, win, viol, float(delta_e_layer))


def layer_sweep(kernel, energies, gap, factors=(0.5, 1.0, 2.0, 4.0), window=None):
    """Drift reports for Delta E_layer = factor * gap."""
    return {f: check_uniform_drift(kernel, energies, f * gap, window) for f in factors}


def _require_absorbing(kernel):
    row0 = kernel.P[0]
    if abs(row0[0] - 1.0) > 1e-12 or np.any(np.abs(row0[1:]) > 1e-12):
        raise ContractError("kernel is not absorbing at the ground state")


def simulate_hitting(kernel, mu, n_samples, seed, cap=10**6):
    """Sample tau_0 = first step at which the chain sits in state 0.

    Start states are drawn from ``mu``; each trajectory has its own random
    stream derived from ``(seed, trajectory index)``.
    """
    _require_absorbing(kernel)
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    mu = np.asarray(mu, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5EED]))
    start = rng.choice(kernel.dim, size=n_samples, p=mu / mu.sum()).astype(np.int64)
    cum = np.cumsum(kernel.P, axis=1)
    cum[:, -1] = 1.0
    steps, capped = hitting_times(np.ascontiguousarray(cum), start, int(seed) & 0xFFFFFFFFFFFFFFFF, int(cap), 0)
    return HittingStats(np.asarray(steps), np.asarray(capped, dtype=bool), int(seed), mu)


def absorption_cdf(kernel, mu, t_max):
    """Exact Pr(tau_0 <= t), t = 0..t_max, by repeated kernel application."""
    _require_absorbing(kernel)
    v = np.asarray(mu, dtype=float).copy()
    out = np.empty(t_max + 1)
    for t in range(t_max + 1):
        out[t] = v[0]
        v = v @ kernel.P
    return out


def ks_distance(stats, kernel, t_max=None):
    t_max = int(t_max or stats.samples.max())
    exact = absorption_cdf(kernel, stats.mu, t_max)
    emp = stats.cdf(np.arange(t_max + 1))
    return float(np.max(np.abs(exact - emp)))


def t_star(L_mu, p_min, eps):
    """ceil(2 L_mu / p_min + (8 / p_min) ln(1/eps))."""
    return int(np.ceil(2.0 * L_mu / p_min + 8.0 / p_min * np.log(1.0 / eps)))


def clopper_pearson(k, n, conf=0.95):
    a = 1.0 - conf
    lo = 0.0 if k == 0 else beta.ppf(a / 2, k, n - k + 1)
    hi = 1.0 if k == n else beta.ppf(1 - a / 2, k + 1, n - k)
    return float(lo), float(hi)


def verify_tail_bound(stats, L_mu, p_min, eta, eps, conf=0.95):
    t = t_star(L_mu, p_min, eps)
    n = len(stats.samples)
    k = int(np.sum(stats.samples > t))
    lo, hi = clopper_pearson(k, n, conf)
    bound = eta + eps
    return {
        "t_star": t,
        "tail": k / n,
        "ci": (lo, hi),
        "bound": bound,
        "lemma_tail": eta + float(np.exp(-p_min * t / 8.0)),
        "capped": int(np.sum(stats.capped)),
        "passes": hi <= bound,
    }


def linear_cooling_budget(c_E, N_o, delta_e_layer, p_min, eps):
    """ceil((2/p_min) ceil(c_E N_o / Delta E_layer) + (8/p_min) ln(1/eps))."""
    for name, v in (("c_E", c_E), ("N_o", N_o), ("delta_e_layer", delta_e_layer), ("p_min", p_min), ("eps", eps)):
        if v <= 0:
            raise DomainError(f"{name} must be positive")
    layers = int(np.ceil(c_E * N_o / delta_e_layer - LAYER_SLACK))
    return int(np.ceil(2.0 / p_min * layers + 8.0 / p_min * np.log(1.0 / eps) - 1e-12))


def layered_chain(n_layers, p):
    """Birth-death chain j -> j-1 with probability p, else stay; energies E_j = j."""
    if not 0 < p <= 1:
        raise DomainError("p must lie in (0, 1]")
    D = n_layers + 1
    P = np.zeros((D, D))
    P[0, 0] = 1.0
    for j in range(1, D):
        P[j, j - 1] = p
        P[j, j] = 1.0 - p
    return MarkovKernel(P, P.copy(), True), np.arange(D, dtype=float)


def _edges(kernel, threshold):
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    P = kernel.P
    return [(int(j), int(k), float(P[j, k])) for j, k in zip(*np.nonzero(P >= threshold)) if j != k]


def longest_downhill_path(kernel, threshold):
    """(ell, unreachable): max over nodes of the shortest hop count to node 0."""
    D = kernel.dim
    preds = [[] for _ in range(D)]
    for j, k, _ in _edges(kernel, threshold):
        preds[k].append(j)
    dist = np.full(D, -1)
    dist[0] = 0
    q = deque([0])
    while q:
        k = q.popleft()
        for j in preds[k]:
            if dist[j] < 0:
                dist[j] = dist[k] + 1
                q.append(j)
    unreachable = [int(j) for j in np.flatnonzero(dist < 0)]
    return int(dist.max()), unreachable, dist


def export_transition_graph(kernel, threshold, fmt="json", energies=None, layers=None):
    """Digraph with edges P_{j->k} >= threshold (self-loops omitted)."""
    D = kernel.dim
    E = np.zeros(D) if energies is None else np.asarray(getattr(energies, "energies", energies), dtype=float)
    Ls = np.zeros(D, dtype=int) if layers is None else np.asarray(getattr(layers, "layers", layers))
    edges = _edges(kernel, threshold)
    if fmt.lower() == "json":
        doc = {
            "threshold": threshold,
            "nodes": [{"index": j, "energy": float(E[j]), "layer": int(Ls[j])} for j in range(D)],
            "edges": [{"j": j, "k": k, "probability": p} for j, k, p in edges],
        }
        return json.dumps(doc, indent=2)
    if fmt.lower() == "dot":
        lines = ["digraph transitions {", "  layout=neato;"]
        for j in range(D):
            ang = 2 * np.pi * j / max(D, 1)
            lines.append(
                f'  n{j} [label="E{j}", energy="{E[j]:.10f}", layer={int(Ls[j])}, '
                f'pos="{np.cos(ang) * 5:.4f},{np.sin(ang) * 5:.4f}!"];'
            )
        for j, k, p in edges:
            lines.append(f'  n{j} -> n{k} [weight="{p:.6g}", label="{p:.3f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise DomainError(f"unknown graph format {fmt!r}")
