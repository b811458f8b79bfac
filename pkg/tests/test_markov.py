import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import nbinom

from dissipath.errors import ContractError, DomainError
from dissipath.markov import (
    MarkovKernel,
    absorption_cdf,
    check_uniform_drift,
    clopper_pearson,
    export_transition_graph,
    kernel_from_gamma,
    kernel_from_jumps,
    layer_partition,
    layer_sweep,
    layered_chain,
    linear_cooling_budget,
    longest_downhill_path,
    populated_window,
    simulate_hitting,
    t_star,
    verify_tail_bound,
    warm_start_radius,
)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), D=st.integers(2, 10))
def test_kernel_rows_are_stochastic_and_ground_absorbs(seed, D):
    rng = np.random.default_rng(seed)
    gamma = rng.exponential(size=(D, D)) * (rng.random((D, D)) < 0.5)
    K = kernel_from_gamma(gamma)
    np.testing.assert_allclose(K.P.sum(axis=1), 1.0, atol=1e-14)
    assert np.all(K.P >= 0)
    assert K.P[0, 0] == 1.0
    dead = np.flatnonzero(gamma.sum(axis=1) == 0)
    for j in dead[dead > 0]:
        assert K.P[j, j] == 1.0


def test_kernel_from_jumps_uses_squared_amplitudes():
    K = np.array([[0, 0.6, 0.0], [0, 0, 0.8], [0, 0, 0]])
    k = kernel_from_jumps([K, 0.5 * K])
    # row j holds transitions out of j: gamma[2, 1] = (1 + 0.25) * 0.64
    assert k.gamma[2, 1] == pytest.approx(1.25 * 0.64)
    assert k.P[2, 1] == 1.0 and k.P[1, 0] == 1.0


def test_layers_use_ceiling_with_slack():
    part = layer_partition([0.0, 0.1, 0.2, 0.2000000000001, 0.35], 0.1)
    assert part.layers.tolist() == [0, 1, 2, 2, 4]
    with pytest.raises(DomainError):
        layer_partition([0.0, 1.0], 0.0)


def test_warm_start_radius():
    part = layer_partition(np.arange(5.0), 1.0)
    mu = np.array([0.5, 0.3, 0.15, 0.05, 0.0])
    assert warm_start_radius(mu, part, 0.0) == 3
    assert warm_start_radius(mu, part, 0.05) == 2
    assert warm_start_radius(mu, part, 0.2) == 1
    with pytest.raises(DomainError):
        warm_start_radius(np.array([0.5, 0.1, 0, 0, 0]), part, 0.0)
    assert populated_window(mu).tolist() == [1, 2, 3]


@pytest.mark.parametrize("p", [0.1, 0.5, 1.0])
def test_layered_chain_drift_equals_construction(p):
    kernel, E = layered_chain(6, p)
    rep = check_uniform_drift(kernel, E, 1.0)
    assert rep.p_min_achieved == pytest.approx(p)
    sweep = layer_sweep(kernel, E, 1.0)
    assert sweep[2.0].p_min_achieved == 0.0  # a single step drops one layer only
    ell, unreachable, _ = longest_downhill_path(kernel, min(p, 0.5))
    assert ell == 6 and not unreachable


def test_drift_violators_and_window():
    kernel, E = layered_chain(3, 0.2)
    rep = check_uniform_drift(kernel, E, 1.0, window=[2, 3], threshold=0.5)
    assert rep.violators == [2, 3] and rep.window.tolist() == [2, 3]


def test_hitting_matches_negative_binomial():
    # from layer L each step succeeds with probability p: tau_0 ~ L + NegBin(L, p)
    L, p = 4, 0.35
    kernel, _ = layered_chain(L, p)
    mu = np.zeros(L + 1)
    mu[L] = 1.0
    stats = simulate_hitting(kernel, mu, 50_000, seed=12)
    t = np.arange(0, 60)
    exact = nbinom.cdf(t - L, L, p)
    assert np.max(np.abs(stats.cdf(t) - exact)) < 0.01
    np.testing.assert_allclose(absorption_cdf(kernel, mu, 59), exact, atol=1e-12)


def test_hitting_is_seeded():
    kernel, _ = layered_chain(5, 0.4)
    mu = np.full(6, 1 / 6)
    a = simulate_hitting(kernel, mu, 1000, seed=3).samples
    b = simulate_hitting(kernel, mu, 1000, seed=3).samples
    c = simulate_hitting(kernel, mu, 1000, seed=4).samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_non_absorbing_kernel_is_rejected():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ContractError):
        simulate_hitting(MarkovKernel(P, P, False), np.array([0.0, 1.0]), 10, 0)


def test_t_star_and_budget():
    assert t_star(5, 0.3, 0.01) == int(np.ceil(2 * 5 / 0.3 + 8 / 0.3 * np.log(100)))
    assert linear_cooling_budget(1.0, 4, 0.1, 0.5, 0.01) == int(np.ceil(4 * 40 + 16 * np.log(100)))
    with pytest.raises(DomainError):
        linear_cooling_budget(1.0, 4, 0.0, 0.5, 0.01)


def test_clopper_pearson_edges():
    assert clopper_pearson(0, 100)[0] == 0.0
    assert clopper_pearson(100, 100)[1] == 1.0
    lo, hi = clopper_pearson(0, 100_000)
    assert hi == pytest.approx(1 - 0.025 ** (1 / 100_000), rel=1e-6)


def test_tail_bound_fails_when_p_min_is_overstated():
    kernel, _ = layered_chain(10, 0.05)
    mu = np.zeros(11)
    mu[10] = 1.0
    stats = simulate_hitting(kernel, mu, 20_000, seed=1)
    assert not verify_tail_bound(stats, 10, 0.9, 0.0, 0.01)["passes"]
    assert verify_tail_bound(stats, 10, 0.05, 0.0, 0.01)["passes"]


def test_graph_exports():
    kernel, E = layered_chain(3, 0.3)
    doc = json.loads(export_transition_graph(kernel, 0.1, "json", E, layer_partition(E, 1.0)))
    assert len(doc["nodes"]) == 4
    assert {(e["j"], e["k"]) for e in doc["edges"]} == {(1, 0), (2, 1), (3, 2)}
    dot = export_transition_graph(kernel, 0.1, "dot", E)
    assert dot.startswith("digraph") and "n3 -> n2" in dot
    with pytest.raises(DomainError):
        export_transition_graph(kernel, 0.1, "svg")
    with pytest.raises(DomainError):
        longest_downhill_path(kernel, 1.1)


def test_h4_square_kernel_reaches_ground(h4_ts_point):
    from dissipath.lindblad import FilterSpec
    from dissipath.lindblad.evolve import build_generator, default_jump_sources

    labels, sources = default_jump_sources(h4_ts_point)
    gen = build_generator(h4_ts_point.eig, sources, FilterSpec("ideal"), labels)
    kernel = kernel_from_jumps(gen.jumps)
    ell, unreachable, dist = longest_downhill_path(kernel, 0.01)
    assert not unreachable and 1 <= ell <= 6
    # the ideal filter never moves population upward
    E = h4_ts_point.eig.energies
    up = E[None, :] > E[:, None] + 1e-10
    assert np.all(kernel.P[up] == 0)
