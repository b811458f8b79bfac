import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipath.errors import ContractError, DomainError, FrequencyRangeError, IntegratorFailure
from dissipath.lindblad import (
    DensityState,
    FilterSpec,
    apply_exact_step,
    apply_strang_step,
    build_filtered_jump,
    dirichlet_envelope,
    filter_fourier_coeffs,
    filter_response,
    kick_schedule,
    lindblad_superoperator,
    qdrift_step,
    square_wave_coeff_exact,
    square_wave_jump,
    superoperator_step,
    time_support,
)
from dissipath.lindblad.evolve import build_generator, default_jump_sources, evolve_along_path, transport_infidelity
from dissipath.lindblad.jumps import FilteredJump, LindbladGenerator, bohr_frequencies
from dissipath.lindblad.leakage import gapped_model, log_concavity_violation, measured_leakage, running_min
from dissipath.lindblad.steppers import CounterStream, check_weights
from dissipath.spectral import eigendecompose


def generator_from(Ks, energies=None):
    D = Ks[0].shape[0]
    E = np.arange(D, dtype=float) if energies is None else energies
    return LindbladGenerator([FilteredJump(K, 0.0, None, None, 0.0) for K in Ks], eigendecompose(np.diag(E)))


def random_K(rng, D):
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    return X / np.linalg.norm(X, 2)


def random_rho(rng, D):
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    r = X @ X.conj().T
    return r / np.trace(r).real


# filters -------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 4, 25, 200])
def test_square_wave_coefficients_match_closed_form(n):
    k, c = filter_fourier_coeffs(n, 3.0)
    np.testing.assert_allclose(c, square_wave_coeff_exact(k), atol=1e-13)


def test_square_wave_response_is_real_and_converges():
    spec = FilterSpec("square", n_omega=400, omega_period=4.0)
    om = np.array([-1.5, -0.5, 0.5, 1.5])
    f = filter_response(spec, om)
    assert np.max(np.abs(f.imag)) < 1e-12
    np.testing.assert_allclose(f.real, [1, 1, 0, 0], atol=5e-3)
    assert filter_response(spec, np.array([0.0]))[0].real == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [5, 50, 500])
def test_dirichlet_envelope_bounds_the_tail(n):
    spec = FilterSpec("square", n_omega=n, omega_period=4.0)
    for delta in (0.02, 0.1, 0.5):
        om = np.linspace(delta, 1.0, 20000)  # |omega| <= Omega/4, the band the alias guard admits
        above = np.max(np.abs(filter_response(spec, om)))
        below = np.max(np.abs(1 - filter_response(spec, -om)))
        env = dirichlet_envelope(delta, spec.support)
        assert above <= env and below <= env


def test_alias_guard():
    spec = FilterSpec("square", n_omega=10, omega_period=2.0)
    with pytest.raises(FrequencyRangeError):
        filter_response(spec, np.array([1.0]))
    eig = eigendecompose(np.diag([0.0, 1.5]))
    with pytest.raises(FrequencyRangeError):
        build_filtered_jump(np.array([[0, 1], [1, 0]], dtype=complex), eig, spec)


def test_gevrey_response_limits():
    spec = FilterSpec("gevrey", width=2000.0, band=0.1, m_s=200)
    f = filter_response(spec, np.array([-1.0, -0.3, 0.3, 1.0])).real
    np.testing.assert_allclose(f, [1, 1, 0, 0], atol=1e-10)


def test_time_support_formulas():
    T, n = time_support(FilterSpec("square"), 0.1, 0.01, dt=0.5)
    assert T == pytest.approx(2 / (np.pi * 0.1 * 0.01)) and n == pytest.approx(T / 0.5)
    T, _ = time_support(FilterSpec("gevrey", alpha=2.0), 0.1, 0.01)
    assert T == pytest.approx(10 * np.log(100) ** 2)
    assert time_support(FilterSpec("ideal"), 0.1, 0.01)[0] == 0.0
    with pytest.raises(DomainError):
        time_support(FilterSpec("square"), 0.1, 1.5)


def test_filter_spec_validation():
    for kw in ({"kind": "box"}, {"n_omega": 0}, {"alpha": 1.0}, {"m_s": 2}, {"band": 0.0}):
        with pytest.raises(DomainError):
            FilterSpec(**kw)


# jumps ---------------------------------------------------------------------


def test_bohr_frequencies_snap_degeneracies():
    W = bohr_frequencies([0.0, 1.0, 1.0 + 1e-13])
    assert W[2, 1] == 0.0 and W[1, 0] == 1.0


def test_ideal_jump_only_cools_and_has_zero_leakage():
    eig, A = gapped_model(10, 0.05, seed=1)
    fj = build_filtered_jump(A, eig, FilterSpec("ideal"))
    assert np.all(np.tril(fj.K) == 0)  # only E_j < E_k entries survive
    assert fj.leakage == 0.0 and fj.excited_leakage == 0.0


def test_excited_leakage_excludes_ground_component():
    eig, A = gapped_model(12, 0.1, seed=2)
    spec = FilterSpec("square", n_omega=20, omega_period=4.0)
    exc, full = measured_leakage(A, eig, spec)
    assert exc <= full
    assert full**2 == pytest.approx(exc**2 + abs(0.5 * A[0, 0]) ** 2, rel=1e-10)


def test_kick_schedule_skips_zero_modes():
    kicks = kick_schedule(FilterSpec("square", n_omega=4, omega_period=4.0), 0.01)
    assert [k.k for k in kicks] == [-3, -1, 0, 1, 3]
    assert all(k.axis == ("X" if k.k == 0 else "Y") for k in kicks)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), D=st.integers(2, 6), n=st.integers(1, 3), real=st.booleans())
def test_generator_matches_superoperator(seed, D, n, real):
    rng = np.random.default_rng(seed)
    if real:
        Ks = [np.exp(1j * rng.uniform(0, 6)) * rng.normal(size=(D, D)) for _ in range(n)]
    else:
        Ks = [random_K(rng, D) for _ in range(n)]
    gen = generator_from(Ks)
    assert (gen._real is not None) == real
    rho = random_rho(rng, D)
    out = lindblad_superoperator(Ks) @ rho.reshape(-1, order="F")
    np.testing.assert_allclose(gen.apply(rho), out.reshape(D, D, order="F"), atol=1e-12)


# steppers ------------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), D=st.integers(2, 8), tau=st.floats(1e-3, 2.0))
def test_exact_step_is_a_channel(seed, D, tau):
    rng = np.random.default_rng(seed)
    gen = generator_from([random_K(rng, D), random_K(rng, D)])
    out = apply_exact_step(DensityState(random_rho(rng, D)), gen, tau)
    assert out.check(trace_tol=1e-12, pos_tol=1e-10)


def test_exact_step_zero_and_negative_time():
    rng = np.random.default_rng(0)
    gen = generator_from([random_K(rng, 3)])
    st0 = DensityState(random_rho(rng, 3))
    assert np.array_equal(apply_exact_step(st0, gen, 0.0).rho, st0.rho)
    with pytest.raises(DomainError):
        apply_exact_step(st0, gen, -1.0)
    with pytest.raises(ContractError):
        apply_exact_step(DensityState(random_rho(rng, 4)), gen, 0.1)


def test_exact_step_flags_non_trace_preserving_dynamics():
    class Leaky(LindbladGenerator):
        def apply(self, rho):
            return -rho  # not a Lindbladian: trace decays

    gen = Leaky([FilteredJump(np.zeros((2, 2)), 0.0)], eigendecompose(np.eye(2)))
    with pytest.raises(IntegratorFailure):
        apply_exact_step(DensityState.basis_state(0, 2), gen, 0.1)


def test_strang_matches_square_wave_generator_at_small_tau():
    rng = np.random.default_rng(4)
    E = np.array([0.0, 0.3, 0.7, 1.1])
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A = (X + X.conj().T) / 4
    eig = eigendecompose(np.diag(E))
    spec = FilterSpec("square", n_omega=6, omega_period=4.0)
    st0 = DensityState(random_rho(rng, 4))
    tau = 1e-3
    a = apply_strang_step(st0, A, eig, spec, tau, in_eigenbasis=True)
    b = superoperator_step(st0, [square_wave_jump(A, E, spec)], tau)
    assert np.max(np.abs(a.rho - b.rho)) < 1e-6
    assert a.check()
    with pytest.raises(DomainError):
        apply_strang_step(st0, A, eig, FilterSpec("ideal"), tau)


def test_qdrift_is_reproducible_and_follows_weights():
    rng = np.random.default_rng(5)
    gen = generator_from([random_K(rng, 3) for _ in range(3)])
    st0 = DensityState(random_rho(rng, 3))
    a1 = [qdrift_step(st0, gen, 0.0, 42, c, weights=[0.7, 0.2, 0.1])[1] for c in range(4000)]
    a2 = [qdrift_step(st0, gen, 0.0, 42, c, weights=[0.7, 0.2, 0.1])[1] for c in range(4000)]
    assert a1 == a2
    freq = np.bincount(a1, minlength=3) / 4000
    np.testing.assert_allclose(freq, [0.7, 0.2, 0.1], atol=0.03)
    out, a = qdrift_step(st0, gen, 0.2, 42, 0)
    assert out.check()
    assert CounterStream(1).uniform(5) == CounterStream(1).uniform(5)


def test_qdrift_weight_validation():
    with pytest.raises(DomainError):
        check_weights([0.5, 0.6], 2)
    with pytest.raises(DomainError):
        check_weights([1.0, 0.0], 2)


def test_density_state_validation():
    with pytest.raises(ContractError):
        DensityState(np.zeros((2, 3)))
    with pytest.raises(ContractError):
        DensityState(np.diag([1.5, -0.5]).astype(complex)).check()


# evolution on the H4 path --------------------------------------------------


def test_cooling_lowers_energy_and_writes_csv(h4_small_mesh, tmp_path):
    _, mesh = h4_small_mesh
    pts = mesh.points[-3:]
    labels, sources = default_jump_sources(pts[0])
    spec = FilterSpec("ideal")
    short = evolve_along_path(pts, sources, spec, 0.01, 1, labels=labels)
    longer = evolve_along_path(pts, sources, spec, 0.01, 4, labels=labels, track_ground=True)
    assert np.all(longer.column("dE") <= short.column("dE") + 1e-12)
    assert np.all(longer.column("infidelity") <= transport_infidelity(pts) + 1e-12)
    for r in longer.records:
        assert np.all(np.diff(r.ground_populations) >= -1e-12)
    longer.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["geometry_index", "s", "E0", "dE", "infidelity", "N_T"] and len(rows) == 4
    rho = longer.final_state
    assert abs(np.trace(rho) - 1) < 1e-9


def test_qdrift_and_strang_paths_run(h4_small_mesh):
    _, mesh = h4_small_mesh
    pts = mesh.points[-2:]
    labels, sources = default_jump_sources(pts[0], pairs=[(0, 2), (1, 3)], flavors=("X",))
    q1 = evolve_along_path(pts, sources, FilterSpec("ideal"), 0.05, 3, "qdrift", labels=labels, seed=3)
    q2 = evolve_along_path(pts, sources, FilterSpec("ideal"), 0.05, 3, "qdrift", labels=labels, seed=3)
    assert np.array_equal(q1.final_state, q2.final_state)
    spec = FilterSpec("square", n_omega=4, omega_period=4 * 6.0)
    s = evolve_along_path(pts, sources, spec, 0.05, 2, "strang", labels=labels)
    assert np.all(np.isfinite(s.column("dE")))
    with pytest.raises(DomainError):
        evolve_along_path(pts, sources, FilterSpec("ideal"), 0.05, 2, "strang")
    with pytest.raises(DomainError):
        evolve_along_path(pts, sources, FilterSpec("ideal"), 0.0, 2)


def test_build_generator_labels(h4_ts_point):
    labels, sources = default_jump_sources(h4_ts_point)
    gen = build_generator(h4_ts_point.eig, sources, FilterSpec("ideal"), labels)
    assert len(gen.jumps) == 56 and gen.jumps[0].source == labels[0]
    assert gen.strength() > 0


# leakage helpers -----------------------------------------------------------


def test_gapped_model_shape():
    eig, A = gapped_model(16, 0.05, h_norm=2.0, seed=3)
    assert eig.energies[0] == 0.0 and eig.energies[1] == pytest.approx(0.05)
    assert eig.energies[-1] == pytest.approx(2.0)
    assert np.linalg.norm(A, 2) == pytest.approx(1.0)


def test_log_concavity_helpers():
    x = np.geomspace(1, 100, 10)
    assert log_concavity_violation(x, np.exp(-x)) <= 0
    assert log_concavity_violation(x, x**-2.0) == pytest.approx(0.0, abs=1e-12)
    assert log_concavity_violation(x, np.exp(x / 50)) >= 0
    np.testing.assert_array_equal(running_min([3, 1, 2, 0.5]), [3, 1, 1, 0.5])
