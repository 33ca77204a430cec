import math

import numpy as np
import pytest

from arealaw import (
    ResourceGuardError,
    ValidationError,
    build_reduced_state,
    empirical_vs_mp,
    haar_unitary,
    run_experiment,
    spectral_report,
    wishart_experiment,
)
from arealaw.mc_simulator import ginibre, leg_dimensions, sample_wishart_spectrum

from conftest import (
    adapted_five,
    black_hole,
    black_hole_counts,
    random_marginal,
    single_loop,
    two_loops,
)


def test_haar_unitarity():
    rng = np.random.default_rng(0)
    u = haar_unitary(64, rng)
    assert np.abs(u @ u.conj().T - np.eye(64)).max() < 1e-10
    eigs = np.linalg.eigvals(u)
    assert np.abs(np.abs(eigs) - 1.0).max() < 1e-10


def test_haar_dim_one_is_phase():
    rng = np.random.default_rng(1)
    phases = [haar_unitary(1, rng)[0, 0] for _ in range(200)]
    assert max(abs(abs(z) - 1.0) for z in phases) < 1e-12
    # angles spread over the circle
    angles = np.angle(phases)
    assert angles.min() < -2.0 and angles.max() > 2.0


def test_haar_first_entry_moment():
    # |U_11|^2 is Beta(1, dim - 1): mean 1/dim, var (dim-1)/(dim^2 (dim+1))
    dim, total = 64, 10_000
    rng = np.random.default_rng(2)
    acc = []
    for _ in range(10):
        batch = haar_unitary(dim, rng, size=total // 10)
        acc.append(np.abs(batch[:, 0, 0]) ** 2)
    mean = float(np.concatenate(acc).mean())
    sigma = math.sqrt((dim - 1) / (dim ** 2 * (dim + 1)) / total)
    assert abs(mean - 1.0 / dim) < 3.0 * sigma


def test_haar_guard(monkeypatch):
    rng = np.random.default_rng(3)
    with pytest.raises(ResourceGuardError):
        haar_unitary(5000, rng)
    monkeypatch.setenv("AREALAW_HAAR_DIM_LIMIT", "8000")
    haar_unitary(4097, rng)  # no raise once overridden


def test_state_dim_guard(monkeypatch):
    m = adapted_five()
    with pytest.raises(ResourceGuardError):
        build_reduced_state(m, 8, rng=np.random.default_rng(0))  # 8^10 > 2^24
    monkeypatch.setenv("AREALAW_STATE_DIM_LIMIT", "2")
    with pytest.raises(ResourceGuardError):
        build_reduced_state(single_loop(), 2, rng=np.random.default_rng(0))


def test_adapted_state_uniform_spectrum():
    m = black_hole(traced=[0, 3], d1=1, d2=2)  # crossings: both edges
    for skip in (True, False):
        state = build_reduced_state(
            m, 3, rng=np.random.default_rng(7),
            skip_traced=skip, skip_surviving=skip,
        )
        report = spectral_report(state)
        dim = 3 * 6
        assert report.rank == dim
        assert np.abs(report.eigenvalues[:dim] - 1.0 / dim).max() < 1e-10
        assert report.entropy == pytest.approx(math.log(dim), abs=1e-10)


def test_everything_traced_is_scalar():
    m = black_hole_counts(0, 0, 0)
    state = build_reduced_state(m, 2, rng=np.random.default_rng(0))
    assert state.factor.shape[0] == 1
    report = spectral_report(state)
    assert report.rank == 1
    assert report.entropy == pytest.approx(0.0, abs=1e-12)


def test_nothing_traced_is_pure():
    m = black_hole_counts(1, 2, 1)
    state = build_reduced_state(m, 2, rng=np.random.default_rng(0))
    report = spectral_report(state)
    assert report.rank == 1
    assert report.entropy == pytest.approx(0.0, abs=1e-10)


def test_reduced_state_invariants():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = random_marginal(rng, max_vertices=3, max_edges=3)
        state = build_reduced_state(m, 2, rng=rng)
        assert abs(np.linalg.norm(state.factor) ** 2 - 1.0) < 1e-10
        if state.matrix is not None:
            assert np.abs(state.matrix - state.matrix.conj().T).max() < 1e-12
            assert abs(np.trace(state.matrix).real - 1.0) < 1e-10
        dims = leg_dimensions(m, 2)
        expected = math.prod(dims[l] for l in state.surviving_legs) if \
            state.surviving_legs else 1
        assert state.dim == expected


def test_explicit_unitary_validation():
    m = single_loop()
    rng = np.random.default_rng(0)
    with pytest.raises(ValidationError, match="shape"):
        build_reduced_state(m, 2, unitaries={"V": np.eye(3)}, rng=rng)
    with pytest.raises(ValidationError, match="not unitary"):
        build_reduced_state(m, 2, unitaries={"V": np.ones((4, 4))}, rng=rng)
    with pytest.raises(ValidationError, match="unknown vertex"):
        build_reduced_state(m, 2, unitaries={"W": np.eye(4)}, rng=rng)
    state = build_reduced_state(m, 2, unitaries="identity", rng=rng)
    assert "identity:V" in state.flags


def test_single_loop_vector_path_matches_wishart():
    # same topology through the dense path (explicit Haar) and through the
    # Wishart sampler; rescaled moments must agree within 3 sigma
    m = single_loop(s=1)
    N, samples = 16, 60

    def moments(spectra, rescale, p):
        vals = [float(np.mean((rescale * s) ** p)) for s in spectra]
        return np.mean(vals), np.std(vals, ddof=1) / math.sqrt(len(vals))

    dense = []
    for i in range(samples):
        rng = np.random.default_rng([123, i])
        state = build_reduced_state(m, N, rng=rng, vector_fast_path=False)
        dense.append(spectral_report(state).eigenvalues)
    wish = [sample_wishart_spectrum(N, N, np.random.default_rng([321, i]))
            for i in range(samples)]
    for p in (1, 2, 3):
        m1, s1 = moments(dense, N, p)
        m2, s2 = moments(wish, N, p)
        assert abs(m1 - m2) <= 3.0 * math.hypot(s1, s2) + 1e-12


def test_spectral_report_renyi():
    m = black_hole(traced=[0, 3])
    state = build_reduced_state(m, 2, rng=np.random.default_rng(5))
    report = spectral_report(state, q_list=(0.0, 0.5, 1.0, 2.0, 3.0))
    values = [report.renyi[q] for q in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert report.renyi[0.0] == pytest.approx(math.log(report.rank))
    assert report.renyi[1.0] == report.entropy
    with pytest.raises(ValidationError):
        spectral_report(state, q_list=(-1.0,))


def test_run_experiment_black_hole_case2():
    m = black_hole(traced=[0, 2])
    report = run_experiment(m, 16, samples=10, seed=7)
    assert abs(report.mean_H - (2.0 * math.log(16) - 0.5)) <= 0.02


def test_run_experiment_two_loops():
    report = run_experiment(two_loops(s=2), 8, samples=50, seed=5)
    assert abs(report.mean_H - (2.0 * math.log(8) - 0.5)) <= 0.03
    assert "vector_path" in report.flags


def test_run_experiment_adapted_zero_variance():
    report = run_experiment(adapted_five(), 2, samples=2, seed=1)
    assert report.stderr_H == 0.0
    assert report.per_sample_H[0] == report.per_sample_H[1]
    assert report.mean_H == pytest.approx(5.0 * math.log(2), abs=1e-10)


def test_run_experiment_deterministic():
    m = black_hole(traced=[0, 2])
    a = run_experiment(m, 4, samples=5, seed=99)
    b = run_experiment(m, 4, samples=5, seed=99)
    assert a.per_sample_H == b.per_sample_H
    assert a.mean_H == b.mean_H


def test_run_experiment_jobs_equivalence():
    m = black_hole(traced=[0, 2])
    serial = run_experiment(m, 4, samples=4, seed=13, jobs=1)
    parallel = run_experiment(m, 4, samples=4, seed=13, jobs=2)
    assert serial.per_sample_H == parallel.per_sample_H
    assert serial.mean_H == parallel.mean_H


def test_leg_choice_invariance():
    # same counts, two leg-level completions: Haar invariance makes the
    # distributions identical, so the means agree statistically
    samples, N = 100, 8
    a = run_experiment(black_hole(traced=[0, 1]), N, samples, seed=17)
    b = run_experiment(black_hole(traced=[0, 2]), N, samples, seed=71)
    combined = math.hypot(a.stderr_H, b.stderr_H)
    assert abs(a.mean_H - b.mean_H) <= 3.0 * combined


def test_skip_invariance():
    m = black_hole(traced=[0, 2])
    on = run_experiment(m, 8, samples=3, seed=23,
                        skip_traced=True, skip_surviving=True)
    off = run_experiment(m, 8, samples=3, seed=23,
                         skip_traced=False, skip_surviving=False)
    for h_on, h_off in zip(on.per_sample_H, off.per_sample_H):
        assert abs(h_on - h_off) < 1e-9


def test_purity_and_entropy_bounds():
    rng = np.random.default_rng(29)
    for _ in range(10):
        m = random_marginal(rng, max_vertices=3, max_edges=3)
        state = build_reduced_state(m, 2, rng=rng)
        report = spectral_report(state)
        purity = float(np.sum(report.eigenvalues ** 2))
        ds = state.factor.shape[0]
        dt = state.factor.shape[1]
        assert purity >= 1.0 / ds - 1e-12
        assert report.entropy <= math.log(min(ds, dt)) + 1e-9


def test_guards_before_sampling():
    with pytest.raises(ResourceGuardError):
        run_experiment(adapted_five(), 8, samples=1, seed=0)
    with pytest.raises(ValidationError):
        run_experiment(single_loop(), 4, samples=0, seed=0)


def test_empirical_vs_mp_single_loop():
    report = run_experiment(single_loop(s=1), 64, samples=20, seed=4)
    result = empirical_vs_mp(report, c=1.0, rescale=64.0, max_p=4)
    assert result.theoretical == (1.0, 2.0, 5.0, 14.0)
    for emp, theory in zip(result.empirical, result.theoretical):
        assert abs(emp - theory) <= 0.05 * theory


def test_empirical_vs_mp_degenerate_pure():
    report = run_experiment(black_hole_counts(1, 2, 1), 2, samples=2, seed=0)
    result = empirical_vs_mp(report, c=1.0, rescale=1.0)
    assert len(result.distances) == 4  # reported, no crash


def test_wishart_experiment_page_values():
    r64 = wishart_experiment(64, 64, samples=20, seed=3)
    assert abs(r64.mean_H - (math.log(64) - 0.5)) <= 0.02
    r256 = wishart_experiment(64, 256, samples=20, seed=3)
    assert abs(r256.mean_H - (math.log(64) - 0.125)) <= 0.02
    with pytest.raises(ValidationError):
        wishart_experiment(1, 64, samples=5, seed=0)


def test_ginibre_shape_and_scale():
    rng = np.random.default_rng(17)
    g = ginibre(200, 300, rng)
    assert g.shape == (200, 300)
    # unit-variance complex entries
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.02
