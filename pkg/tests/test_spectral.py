import numpy as np
import pytest
from scipy.integrate import quad

from ysyk.disorder import sample_ysyk
from ysyk.hamiltonian import ModelParams, build_ysyk
from ysyk.hilbert import build_space
from ysyk.spectral import (
    GUE_MEAN_R,
    POISSON_MEAN_R,
    SffCurve,
    detect_plateau,
    detect_ramp,
    diagonalize,
    dos,
    count_peaks,
    fit_power_law,
    gap_ratios,
    heisenberg_time,
    log_grid,
    lowest_cluster,
    reference_gap_distribution,
    segment_clusters,
    sff,
    sff_double_sum,
)


def _ysyk(omega0, seed, n=6, m=3, g=1.0):
    space = build_space(n, m, 1)
    return space, build_ysyk(space, ModelParams(omega0=omega0, g=g), sample_ysyk(n, m, g, seed))


def test_diagonalize_diagonal_matrix():
    h = np.diag([3.0, -1.0, 2.0])
    spec = diagonalize(h)
    assert np.allclose(spec.eigenvalues, [-1.0, 2.0, 3.0])


def test_diagonalize_dense_budget():
    _, h = _ysyk(1.0, seed=1)
    with pytest.raises(ValueError):
        diagonalize(h, dense_budget=10)


def test_lowest_k_dense_vs_lanczos():
    space, h = _ysyk(10.0, seed=2)
    full = diagonalize(h).eigenvalues
    dense_subset = diagonalize(h, mode="lowest_k", k=20).eigenvalues
    lanczos = diagonalize(h, mode="lowest_k", k=20, dense_budget=1).eigenvalues
    assert np.abs(dense_subset - full[:20]).max() < 1e-8
    assert np.abs(lanczos - full[:20]).max() < 1e-8


def test_dos_normalized_and_gaussian_fit():
    rng = np.random.default_rng(3)
    sample = rng.normal(0.3, 1.7, size=40000)
    curve, fit = dos([sample], bins=60)
    widths = np.diff(curve.meta["bin_edges"])
    assert np.sum(curve.values * widths) == pytest.approx(1.0)
    assert fit.mean == pytest.approx(0.3, abs=0.05)
    assert fit.sigma == pytest.approx(1.7, abs=0.05)


def test_dos_single_repeated_eigenvalue():
    curve, _ = dos([np.full(50, 2.0)], bins=11)
    assert np.count_nonzero(curve.values) == 1


def test_dos_rejects_empty():
    with pytest.raises(ValueError):
        dos([])
    with pytest.raises(ValueError):
        dos([np.array([])])


def test_dos_cluster_peak_count():
    # heavy-boson spectrum: one band per total boson occupation (M+1 bands)
    space, h = _ysyk(40.0, seed=4)
    curve, _ = dos([diagonalize(h).eigenvalues], bins=120)
    assert count_peaks(curve) == space.n_bosons + 1


def test_gap_ratios_ladder_and_errors():
    stats = gap_ratios(np.arange(10.0))
    assert np.all(stats.ratios == 1.0)
    assert stats.mean == 1.0
    assert len(stats.ratios) == 8  # D - 2 ratios
    with pytest.raises(ValueError):
        gap_ratios(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        gap_ratios(np.full(6, 4.0))


def test_gap_ratios_degenerate_handling():
    # one vanishing spacing -> ratio 0; a double tie is skipped
    stats = gap_ratios(np.array([0.0, 1.0, 1.0, 2.0, 5.0]))
    assert 0.0 in stats.ratios
    stats2 = gap_ratios(np.array([0.0, 1.0, 1.0, 1.0, 2.0]))
    assert len(stats2.ratios) == 2


def test_gap_ratio_poisson_reference_value():
    rng = np.random.default_rng(5)
    levels = np.sort(rng.uniform(0, 1, size=200_000))
    assert gap_ratios(levels).mean == pytest.approx(POISSON_MEAN_R, abs=0.005)


def test_gap_ratio_gue_reference_value():
    rng = np.random.default_rng(6)
    n = 1400
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (x + x.conj().T) / 2.0
    evals = np.linalg.eigvalsh(h)
    bulk = evals[n // 4 : 3 * n // 4]
    assert gap_ratios(bulk).mean == pytest.approx(GUE_MEAN_R, abs=0.02)


def test_gap_ratios_affine_invariance():
    rng = np.random.default_rng(7)
    levels = np.sort(rng.normal(size=300))
    a = gap_ratios(levels).ratios
    b = gap_ratios(3.7 * levels + 11.0).ratios
    assert np.allclose(a, b, atol=1e-12)


def test_reference_distributions():
    assert reference_gap_distribution("poisson", 0.0) == pytest.approx(2.0)
    assert reference_gap_distribution("wigner_dyson", 0.0, beta=2) == 0.0
    for kind, kwargs in (("poisson", {}), ("wigner_dyson", {"beta": 2})):
        mass, _ = quad(lambda r: float(reference_gap_distribution(kind, r, **kwargs)), 0, 1)
        assert mass == pytest.approx(1.0, abs=1e-8)
    # the folded surmise integral overshoots the large-matrix value slightly
    mean, _ = quad(lambda r: r * float(reference_gap_distribution("wigner_dyson", r, beta=2)), 0, 1)
    assert mean == pytest.approx(2.0 * np.sqrt(3.0) / np.pi - 0.5, abs=1e-9)
    assert mean == pytest.approx(GUE_MEAN_R, abs=0.004)
    with pytest.raises(ValueError):
        reference_gap_distribution("poisson", 1.5)
    with pytest.raises(ValueError):
        reference_gap_distribution("wigner_dyson", 0.5, beta=3)


def test_sff_normalization_and_two_level_closed_form():
    times = np.linspace(0.0, 20.0, 101)
    delta = 0.73
    curve = sff([np.array([0.0, delta])], beta=0.0, times=times)
    assert curve.values[0] == pytest.approx(1.0)
    closed = (1.0 + np.cos(delta * times)) / 2.0
    assert np.abs(curve.values - closed).max() < 1e-12
    brute = sff_double_sum(np.array([0.0, delta]), 0.0, times)
    assert np.abs(curve.values - brute).max() < 1e-12


def test_sff_brute_force_equivalence_and_shift_invariance():
    rng = np.random.default_rng(8)
    evals = np.sort(rng.normal(size=40))
    times = log_grid(0.01, 100.0, 50)
    for beta in (0.0, 0.7):
        a = sff([evals], beta, times).values
        b = sff_double_sum(evals, beta, times)
        c = sff([evals + 123.456], beta, times).values
        assert np.abs(a - b).max() < 1e-12
        assert np.abs(a - c).max() < 1e-12


def test_sff_time_reversal_at_infinite_temperature():
    rng = np.random.default_rng(9)
    evals = np.sort(rng.normal(size=30))
    times = np.linspace(0.5, 5.0, 7)
    assert np.allclose(sff_double_sum(evals, 0.0, times), sff_double_sum(evals, 0.0, -times))


def test_sff_late_time_average_is_inverse_dimension():
    rng = np.random.default_rng(10)
    evals = np.sort(rng.normal(size=64))
    times = np.linspace(5e3, 5e4, 400)
    mean = sff([evals], beta=0.0, times=times).values.mean()
    assert mean == pytest.approx(1.0 / 64.0, rel=0.25)


def test_sff_rejects_negative_times_and_empty():
    with pytest.raises(ValueError):
        sff([np.arange(3.0)], 0.0, np.array([-1.0]))
    with pytest.raises(ValueError):
        sff([], 0.0, np.array([0.0]))


def test_segment_clusters_basics():
    assert segment_clusters(np.linspace(0, 1, 30)) == [(0, 30)]
    two = np.concatenate([np.linspace(0, 1, 20), np.linspace(100, 101, 20)])
    assert segment_clusters(two) == [(0, 20), (20, 40)]


def test_segment_clusters_ysyk_lowest_band():
    space = build_space(8, 4, 1)
    h = build_ysyk(space, ModelParams(omega0=10.0, g=1.0), sample_ysyk(8, 4, 1.0, seed=11))
    evals = diagonalize(h).eigenvalues
    lo, hi = lowest_cluster(evals)
    assert (lo, hi) == (0, space.fermion_dim)  # zero-boson sector


def test_heisenberg_time():
    evals = np.arange(0.0, 10.0, 0.5)
    assert heisenberg_time(evals) == pytest.approx(2 * np.pi / 0.5)


def test_fit_power_law_recovery():
    t = log_grid(1.0, 100.0, 60)
    curve = SffCurve(times=t, values=2.5 * t ** 1.1)
    a, b = fit_power_law(curve, (1.0, 100.0))
    assert a == pytest.approx(2.5, rel=1e-10)
    assert b == pytest.approx(1.1, abs=1e-12)


def test_detect_plateau_constant_and_absent():
    t = log_grid(1.0, 1000.0, 200)
    flat = SffCurve(times=t, values=np.full(200, 1e-3))
    assert detect_plateau(flat, 1e-3, search_start=3.0) == pytest.approx(t[t >= 3.0][0])
    ramp = SffCurve(times=t, values=1e-6 * t)
    assert detect_plateau(ramp, 1e-3, search_start=3.0) is None


def test_detect_plateau_tolerance_monotonicity():
    rng = np.random.default_rng(12)
    t = log_grid(1.0, 1000.0, 300)
    values = 1e-3 * (1.0 + 0.2 * np.exp(-t / 50.0) + 0.03 * rng.normal(size=300))
    curve = SffCurve(times=t, values=values)
    detections = [detect_plateau(curve, 1e-3, delta=d, window=5.0, search_start=2.0)
                  for d in (0.02, 0.05, 0.1, 0.2)]
    found = [d for d in detections if d is not None]
    assert found == sorted(found, reverse=True)  # larger delta never later


def test_detect_ramp_reference_match_and_absent():
    t = log_grid(1.0, 3000.0, 400)
    ref = (1e-6, 1.0)
    window = (16.0, 1120.0)
    same = SffCurve(times=t, values=ref[0] * t ** ref[1])
    hit = detect_ramp(same, ref, window)
    assert hit == pytest.approx(t[t >= window[0]][0])
    below = SffCurve(times=t, values=0.2 * ref[0] * t ** ref[1])
    assert detect_ramp(below, ref, window) is None


def test_detect_ramp_crossing_between_grid_points():
    t = log_grid(1.0, 3000.0, 80)  # coarse grid: no point inside tolerance
    ref = (1e-6, 1.0)
    values = ref[0] * t ** ref[1] * (1.0 + 0.5 * np.tanh((np.log(t) - np.log(300.0)) * 2) * -1)
    curve = SffCurve(times=t, values=values)
    hit = detect_ramp(curve, ref, (16.0, 2000.0), delta=1e-9)
    assert hit is None or hit > 16.0
