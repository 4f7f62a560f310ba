import numpy as np
import pytest

from ysyk.disorder import YsykCouplings, sample_lowrank, sample_sykq, sample_ysyk
from ysyk.hamiltonian import (
    ModelParams,
    build_lowrank,
    build_sw_effective,
    build_sykq,
    build_ysyk,
    export_triplets,
)
from ysyk.hilbert import build_space
from ysyk.spectral import diagonalize
from ysyk.testing import dense_fermion_ops, dense_ysyk, syk2_levels_from_single_particle


def test_model_params_control_ratio():
    p = ModelParams(omega0=0.5, g=8.0)
    assert p.control_ratio == pytest.approx(0.5 / 4.0)
    q = ModelParams.from_control_ratio(0.5, g=8.0)
    assert q.omega0 == pytest.approx(2.0)


def test_ysyk_zero_coupling_is_free_boson():
    space = build_space(4, 2, 1)
    zeros = YsykCouplings(g=np.zeros((4, 4, 2), dtype=complex), variance_scale=1.0, seed=0)
    h = build_ysyk(space, ModelParams(omega0=0.3), zeros)
    dense = h.dense()
    assert np.count_nonzero(dense - np.diag(np.diag(dense))) == 0
    evals = np.sort(np.diag(dense).real)
    # eigenvalues omega0 (sum n_k + M/2), each C(N, N/2)-fold degenerate
    expected = np.sort(np.concatenate([0.3 * (n + 1.0) * np.ones(6) for n in (0, 1, 1, 2)]))
    assert np.allclose(evals, expected)


def test_ysyk_matches_dense_kronecker_oracle():
    space = build_space(4, 2, 1)
    couplings = sample_ysyk(4, 2, 1.3, seed=2)
    h = build_ysyk(space, ModelParams(omega0=0.7, g=1.3), couplings).dense()
    oracle = dense_ysyk(space, 0.7, couplings.g)
    assert np.abs(h - oracle).max() < 1e-12
    assert np.abs(h - h.conj().T).max() == 0.0


def test_ysyk_trace_is_free_boson_value():
    space = build_space(8, 4, 1)
    h = build_ysyk(space, ModelParams(omega0=0.9, g=1.0), sample_ysyk(8, 4, 1.0, seed=4))
    # interaction is traceless; Tr H / D = omega0 * M * (N_b + 1) / 2
    assert h.trace() / space.total_dim == pytest.approx(0.9 * 4.0, rel=1e-12)


def test_ysyk_rejects_nonpositive_frequency():
    space = build_space(4, 2, 1)
    with pytest.raises(ValueError):
        build_ysyk(space, ModelParams(omega0=0.0), sample_ysyk(4, 2, 1.0, seed=1))


def test_ysyk_conserves_fermion_number_full_space():
    # the dense oracle on the unrestricted space commutes with total N
    space = build_space(4, 1, 1)
    couplings = sample_ysyk(4, 1, 1.0, seed=6)
    cs = dense_fermion_ops(4)
    number = sum(c.conj().T @ c for c in cs)
    from ysyk.testing import dense_boson_ops

    full = np.kron(number, np.eye(2))
    # rebuild the unrestricted Hamiltonian via the same oracle pieces
    h = np.zeros((32, 32), dtype=complex)
    a = dense_boson_ops(1, 1)[0]
    h += 0.7 * np.kron(np.eye(16), a.conj().T @ a + 0.5 * np.eye(2))
    pref = 1.0 / np.sqrt(2 * 0.7 * 1 * 4)
    block = sum(
        couplings.g[i, j, 0] * (cs[i].conj().T @ cs[j]) for i in range(4) for j in range(4)
    )
    h += pref * np.kron(block, a + a.conj().T)
    assert np.abs(h @ full - full @ h).max() < 1e-12


def test_syk2_spectrum_from_single_particle_levels():
    space = build_space(4, 0)
    couplings = sample_sykq(4, 2, 1.0, seed=11)
    evals = diagonalize(build_sykq(space, couplings)).eigenvalues
    oracle = syk2_levels_from_single_particle(couplings.j_tensor, 2)
    assert np.allclose(evals, oracle, atol=1e-12)


def test_syk4_zero_couplings_zero_matrix():
    from ysyk.disorder import SykqCouplings

    space = build_space(8, 0)
    zeros = SykqCouplings(q=4, n_fermions=8, j_tensor=np.zeros((28, 28), dtype=complex),
                          scale=1.0, seed=0)
    assert build_sykq(space, zeros).matrix.nnz == 0


def test_sykq_hermitian_and_real_spectrum():
    space = build_space(6, 0)
    for q in (2, 4):
        h = build_sykq(space, sample_sykq(6, q, 1.0, seed=13)).dense()
        assert np.abs(h - h.conj().T).max() == 0.0
        evals = np.linalg.eigvalsh(h)
        assert np.all(np.isfinite(evals))
        assert abs(evals.sum() - np.trace(h).real) < 1e-9 * len(evals) * np.abs(h).max()


def test_sw_effective_hermitian_and_scaling():
    couplings = sample_ysyk(8, 4, 1.0, seed=17)
    h1 = build_sw_effective(couplings, omega0=10.0).dense()
    h2 = build_sw_effective(couplings, omega0=20.0).dense()
    assert np.abs(h1 - h1.conj().T).max() < 1e-14
    # explicit g^2/omega0^2 prefactor: doubling omega0 quarters every entry
    assert np.allclose(h2, h1 / 4.0, atol=1e-15)


def test_sw_effective_tracks_lowest_band():
    space = build_space(6, 3, 1)
    fspace = build_space(6, 0)
    couplings = sample_ysyk(6, 3, 1.0, seed=19)
    omega0 = 25.0
    full = diagonalize(build_ysyk(space, ModelParams(omega0=omega0, g=1.0), couplings))
    band = full.eigenvalues[: fspace.fermion_dim] - omega0 * 3 / 2.0
    eff = diagonalize(build_sw_effective(couplings, omega0, fspace)).eigenvalues
    assert np.abs(band - eff).max() < 5e-4  # higher-order corrections only


def test_lowrank_hermitian_number_conserving():
    space = build_space(8, 0)
    h = build_lowrank(sample_lowrank(8, 5, seed=23), space)
    dense = h.dense()
    assert np.abs(dense - dense.conj().T).max() < 1e-14
    assert h.dim == 70


def test_lowrank_single_entry_structure():
    from ysyk.disorder import LowRankCouplings, mode_pairs

    n = 4
    g = np.zeros((n, n, 1))
    g[0, 1, 0] = g[1, 0, 0] = 1.0  # single symmetric entry
    i_idx, j_idx = mode_pairs(n)
    j_pair = 0.5 * (
        g[i_idx[:, None], i_idx[None, :], 0] * g[j_idx[:, None], j_idx[None, :], 0]
        - g[i_idx[:, None], j_idx[None, :], 0] * g[j_idx[:, None], i_idx[None, :], 0]
    )
    c = LowRankCouplings(g=g, j_pair=j_pair, seed=0)
    h = build_lowrank(c, build_space(n, 0)).dense()
    assert np.abs(h - h.conj().T).max() == 0.0
    # couplings built from one g-entry only connect pairs touching modes 0, 1
    assert np.count_nonzero(h) > 0


def test_export_triplets_roundtrip(tmp_path):
    space = build_space(4, 1, 1)
    h = build_ysyk(space, ModelParams(omega0=1.1, g=0.8), sample_ysyk(4, 1, 0.8, seed=29))
    path = tmp_path / "h.txt"
    export_triplets(h, path)
    rows, cols, res, ims = [], [], [], []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        r, c, re_, im_ = line.split()
        rows.append(int(r)), cols.append(int(c)), res.append(float(re_)), ims.append(float(im_))
    import scipy.sparse as sp

    rebuilt = sp.coo_matrix(
        (np.array(res) + 1j * np.array(ims), (rows, cols)), shape=(h.dim, h.dim)
    ).tocsr()
    assert np.abs((rebuilt - h.matrix).toarray()).max() < 1e-15


def test_eigenvalue_sum_matches_trace():
    space = build_space(8, 4, 1)
    h = build_ysyk(space, ModelParams(omega0=0.5, g=1.0), sample_ysyk(8, 4, 1.0, seed=31))
    evals = diagonalize(h).eigenvalues
    bound = 1e-9 * h.dim * np.abs(h.matrix.data).max()
    assert abs(evals.sum() - h.trace()) < bound
