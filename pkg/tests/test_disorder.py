import numpy as np
import pytest

from ysyk.disorder import (
    mode_pairs,
    realization_seed,
    sample_lowrank,
    sample_sykq,
    sample_ysyk,
)


def test_ysyk_same_seed_bit_identical():
    a = sample_ysyk(8, 4, 1.0, seed=7)
    b = sample_ysyk(8, 4, 1.0, seed=7)
    assert np.array_equal(a.g, b.g)
    c = sample_ysyk(8, 4, 1.0, seed=8)
    assert not np.array_equal(a.g, c.g)


def test_ysyk_hermiticity():
    c = sample_ysyk(8, 4, 1.0, seed=3)
    assert c.g[1, 2, 0] == np.conj(c.g[2, 1, 0])
    assert np.allclose(c.g, np.conj(np.transpose(c.g, (1, 0, 2))))
    assert np.all(np.abs(c.g[np.arange(8), np.arange(8), :].imag) == 0)


def test_ysyk_variance_monte_carlo():
    # pooled second moment over ~1e5 entries matches g^2 within 3 sigma
    pooled = []
    for s in range(400):
        pooled.append(np.abs(sample_ysyk(8, 4, 1.0, seed=realization_seed(11, s)).g) ** 2)
    pooled = np.concatenate([p.ravel() for p in pooled])
    stderr = pooled.std(ddof=1) / np.sqrt(len(pooled))
    assert abs(pooled.mean() - 1.0) < 3 * stderr
    assert abs(np.mean([sample_ysyk(8, 4, 1.0, realization_seed(12, s)).g.mean().real
                        for s in range(50)])) < 0.01


@pytest.mark.parametrize("q,expected", [(2, 1.0 / 8.0), (4, 1.0 / 256.0)])
def test_sykq_variance(q, expected):
    pooled = []
    for s in range(300):
        pooled.append(np.abs(sample_sykq(8, q, 1.0, realization_seed(13, s)).j_tensor) ** 2)
    pooled = np.concatenate([p.ravel() for p in pooled])
    stderr = pooled.std(ddof=1) / np.sqrt(len(pooled))
    assert abs(pooled.mean() - expected) < 3 * stderr


def test_sykq_hermiticity_and_validation():
    c = sample_sykq(8, 4, 1.0, seed=5)
    rng = np.random.default_rng(0)
    p = c.j_tensor.shape[0]
    for _ in range(20):
        a, b = rng.integers(0, p, size=2)
        assert c.j_tensor[b, a] == np.conj(c.j_tensor[a, b])
    with pytest.raises(ValueError):
        sample_sykq(8, 3, 1.0, seed=1)
    with pytest.raises(ValueError):
        sample_sykq(2, 4, 1.0, seed=1)


def test_lowrank_variance_matches_quartic_target():
    # disjoint-pair couplings should have Var = 2/N^3 at unit strength
    n = 8
    i_idx, j_idx = mode_pairs(n)
    disjoint = [
        (a, b)
        for a in range(len(i_idx))
        for b in range(len(i_idx))
        if {int(i_idx[a]), int(j_idx[a])}.isdisjoint({int(i_idx[b]), int(j_idx[b])})
    ]
    sel_a = np.array([d[0] for d in disjoint])
    sel_b = np.array([d[1] for d in disjoint])
    pooled = []
    for s in range(300):
        j = sample_lowrank(n, 10, realization_seed(17, s)).j_pair
        pooled.append(j[sel_a, sel_b] ** 2)
    pooled = np.concatenate(pooled)
    stderr = pooled.std(ddof=1) / np.sqrt(len(pooled))
    assert abs(pooled.mean() - 2.0 / n ** 3) < 3 * stderr


def test_lowrank_symmetries():
    c = sample_lowrank(6, 3, seed=9)
    # g symmetric per factor, j_pair symmetric under pair exchange
    assert np.array_equal(c.g, np.transpose(c.g, (1, 0, 2)))
    assert np.allclose(c.j_pair, c.j_pair.T, atol=1e-15)
    # antisymmetry under swapping within a pair, checked from the raw formula
    g = c.g
    i, j, k, l = 0, 2, 1, 4
    direct = 0.5 * np.mean(g[i, k] * g[j, l] - g[i, l] * g[j, k])
    swapped = 0.5 * np.mean(g[j, k] * g[i, l] - g[j, l] * g[i, k])
    assert swapped == -direct


def test_lowrank_single_factor_is_unaveraged_product():
    c = sample_lowrank(6, 1, seed=21)
    g = c.g[:, :, 0]
    i_idx, j_idx = mode_pairs(6)
    expect = 0.5 * (
        g[i_idx[:, None], i_idx[None, :]] * g[j_idx[:, None], j_idx[None, :]]
        - g[i_idx[:, None], j_idx[None, :]] * g[j_idx[:, None], i_idx[None, :]]
    )
    assert np.allclose(c.j_pair, expect, atol=1e-15)


def test_realization_seed_deterministic_and_spread():
    assert realization_seed(42, 0) == realization_seed(42, 0)
    seeds = {realization_seed(42, i) for i in range(100)}
    assert len(seeds) == 100
    assert realization_seed(42, 3, stream=1) != realization_seed(42, 3)
