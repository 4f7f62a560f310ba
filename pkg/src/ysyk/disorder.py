"""Random-coupling ensembles with deterministic, reproducible seeding.

All samplers draw from ``numpy``'s PCG64 generator seeded through
``SeedSequence``; the draw order is fixed and documented per sampler, so an
identical ``(sampler, seed, shape)`` triple yields bit-identical couplings on
any platform.  Per-realization seeds for ensemble runs derive from a base
seed and the realization index via :func:`realization_seed`, which keeps
parallel generation order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "YsykCouplings",
    "SykqCouplings",
    "LowRankCouplings",
    "realization_seed",
    "sample_ysyk",
    "sample_sykq",
    "sample_lowrank",
    "mode_pairs",
]


@dataclass(frozen=True)
class YsykCouplings:
    """Yukawa vertex tensor ``g[i, j, k]``, Hermitian in the fermion indices,
    with ``E|g_{ij,k}|^2 = variance_scale**2`` for every entry."""

    g: np.ndarray  # complex, shape (N, N, M)
    variance_scale: float
    seed: int

    @property
    def n_fermions(self) -> int:
        return self.g.shape[0]

    @property
    def n_bosons(self) -> int:
        return self.g.shape[2]


@dataclass(frozen=True)
class SykqCouplings:
    """Random q-body tensor on canonically ordered index sets.

    ``j_tensor[a, b]`` couples creation set ``index_sets[a]`` to annihilation
    set ``index_sets[b]``; Hermiticity holds as ``j_tensor[b, a] ==
    conj(j_tensor[a, b])``, so the swapped-set partner is generated by plain
    matrix access.  The per-coupling variance follows the q-body scaling
    ``J^2 (q/2)! (q/2-1)! / N^(q-1)``.
    """

    q: int
    n_fermions: int
    j_tensor: np.ndarray
    scale: float  # the overall coupling strength J
    seed: int

    @property
    def index_sets(self) -> list[tuple]:
        return list(combinations(range(self.n_fermions), self.q // 2))

    @property
    def variance(self) -> float:
        from math import factorial

        q = self.q
        return self.scale ** 2 * factorial(q // 2) * factorial(q // 2 - 1) / self.n_fermions ** (q - 1)


@dataclass(frozen=True)
class LowRankCouplings:
    """Factorized quartic couplings built from ``M`` real symmetric matrices.

    ``j_pair[a, b] = (1/M) sum_s (g_{ik,s} g_{jl,s} - g_{il,s} g_{jk,s}) / 2``
    for pairs ``a = (i < j)`` and ``b = (k < l)``; antisymmetry under ``i<->j``
    and ``k<->l`` is built in, and symmetry of each ``g_s`` makes the quartic
    Hamiltonian Hermitian.
    """

    g: np.ndarray  # real, shape (N, N, M), symmetric in the first two axes
    j_pair: np.ndarray  # real, shape (P, P) over ordered pairs
    seed: int

    @property
    def n_fermions(self) -> int:
        return self.g.shape[0]

    @property
    def n_bosons(self) -> int:
        return self.g.shape[2]


def realization_seed(base_seed: int, index: int, stream: int = 0) -> int:
    """Derive the 64-bit seed of realization ``index`` from ``base_seed``.

    Uses ``SeedSequence`` spawn keys, so realizations can be generated in any
    order or in parallel without changing the streams.  ``stream`` separates
    independent families of realizations under one base seed (e.g. benchmark
    samples drawn alongside model samples, or sweep points in independent
    couplings mode).
    """
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(stream, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_ysyk(n_fermions: int, n_bosons: int, g: float, seed: int) -> YsykCouplings:
    """Sample the Yukawa tensor: for each boson mode an independent Hermitian
    matrix with complex Gaussian off-diagonal entries and real Gaussian
    diagonal, all with ``E|g_{ij,k}|^2 = g^2``.

    Draw order: one real normal block of shape ``(N, N, M)`` followed by one
    imaginary block of the same shape.
    """
    if g <= 0:
        raise ValueError(f"coupling scale must be positive, got {g}")
    rng = _rng(seed)
    x = rng.standard_normal((n_fermions, n_fermions, n_bosons))
    y = rng.standard_normal((n_fermions, n_fermions, n_bosons))
    tensor = np.zeros((n_fermions, n_fermions, n_bosons), dtype=complex)
    iu, ju = np.triu_indices(n_fermions, k=1)
    tensor[iu, ju, :] = (x[iu, ju, :] + 1j * y[iu, ju, :]) * (g / np.sqrt(2.0))
    tensor[ju, iu, :] = np.conj(tensor[iu, ju, :])
    d = np.arange(n_fermions)
    tensor[d, d, :] = g * x[d, d, :]
    return YsykCouplings(g=tensor, variance_scale=g, seed=seed)


def sample_sykq(n_fermions: int, q: int, j: float, seed: int) -> SykqCouplings:
    """Sample complex q-body couplings on canonically ordered index sets.

    Off-diagonal entries are complex Gaussian, diagonal entries (creation set
    equal to annihilation set) real Gaussian, each with variance
    ``J^2 (q/2)! (q/2-1)! / N^(q-1)``.  Draw order: real block then imaginary
    block, both of shape ``(P, P)`` with ``P = C(N, q/2)``.
    """
    if q not in (2, 4):
        raise ValueError(f"q must be 2 or 4, got {q}")
    if n_fermions < q:
        raise ValueError(f"need at least q={q} modes, got {n_fermions}")
    from math import factorial

    p = comb(n_fermions, q // 2)
    var = j ** 2 * factorial(q // 2) * factorial(q // 2 - 1) / n_fermions ** (q - 1)
    rng = _rng(seed)
    x = rng.standard_normal((p, p))
    y = rng.standard_normal((p, p))
    tensor = np.zeros((p, p), dtype=complex)
    iu, ju = np.triu_indices(p, k=1)
    tensor[iu, ju] = (x[iu, ju] + 1j * y[iu, ju]) * np.sqrt(var / 2.0)
    tensor[ju, iu] = np.conj(tensor[iu, ju])
    d = np.arange(p)
    tensor[d, d] = np.sqrt(var) * x[d, d]
    return SykqCouplings(q=q, n_fermions=n_fermions, j_tensor=tensor, scale=j, seed=seed)


def mode_pairs(n_fermions: int):
    """Index arrays ``(i, j)`` of the ``C(N, 2)`` ordered mode pairs, in the
    lexicographic order used by the quartic builders."""
    pairs = list(combinations(range(n_fermions), 2))
    arr = np.array(pairs, dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def sample_lowrank(n_fermions: int, n_bosons: int, seed: int) -> LowRankCouplings:
    """Sample the factorized quartic model: ``M`` real symmetric matrices with
    per-entry variance ``2 sqrt(M / N^3)``, chosen so the antisymmetrized
    products match the quartic SYK variance ``2/N^3`` at unit coupling.

    Draw order: one real normal block of shape ``(N, N, M)``; entries above
    the diagonal are mirrored, so only the upper triangle and diagonal of the
    draw are consumed.
    """
    if n_bosons < 1:
        raise ValueError(f"need at least one factor mode, got {n_bosons}")
    rng = _rng(seed)
    x = rng.standard_normal((n_fermions, n_fermions, n_bosons))
    std = (2.0 * np.sqrt(n_bosons / n_fermions ** 3)) ** 0.5
    g = np.zeros_like(x)
    iu, ju = np.triu_indices(n_fermions)
    g[iu, ju, :] = std * x[iu, ju, :]
    g[ju, iu, :] = g[iu, ju, :]
    i_idx, j_idx = mode_pairs(n_fermions)
    # j_pair[a, b] = mean_s ( g[i_a,k_b,s] g[j_a,l_b,s] - g[i_a,l_b,s] g[j_a,k_b,s] ) / 2
    gik = g[i_idx[:, None], i_idx[None, :], :]
    gjl = g[j_idx[:, None], j_idx[None, :], :]
    gil = g[i_idx[:, None], j_idx[None, :], :]
    gjk = g[j_idx[:, None], i_idx[None, :], :]
    j_pair = 0.5 * np.mean(gik * gjl - gil * gjk, axis=2)
    return LowRankCouplings(g=g, j_pair=j_pair, seed=seed)
