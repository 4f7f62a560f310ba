"""Sparse Hermitian assembly of all model Hamiltonians.

Builders return :class:`SparseHamiltonian` wrappers around CSR matrices on
the composite basis of :mod:`ysyk.hilbert`.  Entries are inserted in
conjugate pairs, so Hermiticity holds exactly rather than to floating
tolerance.  Assembly iterates boson occupations in the outer loop and reuses
precomputed fermion hop tables, exploiting the block structure in which the
interaction only connects boson tuples differing by one quantum in a single
mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .disorder import LowRankCouplings, SykqCouplings, YsykCouplings, mode_pairs
from .hilbert import HilbertSpace, build_space, hop_table, quartic_table

__all__ = [
    "ModelParams",
    "SparseHamiltonian",
    "build_ysyk",
    "build_sykq",
    "build_sw_effective",
    "build_lowrank",
    "fermion_bilinear",
    "export_triplets",
]


@dataclass(frozen=True)
class ModelParams:
    """Energy scales of the boson-mediated model.

    ``omega0`` is the bare boson frequency, ``g`` the disorder scale entering
    the Yukawa vertex, ``mu`` the chemical potential (identically zero in the
    fixed half-filling sector, kept as a parameter), and ``j`` the coupling
    strength of the quadratic/quartic benchmark models.
    """

    omega0: float = 1.0
    g: float = 1.0
    mu: float = 0.0
    j: float = 1.0

    @property
    def control_ratio(self) -> float:
        """Dimensionless competition ratio ``omega0 / g^(2/3)``."""
        return self.omega0 / self.g ** (2.0 / 3.0)

    @classmethod
    def from_control_ratio(cls, ratio: float, g: float = 1.0, **kwargs) -> "ModelParams":
        return cls(omega0=ratio * g ** (2.0 / 3.0), g=g, **kwargs)


@dataclass
class SparseHamiltonian:
    """Hermitian operator in CSR layout plus a snapshot of its provenance."""

    matrix: sp.csr_matrix
    space: HilbertSpace
    model: str
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def trace(self) -> float:
        return float(self.matrix.diagonal().sum().real)


def fermion_bilinear(matrix: np.ndarray, n_modes: int, n_particles: int) -> sp.csr_matrix:
    """Sparse matrix of ``sum_ij matrix[i, j] c_i^dag c_j`` on the
    fixed-filling fermion basis."""
    from math import comb

    i_arr, j_arr, src, dst, sign = hop_table(n_modes, n_particles)
    vals = matrix[i_arr, j_arr] * sign
    d = comb(n_modes, n_particles)
    out = sp.coo_matrix((vals, (dst, src)), shape=(d, d)).tocsr()
    out.eliminate_zeros()
    return out


def build_ysyk(space: HilbertSpace, params: ModelParams, couplings: YsykCouplings) -> SparseHamiltonian:
    """Assemble the boson-mediated hopping model on the composite basis.

    The diagonal carries ``omega0 (sum_k n_k + M/2) - mu N/2``; blocks between
    boson tuples differing by one quantum in mode ``k`` carry the fermion
    bilinear of ``g[:, :, k]`` times ``sqrt(n_k + 1)`` (or ``sqrt(n_k)``) and
    the prefactor ``1 / sqrt(2 omega0 M N)``.
    """
    if params.omega0 <= 0:
        raise ValueError(f"boson frequency must be positive, got {params.omega0}")
    n, m = space.n_fermions, space.n_bosons
    if couplings.g.shape != (n, n, m):
        raise ValueError(
            f"coupling tensor shape {couplings.g.shape} incompatible with space ({n}, {n}, {m})"
        )
    fdim, bdim, dim = space.fermion_dim, space.boson_dim, space.total_dim
    bbasis = space.boson_basis()
    occ = bbasis.occupations

    diag = params.omega0 * (occ.sum(axis=1) + 0.5 * m) - params.mu * space.n_particles
    diag_full = np.tile(diag, fdim)  # fermion-major layout: index = f * bdim + b

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag_full.astype(complex)]

    if m:
        pref = 1.0 / np.sqrt(2.0 * params.omega0 * m * n)
        i_arr, j_arr, src, dst, sign = hop_table(n, space.n_particles)
        for k in range(m):
            g_vals = couplings.g[i_arr, j_arr, k] * sign * pref
            raisable = np.nonzero(occ[:, k] < space.boson_cutoff)[0]
            if len(raisable) == 0:
                continue
            stride = bbasis.radix ** k
            b_lo = raisable
            b_hi = raisable + stride
            amp = np.sqrt(occ[b_lo, k] + 1.0)
            # raise in mode k: block (b_hi, b_lo), then the conjugate partner
            r = (dst[:, None] * bdim + b_hi[None, :]).ravel()
            c = (src[:, None] * bdim + b_lo[None, :]).ravel()
            v = (g_vals[:, None] * amp[None, :]).ravel()
            rows.extend((r, c))
            cols.extend((c, r))
            vals.extend((v, v.conj()))

    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    return SparseHamiltonian(
        matrix=h,
        space=space,
        model="ysyk",
        params={"omega0": params.omega0, "g": params.g, "mu": params.mu, "seed": couplings.seed},
    )


def build_sykq(space: HilbertSpace, couplings: SykqCouplings) -> SparseHamiltonian:
    """Assemble the complex q-body benchmark on the fixed-filling fermion
    basis; particle number is conserved term by term."""
    n = space.n_fermions
    if couplings.n_fermions != n:
        raise ValueError("coupling tensor and space disagree on the mode count")
    if space.n_bosons != 0:
        raise ValueError("q-body benchmark models live on a pure fermion space (n_bosons=0)")
    if n < couplings.q:
        raise ValueError(f"need at least q={couplings.q} modes, got {n}")
    d = space.fermion_dim
    if couplings.q == 2:
        h = fermion_bilinear(couplings.j_tensor, n, space.n_particles)
    else:
        pc, pa, src, dst, sign = quartic_table(n, space.n_particles)
        vals = couplings.j_tensor[pc, pa] * sign
        h = sp.coo_matrix((vals, (dst, src)), shape=(d, d)).tocsr()
        h.eliminate_zeros()
    return SparseHamiltonian(
        matrix=h,
        space=space,
        model=f"syk{couplings.q}",
        params={"q": couplings.q, "j": couplings.scale, "seed": couplings.seed},
    )


def build_sw_effective(
    couplings: YsykCouplings, omega0: float, space: HilbertSpace | None = None
) -> SparseHamiltonian:
    """Second-order effective fermion Hamiltonian from eliminating the boson
    modes: ``-(2 omega0^2 M N)^{-1} sum_k (sum_ij g_{ij,k} c_i^dag c_j)^2``
    on the half-filling basis.

    Equals the pair-coupling form ``-(2 omega0^2 N)^{-1} sum J_{ij,i'j'}
    c_i^dag c_j c_i'^dag c_j'`` with ``J = (1/M) sum_k g_k (x) g_k``.
    """
    n, m = couplings.n_fermions, couplings.n_bosons
    if space is None:
        space = build_space(n, n_bosons=0)
    if space.n_fermions != n or space.n_bosons != 0:
        raise ValueError("effective model lives on the pure fermion space")
    d = space.fermion_dim
    h = sp.csr_matrix((d, d), dtype=complex)
    for k in range(m):
        gk = fermion_bilinear(couplings.g[:, :, k], n, space.n_particles)
        h = h + gk @ gk
    h = h * (-1.0 / (2.0 * omega0 ** 2 * m * n))
    return SparseHamiltonian(
        matrix=h.tocsr(),
        space=space,
        model="sw_effective",
        params={"omega0": omega0, "g": couplings.variance_scale, "seed": couplings.seed},
    )


def build_lowrank(couplings: LowRankCouplings, space: HilbertSpace | None = None) -> SparseHamiltonian:
    """Assemble the normal-ordered factorized quartic model
    ``sum_{i<j, k<l} J_{ij;kl} c_i^dag c_j^dag c_k c_l`` on the half-filling
    basis."""
    n = couplings.n_fermions
    if space is None:
        space = build_space(n, n_bosons=0)
    if space.n_fermions != n or space.n_bosons != 0:
        raise ValueError("factorized quartic model lives on the pure fermion space")
    d = space.fermion_dim
    pc, pa, src, dst, sign = quartic_table(n, space.n_particles)
    vals = couplings.j_pair[pc, pa] * sign
    h = sp.coo_matrix((vals, (dst, src)), shape=(d, d)).tocsr()
    h.eliminate_zeros()
    return SparseHamiltonian(
        matrix=h.astype(complex),
        space=space,
        model="lowrank",
        params={"n_factors": couplings.n_bosons, "seed": couplings.seed},
    )


def export_triplets(h: SparseHamiltonian, path) -> None:
    """Write the Hamiltonian as text triplets ``row col re im`` (0-based,
    one entry per line) for cross-checks with external tools."""
    coo = h.matrix.tocoo()
    with open(path, "w") as fh:
        fh.write(f"# model={h.model} dim={h.dim} nnz={coo.nnz}\n")
        fh.write("# row col re im\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
