"""Dense brute-force constructions used as cross-check oracles.

Everything here is built from explicit Kronecker products on the full
``2^N x (cutoff+1)^M`` space and is deliberately independent of the sparse
assembly path.  Basis layout matches :mod:`ysyk.hilbert`: fermion mode 0 at
the least significant bit, boson mode 0 as the least significant digit, and
composite index ``fermion_word * boson_dim + boson_index``.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .hilbert import HilbertSpace

__all__ = [
    "dense_fermion_ops",
    "dense_boson_ops",
    "dense_ysyk",
    "half_filling_slice",
    "syk2_levels_from_single_particle",
]

_SM = np.array([[0.0, 1.0], [0.0, 0.0]])  # annihilator on one mode, |0><1|
_SZ = np.diag([1.0, -1.0])
_I2 = np.eye(2)


def dense_fermion_ops(n_modes: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilators ``c_0 .. c_{N-1}`` as dense ``2^N`` matrices.

    Mode ``k`` corresponds to bit ``k`` of the basis-state index; the sign
    string acts on modes below the acted one.
    """
    ops = []
    for j in range(n_modes):
        op = np.eye(1)
        for k in range(n_modes - 1, -1, -1):  # leftmost kron factor = highest mode
            if k == j:
                factor = _SM
            elif k < j:
                factor = _SZ
            else:
                factor = _I2
            op = np.kron(op, factor)
        ops.append(op)
    return ops


def dense_boson_ops(n_modes: int, cutoff: int) -> list[np.ndarray]:
    """Truncated ladder annihilators ``a_0 .. a_{M-1}`` on ``(cutoff+1)^M``."""
    dim = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    eye = np.eye(dim)
    ops = []
    for k in range(n_modes):
        op = np.eye(1)
        for m in range(n_modes - 1, -1, -1):
            op = np.kron(op, a if m == k else eye)
        ops.append(op)
    return ops


def half_filling_slice(space: HilbertSpace) -> np.ndarray:
    """Composite full-space indices spanning the fixed-filling sector, in the
    same order as the sparse basis (fermion-major)."""
    words = space.fermion_basis().states
    b = space.boson_dim
    return (words[:, None] * b + np.arange(b)[None, :]).ravel()


def dense_ysyk(space: HilbertSpace, omega0: float, g_tensor: np.ndarray, mu: float = 0.0) -> np.ndarray:
    """Assemble the boson-mediated hopping Hamiltonian by explicit Kronecker
    products and project onto the fixed-filling sector.

    Implements ``sum_k omega0 (a_k^dag a_k + 1/2)`` plus the interaction
    ``(2 omega0 M N)^{-1/2} sum_{ijk} g_{ij,k} c_i^dag c_j (a_k + a_k^dag)``
    and the chemical-potential term ``-mu sum_i n_i``.
    """
    n, m = space.n_fermions, space.n_bosons
    cs = dense_fermion_ops(n)
    fdim = 2 ** n
    if m:
        bs = dense_boson_ops(m, space.boson_cutoff)
        bdim = bs[0].shape[0]
    else:
        bs = []
        bdim = 1
    dim = fdim * bdim
    h = np.zeros((dim, dim), dtype=complex)
    eye_f = np.eye(fdim)
    for a in bs:
        h += omega0 * np.kron(eye_f, a.conj().T @ a + 0.5 * np.eye(bdim))
    if mu:
        for c in cs:
            h += -mu * np.kron(c.conj().T @ c, np.eye(bdim))
    if m:
        pref = 1.0 / np.sqrt(2.0 * omega0 * m * n)
        for k, a in enumerate(bs):
            x = a + a.conj().T
            block = np.zeros((fdim, fdim), dtype=complex)
            for i in range(n):
                for j in range(n):
                    block += g_tensor[i, j, k] * (cs[i].conj().T @ cs[j])
            h += pref * np.kron(block, x)
    keep = half_filling_slice(space)
    return h[np.ix_(keep, keep)]


def syk2_levels_from_single_particle(j_matrix: np.ndarray, n_particles: int) -> np.ndarray:
    """Many-body spectrum of a quadratic Hamiltonian at fixed filling: sums of
    ``n_particles`` distinct single-particle levels."""
    levels = np.linalg.eigvalsh(j_matrix)
    sums = [sum(sel) for sel in combinations(levels, n_particles)]
    return np.sort(np.array(sums))
