"""Composite Hilbert space: fermions at fixed filling times truncated bosons.

Fermionic basis states are occupation-number words (integers) with mode 0 at
the least significant bit, enumerated in ascending order at fixed Hamming
weight.  Bosonic occupations are mixed-radix tuples in base ``cutoff + 1``
with mode 0 as the least significant digit.  A composite basis state is
indexed as ``fermion_index * boson_dim + boson_index``, so fermion blocks
stay contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "HilbertSpace",
    "FermionBasis",
    "BosonBasis",
    "build_space",
    "apply_hop",
    "number_op_diag",
]


@dataclass(frozen=True)
class HilbertSpace:
    """Dimension record for the fermion sector tensored with truncated bosons.

    ``n_bosons = 0`` degenerates to a pure fermion space (``boson_dim = 1``),
    so the quadratic/quartic benchmark models share the same machinery.
    """

    n_fermions: int
    n_particles: int
    n_bosons: int
    boson_cutoff: int
    fermion_dim: int
    boson_dim: int
    total_dim: int

    def fermion_basis(self) -> "FermionBasis":
        return FermionBasis(self.n_fermions, self.n_particles)

    def boson_basis(self) -> "BosonBasis":
        return BosonBasis(self.n_bosons, self.boson_cutoff)


def build_space(
    n_fermions: int,
    n_bosons: int = 0,
    boson_cutoff: int = 1,
    half_filling: bool = True,
    n_particles: int | None = None,
) -> HilbertSpace:
    """Build the composite space of ``n_fermions`` modes at fixed filling and
    ``n_bosons`` oscillators truncated at occupation ``boson_cutoff``.

    Parameters
    ----------
    n_fermions : int
        Number of fermionic modes (>= 2).
    n_bosons : int
        Number of bosonic modes; 0 yields a pure fermion space.
    boson_cutoff : int
        Maximum occupation per bosonic mode (>= 1 whenever ``n_bosons > 0``).
    half_filling : bool
        Fix the particle number to ``n_fermions / 2`` (requires even
        ``n_fermions``).  Set False to pass ``n_particles`` explicitly.
    """
    if n_fermions < 2:
        raise ValueError(f"need at least 2 fermionic modes, got {n_fermions}")
    if n_bosons < 0:
        raise ValueError(f"n_bosons must be non-negative, got {n_bosons}")
    if n_bosons > 0 and boson_cutoff < 1:
        raise ValueError(f"boson_cutoff must be >= 1 when bosons are present, got {boson_cutoff}")
    if half_filling:
        if n_fermions % 2:
            raise ValueError(f"half filling requires an even mode count, got {n_fermions}")
        n_particles = n_fermions // 2
    elif n_particles is None:
        raise ValueError("n_particles is required when half_filling is False")
    if not 0 <= n_particles <= n_fermions:
        raise ValueError(f"n_particles={n_particles} out of range for {n_fermions} modes")

    fermion_dim = comb(n_fermions, n_particles)
    boson_dim = (boson_cutoff + 1) ** n_bosons if n_bosons else 1
    return HilbertSpace(
        n_fermions=n_fermions,
        n_particles=n_particles,
        n_bosons=n_bosons,
        boson_cutoff=boson_cutoff,
        fermion_dim=fermion_dim,
        boson_dim=boson_dim,
        total_dim=fermion_dim * boson_dim,
    )


class FermionBasis:
    """Fixed-particle-number occupation words, sorted ascending as integers."""

    def __init__(self, n_modes: int, n_particles: int):
        if n_modes > 62:
            raise ValueError("occupation words are limited to 62 modes")
        self.n_modes = n_modes
        self.n_particles = n_particles
        words = [sum(1 << m for m in occ) for occ in combinations(range(n_modes), n_particles)]
        self.states = np.array(sorted(words), dtype=np.int64)
        self.dim = len(self.states)
        # dense word -> index lookup; -1 marks words outside the sector
        lookup = np.full(1 << n_modes, -1, dtype=np.int64)
        lookup[self.states] = np.arange(self.dim)
        self._lookup = lookup

    def index_of(self, word: int) -> int:
        idx = int(self._lookup[word])
        if idx < 0:
            raise KeyError(f"word {word:#b} is not in the fixed-filling sector")
        return idx

    def occupations(self, mode: int) -> np.ndarray:
        """Occupation (0/1) of ``mode`` for every basis word."""
        return ((self.states >> mode) & 1).astype(np.int64)


class BosonBasis:
    """Occupation tuples of ``n_modes`` oscillators, each in 0..cutoff.

    Index arithmetic is mixed radix in base ``cutoff + 1`` with mode 0 as the
    least significant digit.
    """

    def __init__(self, n_modes: int, cutoff: int):
        self.n_modes = n_modes
        self.cutoff = cutoff
        self.radix = cutoff + 1
        self.dim = self.radix ** n_modes if n_modes else 1
        idx = np.arange(self.dim)
        occ = np.empty((self.dim, n_modes), dtype=np.int64)
        for k in range(n_modes):
            occ[:, k] = (idx // self.radix ** k) % self.radix
        self.occupations = occ

    def encode(self, occupation) -> int:
        occupation = np.asarray(occupation, dtype=np.int64)
        if occupation.shape != (self.n_modes,):
            raise ValueError(f"expected {self.n_modes} occupation numbers")
        if np.any(occupation < 0) or np.any(occupation > self.cutoff):
            raise ValueError("occupation outside 0..cutoff")
        return int(sum(int(n) * self.radix ** k for k, n in enumerate(occupation)))

    def decode(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise IndexError(f"boson index {index} out of range")
        return tuple(int(v) for v in self.occupations[index])


def apply_hop(word: int, i: int, j: int):
    """Apply the hopping operator ``c_i^dag c_j`` to an occupation word.

    Returns ``(word', sign)`` with ``sign`` in {+1, -1}, or ``None`` when the
    hop is invalid (empty source mode or occupied target mode).  The sign is
    the parity of the number of occupied modes strictly between ``i`` and
    ``j`` in the intermediate state after the annihilation, which reproduces
    the standard Jordan-Wigner string convention with mode 0 at the least
    significant bit.
    """
    if not (word >> j) & 1:
        return None
    if i == j:
        return word, 1
    intermediate = word & ~(1 << j)
    if (intermediate >> i) & 1:
        return None
    lo, hi = (i, j) if i < j else (j, i)
    between = intermediate & (((1 << hi) - 1) & ~((1 << (lo + 1)) - 1))
    sign = -1 if bin(between).count("1") % 2 else 1
    return intermediate | (1 << i), sign


def number_op_diag(word: int, i: int) -> int:
    """Occupation of mode ``i``; diagonal of ``c_i^dag c_i``."""
    return (word >> i) & 1


def _popcount(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr.astype(np.uint64)).astype(np.int64)
    out = np.zeros_like(arr)
    work = arr.copy()
    while np.any(work):
        out += work & 1
        work >>= 1
    return out


@lru_cache(maxsize=32)
def hop_table(n_modes: int, n_particles: int):
    """Tabulate ``c_i^dag c_j`` on the fixed-filling basis for all (i, j).

    Returns arrays ``(i, j, src, dst, sign)`` listing every non-vacuous
    matrix element; used by the sparse Hamiltonian assembly.
    """
    basis = FermionBasis(n_modes, n_particles)
    words = basis.states
    src_all, dst_all, i_all, j_all, sign_all = [], [], [], [], []
    for j in range(n_modes):
        occ_j = (words >> j) & 1
        for i in range(n_modes):
            if i == j:
                sel = np.nonzero(occ_j)[0]
                src_all.append(sel)
                dst_all.append(sel)
                sign_all.append(np.ones(len(sel), dtype=np.int64))
            else:
                inter = words & ~np.int64(1 << j)
                valid = (occ_j == 1) & (((inter >> i) & 1) == 0)
                sel = np.nonzero(valid)[0]
                inter = inter[sel]
                lo, hi = (i, j) if i < j else (j, i)
                mask = np.int64(((1 << hi) - 1) & ~((1 << (lo + 1)) - 1))
                sign = 1 - 2 * (_popcount(inter & mask) % 2)
                new_words = inter | np.int64(1 << i)
                src_all.append(sel)
                dst_all.append(basis._lookup[new_words])
                sign_all.append(sign)
            n = len(src_all[-1])
            i_all.append(np.full(n, i, dtype=np.int64))
            j_all.append(np.full(n, j, dtype=np.int64))
    return (
        np.concatenate(i_all),
        np.concatenate(j_all),
        np.concatenate(src_all),
        np.concatenate(dst_all),
        np.concatenate(sign_all),
    )


@lru_cache(maxsize=32)
def quartic_table(n_modes: int, n_particles: int):
    """Tabulate ``c_p1^dag c_p2^dag c_q1 c_q2`` (p1 < p2, q1 < q2) on the
    fixed-filling basis.

    Returns ``(pair_create, pair_annihilate, src, dst, sign)`` where the pair
    indices enumerate ordered mode pairs lexicographically; shared by the
    quartic model builders.
    """
    basis = FermionBasis(n_modes, n_particles)
    pairs = list(combinations(range(n_modes), 2))
    pc_all, pa_all, src_all, dst_all, sign_all = [], [], [], [], []
    for s, word in enumerate(basis.states):
        word = int(word)
        for b, (q1, q2) in enumerate(pairs):
            # rightmost operator first: c_q2 then c_q1
            step = _apply_string(word, [(q2, False), (q1, False)])
            if step is None:
                continue
            inter, sign0 = step
            for a, (p1, p2) in enumerate(pairs):
                step = _apply_string(inter, [(p2, True), (p1, True)])
                if step is None:
                    continue
                out, sign1 = step
                pc_all.append(a)
                pa_all.append(b)
                src_all.append(s)
                dst_all.append(basis.index_of(out))
                sign_all.append(sign0 * sign1)
    return (
        np.array(pc_all, dtype=np.int64),
        np.array(pa_all, dtype=np.int64),
        np.array(src_all, dtype=np.int64),
        np.array(dst_all, dtype=np.int64),
        np.array(sign_all, dtype=np.int64),
    )


def _apply_string(word: int, ops):
    """Apply ``(mode, create)`` operators right-to-left in the given list
    order, accumulating the Jordan-Wigner parity below each acted mode."""
    sign = 1
    for mode, create in ops:
        occupied = (word >> mode) & 1
        if create == occupied:
            return None
        if bin(word & ((1 << mode) - 1)).count("1") % 2:
            sign = -sign
        word ^= 1 << mode
    return word, sign
