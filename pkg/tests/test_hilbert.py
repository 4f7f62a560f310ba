import numpy as np
import pytest

from ysyk.hamiltonian import fermion_bilinear
from ysyk.hilbert import (
    BosonBasis,
    FermionBasis,
    apply_hop,
    build_space,
    hop_table,
    number_op_diag,
    quartic_table,
)
from ysyk.testing import dense_fermion_ops


def test_build_space_dimensions():
    space = build_space(8, 4, 1)
    assert (space.fermion_dim, space.boson_dim, space.total_dim) == (70, 16, 1120)
    assert build_space(4, 0).total_dim == 6
    assert build_space(6, 3, 1).total_dim == 160


def test_build_space_consistency():
    space = build_space(6, 2, 3)
    assert space.total_dim == space.fermion_dim * space.boson_dim
    assert space.n_particles == space.n_fermions // 2


def test_build_space_rejects_bad_input():
    with pytest.raises(ValueError):
        build_space(5, 0)  # odd N at half filling
    with pytest.raises(ValueError):
        build_space(4, 2, 0)  # bosons present but cutoff < 1
    with pytest.raises(ValueError):
        build_space(1, 0)


def test_apply_hop_number_operator():
    assert apply_hop(0b0011, 0, 0) == (0b0011, 1)
    assert apply_hop(0b0011, 3, 2) is None  # mode 2 empty
    assert apply_hop(0b0011, 1, 0) is None  # target occupied


def test_apply_hop_sign_matches_dense_oracle():
    # c_2^dag c_0 on |modes {0,1}> = -|modes {1,2}>: the occupied mode 1 sits
    # strictly between the acted positions, so the string parity is odd.
    cs = dense_fermion_ops(4)
    op = cs[2].conj().T @ cs[0]
    amp = op[0b0110, 0b0011]
    assert amp == -1.0
    assert apply_hop(0b0011, 2, 0) == (0b0110, -1)


@pytest.mark.parametrize("n_modes,n_particles", [(4, 2), (5, 2), (6, 3)])
def test_hop_table_equals_dense_jordan_wigner(n_modes, n_particles):
    basis = FermionBasis(n_modes, n_particles)
    cs = dense_fermion_ops(n_modes)
    for i in range(n_modes):
        for j in range(n_modes):
            unit = np.zeros((n_modes, n_modes))
            unit[i, j] = 1.0
            sparse = fermion_bilinear(unit, n_modes, n_particles).toarray()
            dense = (cs[i].conj().T @ cs[j])[np.ix_(basis.states, basis.states)]
            assert np.array_equal(sparse, dense)


def test_hop_then_reverse_is_identity():
    rng = np.random.default_rng(5)
    for word in FermionBasis(8, 4).states[rng.integers(0, 70, size=20)]:
        word = int(word)
        for i in range(8):
            for j in range(8):
                step = apply_hop(word, i, j)
                if step is None:
                    continue
                back = apply_hop(step[0], j, i)
                assert back is not None
                assert back[0] == word
                assert back[1] * step[1] == 1


def test_basis_index_bijection():
    basis = FermionBasis(8, 4)
    assert np.all(np.diff(basis.states) > 0)
    for k, word in enumerate(basis.states):
        assert basis.index_of(int(word)) == k
    with pytest.raises(KeyError):
        basis.index_of(0b1)  # wrong particle number


def test_number_op_diag():
    assert number_op_diag(0b0101, 0) == 1
    assert number_op_diag(0b0101, 1) == 0
    assert all(number_op_diag(0b1111, i) == 1 for i in range(4))


def test_boson_basis_roundtrip():
    basis = BosonBasis(3, 2)
    assert basis.dim == 27
    for idx in range(basis.dim):
        assert basis.encode(basis.decode(idx)) == idx
    assert basis.decode(0) == (0, 0, 0)
    with pytest.raises(ValueError):
        basis.encode((0, 3, 0))


def test_quartic_table_against_dense_oracle():
    from itertools import combinations

    n_modes, n_particles = 4, 2
    basis = FermionBasis(n_modes, n_particles)
    cs = dense_fermion_ops(n_modes)
    pairs = list(combinations(range(n_modes), 2))
    pc, pa, src, dst, sign = quartic_table(n_modes, n_particles)
    for a, (p1, p2) in enumerate(pairs):
        for b, (q1, q2) in enumerate(pairs):
            dense = (cs[p1].conj().T @ cs[p2].conj().T @ cs[q1] @ cs[q2])[
                np.ix_(basis.states, basis.states)
            ]
            sel = (pc == a) & (pa == b)
            sparse = np.zeros_like(dense)
            sparse[dst[sel], src[sel]] = sign[sel]
            assert np.array_equal(sparse, dense)
