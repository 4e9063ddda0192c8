import numpy as np
import pytest

from qanomaly.cecomplex import jacobi_violation
from qanomaly.errors import InputError
from qanomaly.linalg import commutator, frobenius, inner
from qanomaly.spectral import (
    BlockIndex,
    CommutantBasis,
    SymmetryPair,
    block_project,
    commutant_basis,
    joint_diagonalize,
    structure_constants,
)

from helpers import (
    REF_DH1,
    REF_H,
    REF_S,
    commuting_pair,
    random_anti_hermitian,
    random_partition,
)


@pytest.fixture
def ref_spectrum():
    return joint_diagonalize(SymmetryPair(REF_H, REF_S))


def test_three_level_sectors(ref_spectrum):
    assert ref_spectrum.summary() == [
        {"lambda": 0.0, "mu": 1.0, "multiplicity": 1},
        {"lambda": 1.0, "mu": 0.0, "multiplicity": 2},
    ]


def test_identity_pair_single_sector():
    sp = joint_diagonalize(SymmetryPair(np.eye(4), np.eye(4)))
    assert sp.multiplicities == [4]


def test_nondegenerate_diagonal():
    sp = joint_diagonalize(SymmetryPair(np.diag([1.0, 2.0, 3.0]), np.zeros((3, 3))))
    assert sp.multiplicities == [1, 1, 1]
    assert [s.lam for s in sp.sectors] == pytest.approx([1, 2, 3])


def test_rejects_non_commuting():
    with pytest.raises(InputError, match="do not commute"):
        SymmetryPair(np.diag([1.0, 0.0]), np.array([[0, 1.0], [1.0, 0]]))


def test_rejects_non_hermitian():
    with pytest.raises(InputError, match="not Hermitian"):
        SymmetryPair(np.array([[0, 1.0], [0, 0]]), np.zeros((2, 2)))


@pytest.mark.parametrize("seed", range(10))
def test_projector_invariants(seed):
    rng = np.random.default_rng(seed)
    pair, _, _ = commuting_pair(rng, random_partition(rng, 8))
    sp = joint_diagonalize(pair)
    projs = [s.projector for s in sp.sectors]
    n = pair.dim
    assert frobenius(sum(projs) - np.eye(n)) <= 1e-10
    for a, pa in enumerate(projs):
        for b, pb in enumerate(projs):
            target = pa if a == b else np.zeros_like(pa)
            assert frobenius(pa @ pb - target) <= 1e-10
        s = sp.sectors[a]
        assert frobenius(pair.hamiltonian @ pa - s.lam * pa) <= 1e-10
        assert frobenius(pair.symmetry @ pa - s.mu * pa) <= 1e-10
    assert sum(sp.multiplicities) == n
    keys = [(s.lam, s.mu) for s in sp.sectors]
    assert keys == sorted(keys)


def test_block_project_three_level_diagonal(ref_spectrum):
    # sector 1 is (lambda=1, mu=0) with projector diag(1, 1, 0)
    out = block_project(REF_DH1, ref_spectrum, BlockIndex(1, 1))
    np.testing.assert_allclose(out, [[0, 1, 0], [1, 0, 0], [0, 0, 0]], atol=1e-15)


def test_block_project_identity_off_diagonal(ref_spectrum):
    assert frobenius(block_project(np.eye(3), ref_spectrum, BlockIndex(0, 1))) == 0.0


def test_block_index_canonical():
    assert BlockIndex(3, 1) == BlockIndex(1, 3)
    assert (BlockIndex(3, 1).first, BlockIndex(3, 1).second) == (1, 3)


def test_block_project_invalid_index(ref_spectrum):
    with pytest.raises(InputError):
        block_project(np.eye(3), ref_spectrum, BlockIndex(0, 5))


@pytest.mark.parametrize("seed", range(5))
def test_block_projections(seed):
    rng = np.random.default_rng(100 + seed)
    pair, _, _ = commuting_pair(rng, random_partition(rng, 7))
    sp = joint_diagonalize(pair)
    x = random_anti_hermitian(rng, pair.dim)
    total = sum(block_project(x, sp, idx) for idx in sp.blocks())
    assert frobenius(total - x) <= 1e-12
    for idx in sp.blocks():
        p = block_project(x, sp, idx)
        assert frobenius(block_project(p, sp, idx) - p) <= 1e-12
        for gen in (pair.H, pair.S):
            c = commutator(gen, p)
            assert frobenius(block_project(c, sp, idx) - c) <= 1e-10


def test_commutant_three_level(ref_spectrum):
    basis = commutant_basis(ref_spectrum)
    assert len(basis) == 5


@pytest.mark.parametrize(
    "pair, size",
    [
        (SymmetryPair(np.diag([0.0, 1.0, 2.0, 3.0]), np.zeros((4, 4))), 4),
        (SymmetryPair(np.zeros((3, 3)), np.zeros((3, 3))), 9),
    ],
)
def test_commutant_sizes(pair, size):
    assert len(commutant_basis(joint_diagonalize(pair))) == size


@pytest.mark.parametrize("seed", range(5))
def test_commutant_invariants(seed):
    rng = np.random.default_rng(200 + seed)
    pair, _, _ = commuting_pair(rng, random_partition(rng, 8, max_mult=4))
    sp = joint_diagonalize(pair)
    basis = commutant_basis(sp)
    assert len(basis) == sum(m * m for m in sp.multiplicities)
    gram = np.array([[inner(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(len(basis)), atol=1e-12)
    for c in basis:
        assert frobenius(commutator(pair.H, c)) + frobenius(commutator(pair.S, c)) <= 1e-9


def test_structure_constants_abelian():
    sp = joint_diagonalize(SymmetryPair(np.diag([0.0, 1.0, 2.0]), np.zeros((3, 3))))
    assert np.abs(structure_constants(commutant_basis(sp))).max() == 0.0


def test_structure_constants_su2_triple():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])
    triple = np.array([1j * s / np.sqrt(2) for s in (sx, sy, sz)])
    f = structure_constants(CommutantBasis(triple, (0, 0, 0)))
    # [i sx, i sy] = -2 i sz, so with the 1/sqrt(2) normalization f_xyz = -sqrt(2)
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k], eps[j, i, k] = 1, -1
    np.testing.assert_allclose(f, -np.sqrt(2) * eps, atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_structure_constants_closure_and_jacobi(seed):
    rng = np.random.default_rng(300 + seed)
    pair, _, _ = commuting_pair(rng, [3, 2, 1])
    basis = commutant_basis(joint_diagonalize(pair))
    f = structure_constants(basis)
    assert np.abs(f + f.transpose(1, 0, 2)).max() <= 1e-12
    e = basis.elements
    for i in range(len(basis)):
        for j in range(len(basis)):
            recon = np.einsum("k,kab->ab", f[i, j], e)
            assert frobenius(commutator(e[i], e[j]) - recon) <= 1e-10
    assert jacobi_violation(f) <= 1e-10
