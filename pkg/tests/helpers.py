"""Random instance generators shared by the tests."""

import numpy as np

from qanomaly import DeformationProblem, SymmetryPair

REF_H = np.diag([1.0, 1.0, 0.0])
REF_S = np.diag([0.0, 0.0, 1.0])
REF_DH1 = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=float)
REF_DS1 = np.array([[0, 0, -1], [0, 1, 0], [-1, 0, 0]], dtype=float)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_anti_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a - a.conj().T)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_labels(rng, k, grid=3):
    """``k`` distinct integer eigenvalue pairs from a ``grid x grid`` lattice."""
    cells = [(a, b) for a in range(grid) for b in range(grid)]
    pick = rng.choice(len(cells), size=k, replace=False)
    return sorted(cells[i] for i in pick)


def commuting_pair(rng, multiplicities, labels=None, conjugate=True):
    """Random pair with the given sector multiplicities.

    Returns ``(pair, U, labels_per_index)`` where columns of ``U`` are joint
    eigenvectors and ``labels_per_index[i]`` is the ``(lambda, mu)`` of column i.
    """
    multiplicities = list(multiplicities)
    if labels is None:
        labels = random_labels(rng, len(multiplicities), grid=max(3, len(multiplicities)))
    lam, mu, per_index = [], [], []
    for (l, m), c in zip(labels, multiplicities):
        lam += [l] * c
        mu += [m] * c
        per_index += [(l, m)] * c
    n = len(lam)
    U = random_unitary(rng, n) if conjugate else np.eye(n)
    H = U @ np.diag(np.array(lam, float)) @ U.conj().T
    S = U @ np.diag(np.array(mu, float)) @ U.conj().T
    return SymmetryPair(H, S), U, per_index


def random_partition(rng, max_dim, max_mult=3, max_sectors=4):
    while True:
        k = int(rng.integers(1, max_sectors + 1))
        mults = [int(m) for m in rng.integers(1, max_mult + 1, size=k)]
        if sum(mults) <= max_dim:
            return mults


def off_diagonal_mask(per_index):
    n = len(per_index)
    return np.array([[per_index[i] != per_index[j] for j in range(n)] for i in range(n)])


def random_off_diagonal(rng, U, per_index, scale=1.0):
    """Random anti-Hermitian matrix with zero diagonal blocks."""
    w = random_anti_hermitian(rng, len(per_index), scale) * off_diagonal_mask(per_index)
    return U @ w @ U.conj().T


def unobstructed_problem(rng, scale=0.3, max_dim=8):
    """Cocycle with commuting commutant parts plus an exact off-diagonal part."""
    mults = random_partition(rng, max_dim)
    pair, U, per_index = commuting_pair(rng, mults)
    n = pair.dim
    hz = U @ np.diag(rng.normal(size=n)) @ U.conj().T * scale
    sz = U @ np.diag(rng.normal(size=n)) @ U.conj().T * scale
    omega = random_off_diagonal(rng, U, per_index, scale)
    dh = hz + pair.hamiltonian @ omega - omega @ pair.hamiltonian
    ds = sz + pair.symmetry @ omega - omega @ pair.symmetry
    return DeformationProblem(pair, dh, ds)


def random_cocycle_problem(rng, multiplicities, scale=0.5):
    """Cocycle with generic (non-commuting) commutant parts plus exact part."""
    pair, U, per_index = commuting_pair(rng, multiplicities)
    mask = ~off_diagonal_mask(per_index)
    n = pair.dim
    hz = U @ (random_hermitian(rng, n, scale) * mask) @ U.conj().T
    sz = U @ (random_hermitian(rng, n, scale) * mask) @ U.conj().T
    omega = random_off_diagonal(rng, U, per_index, scale)
    dh = hz + pair.hamiltonian @ omega - omega @ pair.hamiltonian
    ds = sz + pair.symmetry @ omega - omega @ pair.symmetry
    return DeformationProblem(pair, dh, ds)
