from functools import reduce
from itertools import combinations

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from exrouter import spin
from exrouter.errors import ConvergenceFailure, TooLarge
from exrouter.fermion import transfer_fidelity
from exrouter.network import NetworkSpec, ReceiverSpec, to_adjacency
from exrouter.spin import (
    assemble,
    basis_state,
    build_basis,
    dense_oracle_evolve,
    evolve,
    spin_transfer_probability,
)
from exrouter.verify import random_graph

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
I2 = np.eye(2)


def pauli_xx_sector(M):
    """Sector block of sum_ij J_ij/2 (XX + YY) built in the full 2**N space."""
    N = len(M)

    def site_op(op, i):
        return reduce(np.kron, [op if n == i else I2 for n in range(N)])

    H = np.zeros((2**N, 2**N), dtype=complex)
    for i, j in combinations(range(N), 2):
        if M[i, j]:
            H += M[i, j] / 2 * (site_op(X, i) @ site_op(X, j) + site_op(Y, i) @ site_op(Y, j))
    # qubit n is the n-th most significant bit; |1> is an excitation
    index = [(1 << (N - 1 - a)) | (1 << (N - 1 - b)) for a, b in combinations(range(N), 2)]
    return H[np.ix_(index, index)]


def test_basis_dimensions():
    assert build_basis(4).dimension == 6
    assert build_basis(306).dimension == 46665
    with pytest.raises(ValueError):
        build_basis(1)


def test_basis_round_trip_and_lexicographic():
    b = build_basis(50)
    pairs = [b.pair_of(i) for i in range(b.dimension)]
    assert pairs == list(combinations(range(50), 2))
    assert all(b.index_of(*p) == i for i, p in enumerate(pairs))
    assert b.pair_of(b.index_of(3, 7)) == (3, 7)
    with pytest.raises(IndexError):
        b.index_of(4, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 2000).flatmap(lambda N: st.tuples(st.just(N), st.integers(0, N * (N - 1) // 2 - 1))))
def test_basis_bijection_property(args):
    N, idx = args
    b = build_basis(N)
    n1, n2 = b.pair_of(idx)
    assert 0 <= n1 < n2 < N and b.index_of(n1, n2) == idx


def test_single_edge_is_blocked():
    H = assemble(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert H.dimension == 1 and H.matrix.nnz == 0


def test_three_site_hand_enumeration():
    M = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    H = assemble(M).matrix.toarray()
    # basis (0,1), (0,2), (1,2)
    expected = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    np.testing.assert_array_equal(H, expected)


@pytest.mark.parametrize("N", [3, 5, 7])
def test_assemble_matches_pauli_construction(N, rng):
    M = random_graph(rng, N, density=0.7)
    np.testing.assert_allclose(assemble(M).matrix.toarray(), pauli_xx_sector(M), atol=1e-14)


def test_fig1_network_matches_pauli_construction():
    spec = NetworkSpec.chain(3, 2)
    expected = pauli_xx_sector(to_adjacency(spec))
    np.testing.assert_allclose(assemble(spec).matrix.toarray(), expected, atol=1e-14)


def test_chain_spectrum_is_pairwise_sums():
    N = 8
    M = np.diag(np.ones(N - 1), 1)
    M = M + M.T
    eps = np.linalg.eigvalsh(M)
    sums = np.sort([eps[a] + eps[b] for a, b in combinations(range(N), 2)])
    E = np.linalg.eigvalsh(assemble(M).matrix.toarray())
    np.testing.assert_allclose(E, sums, atol=1e-10)


def test_sector_structure(rng):
    M = random_graph(rng, 12, density=0.3)
    H = assemble(M).matrix
    assert (H != H.T).nnz == 0
    assert np.all(H.diagonal() == 0)
    max_degree = int((M != 0).sum(axis=1).max())
    assert np.diff(H.indptr).max() <= 2 * max_degree


def test_idle_blocks_excluded():
    spec = NetworkSpec(n_w=5, receivers=(ReceiverSpec(2, active=False), ReceiverSpec(4)))
    assert assemble(spec).basis.N == 9


# -- propagation --------------------------------------------------------------

def random_sector(rng, N=14, density=0.3):
    return assemble(random_graph(rng, N, density))


def random_state(rng, d):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def test_evolve_zero_time(rng):
    H = random_sector(rng)
    psi = random_state(rng, H.dimension)
    np.testing.assert_array_equal(evolve(H, psi, 0.0), psi)


@pytest.mark.parametrize("tol", [1e-4, 1e-8, 1e-12])
def test_evolve_matches_dense_oracle(rng, tol):
    H = random_sector(rng, 20)
    assert H.dimension <= 500
    for t in (0.3, -2.0, 17.0, 140.0):
        psi = random_state(rng, H.dimension)
        out = evolve(H, psi, t, tol)
        ref = dense_oracle_evolve(H, psi, t)
        assert np.linalg.norm(out - ref) <= 10 * tol
        assert abs(np.linalg.norm(out) - 1.0) <= tol


def test_dense_oracle_is_unitary(rng):
    H = random_sector(rng, 24)
    psi = random_state(rng, H.dimension)
    back = dense_oracle_evolve(H, dense_oracle_evolve(H, psi, 3.1), -3.1)
    np.testing.assert_allclose(back, psi, atol=1e-10)
    assert np.all(np.isreal(np.linalg.eigvalsh(H.matrix.toarray())))


def test_dense_oracle_too_large():
    with pytest.raises(TooLarge):
        dense_oracle_evolve(sp.identity(4001, format="csr"), np.zeros(4001), 1.0)


def test_evolve_argument_checks(rng):
    H = random_sector(rng, 8)
    psi = random_state(rng, H.dimension)
    with pytest.raises(ValueError):
        evolve(H, psi, 1.0, tol=1e-3)
    with pytest.raises(ConvergenceFailure):
        evolve(H, psi, 1000.0, tol=1e-8, max_terms=5)


def test_chebyshev_terms_bound():
    from scipy.special import jv

    for tau in (0.5, 5.0, 40.0, 300.0):
        K = spin.chebyshev_terms(tau, 1e-10, 10_000)
        tail = 2 * np.sum(np.abs(jv(np.arange(K + 1, K + 400), tau)))
        assert tail <= 1e-10


def test_spectral_bounds_enclose_spectrum(rng):
    H = random_sector(rng, 10).matrix
    lo, hi = spin.spectral_bounds(H)
    E = np.linalg.eigvalsh(H.toarray())
    assert lo <= E.min() and E.max() <= hi


# -- transfer -------------------------------------------------------------------

def test_transfer_starts_at_zero():
    series = spin_transfer_probability(NetworkSpec.chain(5, 3), [0.0, 10.0])
    assert series.values[0] == 0.0
    assert series.meta["engine"] == "spin" and series.meta["sector_dimension"] == 36


def test_pure_chain_matches_fermion_engine():
    spec = NetworkSpec.chain(5, J0=0.05)
    times = np.linspace(0.0, 1000.0, 401)
    a = spin_transfer_probability(spec, times).values
    b = transfer_fidelity(spec, times).values
    assert np.max(np.abs(a - b)) <= 1e-6


def test_branched_network_differs_from_fermions():
    # receiver off the edge breaks the 1D mapping; engines may disagree
    spec = NetworkSpec.chain(5, 4, J0=0.3)
    times = np.linspace(0.0, 60.0, 61)
    a = spin_transfer_probability(spec, times).values
    b = transfer_fidelity(spec, times).values
    assert np.max(np.abs(a - b)) > 1e-6


def test_stepping_matches_dense_oracle():
    spec = NetworkSpec.chain(8, 7, J0=0.05)
    times = np.linspace(0.0, 400.0, 81)
    series = spin_transfer_probability(spec, times, tol=1e-10)
    H = assemble(spec)
    N = H.basis.N
    psi0 = basis_state(H.basis, 0, 1)
    idx = H.basis.index_of(N - 2, N - 1)
    ref = [abs(dense_oracle_evolve(H, psi0, t)[idx]) ** 2 for t in times]
    np.testing.assert_allclose(series.values, ref, atol=1e-9)
