"""Spin-1/2 XX network restricted to the two-excitation sector.

Spins behave as hard-core bosons: a basis state ``|n1, n2>`` (n1 < n2, both
spins up) couples to every state reached by moving one excitation across a
single graph edge, with amplitude equal to that edge's coupling and no
fermionic sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import jv

from . import network as net
from .errors import ConvergenceFailure, LengthMismatch, TooLarge
from .fermion import FidelitySeries, default_time_grid, series_meta

DENSE_MAX_DIM = 4000
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class TwoExcitationBasis:
    """Lexicographic enumeration of pairs ``0 <= n1 < n2 < N``."""

    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need at least two sites, got {self.N}")

    @property
    def dimension(self) -> int:
        return self.N * (self.N - 1) // 2

    def _offset(self, n1):
        # number of pairs whose first site is below n1
        return n1 * self.N - n1 * (n1 + 1) // 2

    def index_of(self, n1: int, n2: int) -> int:
        if not 0 <= n1 < n2 < self.N:
            raise IndexError(f"invalid pair ({n1}, {n2}) for N={self.N}")
        return self._offset(n1) + (n2 - n1 - 1)

    def pair_of(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.dimension:
            raise IndexError(f"index {index} outside 0..{self.dimension - 1}")
        # pairs with first site >= n1 number (N - n1)(N - n1 - 1)/2
        remaining = self.dimension - index
        m = (1 + math.isqrt(1 + 8 * remaining)) // 2
        while m * (m - 1) // 2 < remaining:
            m += 1
        n1 = self.N - m
        return n1, n1 + 1 + index - self._offset(n1)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.triu_indices(self.N, k=1)


def build_basis(N: int) -> TwoExcitationBasis:
    return TwoExcitationBasis(N)


@dataclass(frozen=True)
class SectorHamiltonian:
    matrix: sp.csr_matrix
    basis: TwoExcitationBasis
    spec: net.NetworkSpec | None = None

    @property
    def dimension(self) -> int:
        return self.basis.dimension


def _sector_matrix(M: np.ndarray) -> sp.csr_matrix:
    N = len(M)
    basis = TwoExcitationBasis(N)
    rows, cols, vals = [], [], []
    spectators = np.arange(N)
    iu, ju = np.nonzero(np.triu(M, 1))
    for a, b in zip(iu, ju):
        # |a, c> <-> |b, c> for every spectator c not on the edge
        c = spectators[(spectators != a) & (spectators != b)]
        src = _pair_index(basis, np.minimum(a, c), np.maximum(a, c))
        dst = _pair_index(basis, np.minimum(b, c), np.maximum(b, c))
        w = np.full(len(c), M[a, b])
        rows += [src, dst]
        cols += [dst, src]
        vals += [w, w]
    d = basis.dimension
    if not rows:
        return sp.csr_matrix((d, d))
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
    )
    return H.tocsr()


def _pair_index(basis, n1, n2):
    return n1 * basis.N - n1 * (n1 + 1) // 2 + (n2 - n1 - 1)


def assemble(spec_or_matrix, target: int | None = None) -> SectorHamiltonian:
    """Two-excitation sector matrix of the XX network.

    Accepts a ``NetworkSpec`` (switched-off blocks are dropped) or a bare
    symmetric coupling matrix.
    """
    if isinstance(spec_or_matrix, net.NetworkSpec):
        M = net.to_adjacency(spec_or_matrix, target)
        spec = spec_or_matrix
    else:
        M = np.asarray(spec_or_matrix, dtype=float)
        spec = None
    if not np.array_equal(M, M.T):
        raise ValueError("coupling matrix must be symmetric")
    return SectorHamiltonian(_sector_matrix(M), TwoExcitationBasis(len(M)), spec)


def basis_state(basis: TwoExcitationBasis, n1: int, n2: int) -> np.ndarray:
    psi = np.zeros(basis.dimension, dtype=complex)
    psi[basis.index_of(n1, n2)] = 1.0
    return psi


# -- propagation ---------------------------------------------------------

def spectral_bounds(H: sp.spmatrix) -> tuple[float, float]:
    """Gershgorin enclosure of the spectrum of a symmetric matrix."""
    H = sp.csr_matrix(H)
    diag = H.diagonal()
    radius = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def chebyshev_terms(tau: float, tol: float, max_terms: int) -> int:
    """Smallest order K with ``2 sum_{k>K} |J_k(tau)| <= tol``.

    Uses ``|J_k(x)| <= (x/2)^k / k!`` and a geometric bound on the tail.
    """
    x = abs(tau) / 2.0
    for K in range(max_terms + 1):
        q = x / (K + 2)
        if q >= 1.0:
            continue
        if x == 0.0:
            return K
        log_tail = (K + 1) * math.log(x) - math.lgamma(K + 2) - math.log1p(-q)
        if math.log(2.0) + log_tail <= math.log(tol):
            return K
    raise ConvergenceFailure(f"more than {max_terms} Chebyshev terms needed for tau={tau:.3g}")


def evolve(H, state, t: float, tol: float = DEFAULT_TOL, max_terms: int = 100_000):
    """``exp(-iHt) @ state`` by a Chebyshev expansion with certified truncation.

    Only sparse matrix-vector products with ``H`` are used. The truncation
    error is bounded by ``tol * ||state||``; the result's norm is checked
    against the same bound.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
    A = H.matrix if isinstance(H, SectorHamiltonian) else sp.csr_matrix(H)
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (A.shape[0],):
        raise LengthMismatch(f"state length {psi.shape} does not match dimension {A.shape[0]}")
    if t == 0:
        return psi.copy()
    lo, hi = spectral_bounds(A)
    center, half = (hi + lo) / 2.0, (hi - lo) / 2.0
    if half == 0.0:
        return np.exp(-1j * center * t) * psi
    tau = half * t
    K = chebyshev_terms(tau, tol, max_terms)
    coeffs = jv(np.arange(K + 1), tau) * (-1j) ** np.arange(K + 1)
    coeffs[1:] *= 2.0

    def scaled(v):
        return (A @ v - center * v) / half

    t_prev, t_cur = psi, scaled(psi)
    out = coeffs[0] * t_prev
    if K >= 1:
        out = out + coeffs[1] * t_cur
    for k in range(2, K + 1):
        t_prev, t_cur = t_cur, 2.0 * scaled(t_cur) - t_prev
        out += coeffs[k] * t_cur
    out *= np.exp(-1j * center * t)
    norm_in, norm_out = np.linalg.norm(psi), np.linalg.norm(out)
    if abs(norm_out - norm_in) > tol * norm_in + 1e-12:
        raise ConvergenceFailure(f"norm drift {abs(norm_out - norm_in):.3e} exceeds tol {tol}")
    return out


def dense_oracle_evolve(H, state, t: float) -> np.ndarray:
    """Exact propagation through a full eigendecomposition of the densified matrix."""
    A = H.matrix if isinstance(H, SectorHamiltonian) else sp.csr_matrix(H)
    if A.shape[0] > DENSE_MAX_DIM:
        raise TooLarge(f"dense oracle limited to dimension {DENSE_MAX_DIM}, got {A.shape[0]}")
    E, V = np.linalg.eigh(A.toarray())
    psi = np.asarray(state, dtype=complex)
    return V @ (np.exp(-1j * E * t) * (V.T @ psi))


def spin_transfer_probability(spec: net.NetworkSpec, times=None, target: int | None = None,
                              tol: float = DEFAULT_TOL) -> FidelitySeries:
    """Sender-pair to target-pair probability of the XX network.

    The state is stepped along the grid; each step gets ``tol / len(times)``
    so the accumulated error stays below ``tol``.
    """
    if times is None:
        times = default_time_grid(spec.J0)
    times = np.asarray(times, dtype=float)
    H = assemble(spec, target)
    N = H.basis.N
    psi = basis_state(H.basis, 0, 1)
    target_index = H.basis.index_of(N - 2, N - 1)
    step_tol = tol / max(len(times), 1)
    values = np.empty(len(times))
    t_now = 0.0
    for i, t in enumerate(times):
        psi = evolve(H, psi, t - t_now, step_tol)
        t_now = t
        values[i] = abs(psi[target_index]) ** 2
    meta = series_meta(spec, target, "spin", N, sector_dimension=H.dimension, tol=tol)
    return FidelitySeries(times, values, meta)
