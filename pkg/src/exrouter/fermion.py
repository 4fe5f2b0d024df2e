"""Two-excitation dynamics of the free-fermion network.

Many-body amplitudes are Slater determinants of single-particle amplitudes.
``fock_oracle_amplitude`` recomputes them in the full 2**N Fock space from
explicit ladder operators and serves as an independent check.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import network as net
from .errors import LengthMismatch, NoPeak, TooLarge, UnsortedSites
from .spectral import SpectralDecomposition, amplitude_block, cached_eigendecompose

FOCK_MAX_SITES = 14
FOCK_DENSE_MAX_SITES = 10


@dataclass
class FidelitySeries:
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise LengthMismatch("times and values differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def peak(self) -> tuple[float, float]:
        """Global maximum as ``(value, time)``."""
        i = int(np.argmax(self.values))
        return float(self.values[i]), float(self.times[i])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "probability"])
        for t, p in zip(self.times, self.values):
            writer.writerow([f"{t:.12g}", f"{p:.12g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path_or_text, meta=None) -> "FidelitySeries":
        text = str(path_or_text)
        if "\n" not in text:
            text = Path(text).read_text(encoding="utf-8")
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t", "probability"]:
            raise ValueError("missing CSV header 't,probability'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        return cls(data[:, 0], data[:, 1], dict(meta or {}))

    def to_json(self, path=None) -> str:
        text = json.dumps(
            {"meta": self.meta, "times": self.times.tolist(), "values": self.values.tolist()}
        )
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, text: str) -> "FidelitySeries":
        d = json.loads(text)
        return cls(d["times"], d["values"], d.get("meta", {}))


@dataclass(frozen=True)
class PeakReport:
    t_peak: float
    value_peak: float
    index: int


def default_time_grid(J0: float, samples: int = 2001, horizon: float = 50.0) -> np.ndarray:
    """Uniform grid on ``[0, horizon / J0]``."""
    return np.linspace(0.0, horizon / J0, samples)


def _check_site_lists(sources, targets):
    if len(sources) != len(targets) or not sources:
        raise LengthMismatch(f"need equal, nonzero counts, got {len(sources)} and {len(targets)}")
    for sites in (sources, targets):
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise UnsortedSites(f"sites must be strictly increasing: {list(sites)}")


def slater_determinant(block) -> complex:
    """Determinant with closed forms for m <= 2 (exactly antisymmetric there)."""
    block = np.asarray(block)
    m = block.shape[0]
    if m == 1:
        return complex(block[0, 0])
    if m == 2:
        return complex(block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0])
    return complex(np.linalg.det(block))


def many_body_amplitude(decomp: SpectralDecomposition, sources, targets, t) -> complex:
    """Determinant of the single-particle amplitude block."""
    sources, targets = list(sources), list(targets)
    _check_site_lists(sources, targets)
    return slater_determinant(amplitude_block(decomp, sources, targets, t).values)


def many_body_series(decomp: SpectralDecomposition, sources, targets, times) -> np.ndarray:
    """Vectorised ``many_body_amplitude`` over a time grid."""
    sources, targets = list(sources), list(targets)
    _check_site_lists(sources, targets)
    times = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(times, decomp.energies))
    S, R = decomp.modes[sources], decomp.modes[targets]
    blocks = np.einsum("sk,tk,rk->tsr", S, phases, R)
    if len(sources) == 2:
        return blocks[:, 0, 0] * blocks[:, 1, 1] - blocks[:, 0, 1] * blocks[:, 1, 0]
    return np.linalg.det(blocks)


def two_excitation_norm(decomp: SpectralDecomposition, sources, t) -> float:
    """Total probability over all target pairs; equals 1 for a unitary evolution."""
    U = decomp.propagator(t)
    a, b = sources
    cols = U[:, [a, b]]
    # det over rows (r1, r2): cols[r1,0]*cols[r2,1] - cols[r1,1]*cols[r2,0]
    D = np.outer(cols[:, 0], cols[:, 1]) - np.outer(cols[:, 1], cols[:, 0])
    return float(np.sum(np.abs(np.triu(D, 1)) ** 2))


def series_meta(spec, target, engine, active_sites, **extra):
    meta = {
        "engine": engine,
        "network": spec.to_dict(),
        "target": spec.default_target() if target is None else target,
        "total_sites": net.site_map(spec, target).total_sites,
        "active_sites": active_sites,
    }
    meta.update(extra)
    return meta


def transfer_fidelity(spec: net.NetworkSpec, times=None, target: int | None = None,
                      cache_dir=None) -> FidelitySeries:
    """Sender-pair to target-pair transfer probability on a time grid.

    ``target`` indexes ``spec.receivers``; it defaults to the active receiver
    (switchable) or the last receiver (permanent).
    """
    if times is None:
        times = default_time_grid(spec.J0)
    M = net.to_adjacency(spec, target)
    decomp = cached_eigendecompose(M, cache_dir)
    N = len(M)
    amps = many_body_series(decomp, [0, 1], [N - 2, N - 1], times)
    values = np.abs(amps) ** 2
    return FidelitySeries(times, values, series_meta(spec, target, "fermion", N))


def first_peak(series: FidelitySeries, threshold: float = 0.5) -> PeakReport:
    """Earliest local maximum reaching ``threshold``."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    v = series.values
    n = len(v)
    for i in range(n):
        if v[i] < threshold:
            continue
        left = i == 0 or v[i] >= v[i - 1]
        right = i == n - 1 or v[i] >= v[i + 1]
        if left and right:
            return PeakReport(float(series.times[i]), float(v[i]), i)
    raise NoPeak(f"no local maximum at or above {threshold}")


# -- Fock-space oracle ---------------------------------------------------

_ANNIHILATE = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_PARITY = sp.csr_matrix(np.diag([1.0, -1.0]))
_ID2 = sp.identity(2, format="csr")


def annihilators(N: int) -> list[sp.csr_matrix]:
    """Fermionic ``c_j`` on ``N`` sites with parity strings over sites ``< j``."""
    ops = []
    for j in range(N):
        factors = [_PARITY] * j + [_ANNIHILATE] + [_ID2] * (N - j - 1)
        ops.append(reduce(lambda a, b: sp.kron(a, b, format="csr"), factors))
    return ops


def fock_hamiltonian(matrix, ops=None) -> sp.csr_matrix:
    M = np.asarray(matrix, dtype=float)
    N = len(M)
    c = ops or annihilators(N)
    H = sp.csr_matrix((2**N, 2**N))
    for i in range(N):
        for j in range(i + 1, N):
            if M[i, j] != 0.0:
                hop = c[i].T @ c[j]
                H = H + M[i, j] * (hop + hop.T)
    return H.tocsr()


def fock_state(sites, ops) -> np.ndarray:
    """``c+_{s1} c+_{s2} ... |0>`` as a dense vector."""
    dim = ops[0].shape[0]
    psi = np.zeros(dim)
    psi[0] = 1.0
    for s in reversed(list(sites)):
        psi = ops[s].T @ psi
    return psi


def fock_oracle_amplitude(spec_or_matrix, sources, targets, t):
    """``<targets| exp(-iHt) |sources>`` computed in the full 2**N Fock space.

    ``spec_or_matrix`` is a ``NetworkSpec`` or a coupling matrix. ``t`` may
    be a scalar or an array of times.
    """
    if isinstance(spec_or_matrix, net.NetworkSpec):
        M = net.to_adjacency(spec_or_matrix)
    else:
        M = np.asarray(spec_or_matrix, dtype=float)
    N = len(M)
    if N > FOCK_MAX_SITES:
        raise TooLarge(f"Fock oracle limited to {FOCK_MAX_SITES} sites, got {N}")
    sources, targets = list(sources), list(targets)
    _check_site_lists(sources, targets)
    ops = annihilators(N)
    H = fock_hamiltonian(M, ops)
    psi0 = fock_state(sources, ops)
    bra = fock_state(targets, ops)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if N <= FOCK_DENSE_MAX_SITES:
        E, V = np.linalg.eigh(H.toarray())
        left, right = bra @ V, V.T @ psi0
        out = np.exp(-1j * np.multiply.outer(times, E)) @ (left * right)
    else:
        out = np.array([bra @ expm_multiply(-1j * tt * H, psi0.astype(complex)) for tt in times])
    return complex(out[0]) if np.ndim(t) == 0 else out
