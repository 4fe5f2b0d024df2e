"""Single-particle spectrum and transition amplitudes."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndexOutOfRange, NotSymmetric

SYMMETRY_TOL = 1e-12
CACHE_ENV = "EXROUTER_CACHE_DIR"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric coupling matrix.

    ``modes[n, k]`` is the component of eigenvector ``k`` on site ``n``.
    """

    energies: np.ndarray
    modes: np.ndarray

    @property
    def size(self) -> int:
        return len(self.energies)

    def propagator(self, t) -> np.ndarray:
        """Full single-particle propagator ``exp(-iHt)`` with ``[r, s] = f_s^r(t)``."""
        return (self.modes * np.exp(-1j * self.energies * t)) @ self.modes.T

    def to_dict(self) -> dict:
        return {"energies": self.energies.tolist(), "modes": self.modes.tolist()}

    @classmethod
    def from_dict(cls, d) -> "SpectralDecomposition":
        return cls(np.asarray(d["energies"], float), np.asarray(d["modes"], float))


def _fix_signs(modes: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; near-ties go to the lowest site
    mags = np.abs(modes)
    pivot = np.argmax(mags >= mags.max(axis=0) - 1e-12, axis=0)
    signs = np.sign(modes[pivot, np.arange(modes.shape[1])])
    signs[signs == 0] = 1.0
    return modes * signs


def eigendecompose(matrix) -> SpectralDecomposition:
    """Dense eigendecomposition with ascending energies and fixed signs.

    Raises
    ------
    NotSymmetric
        If any entry differs from its transpose by more than 1e-12.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    energies, modes = np.linalg.eigh(M)
    return SpectralDecomposition(energies, _fix_signs(modes))


def matrix_key(matrix) -> str:
    M = np.ascontiguousarray(matrix, dtype=float)
    h = hashlib.sha256()
    h.update(repr(M.shape).encode())
    h.update(M.tobytes())
    return h.hexdigest()


def cached_eigendecompose(matrix, cache_dir=None) -> SpectralDecomposition:
    """``eigendecompose`` backed by an ``.npz`` cache keyed on the matrix bytes.

    The cache directory defaults to ``$EXROUTER_CACHE_DIR``; without either
    the call is uncached.
    """
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return eigendecompose(matrix)
    path = Path(cache_dir) / f"{matrix_key(matrix)}.npz"
    if path.exists():
        with np.load(path) as data:
            return SpectralDecomposition(data["energies"], data["modes"])
    decomp = eigendecompose(matrix)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, energies=decomp.energies, modes=decomp.modes)
    os.replace(tmp, path)
    return decomp


def dump_json(decomp: SpectralDecomposition, path) -> None:
    Path(path).write_text(json.dumps(decomp.to_dict()), encoding="utf-8")


def load_json(path) -> SpectralDecomposition:
    return SpectralDecomposition.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def wire_mode_component(k, n_w, m):
    """Normalised sine-mode amplitude of level ``k`` on wire site ``m``."""
    return np.sqrt(2.0 / (n_w + 1)) * np.sin(k * np.asarray(m) * np.pi / (n_w + 1))


def wire_mode(k: int, n_w: int, J: float = 1.0) -> tuple[float, np.ndarray]:
    """Closed-form eigenpair ``k`` (1-based) of an isolated uniform wire.

    Levels are numbered in decreasing energy, ``E_k = 2 J cos(k pi / (n_w + 1))``.
    """
    if not 1 <= k <= n_w:
        raise IndexOutOfRange(f"level {k} outside 1..{n_w}")
    energy = 2.0 * J * np.cos(k * np.pi / (n_w + 1))
    return float(energy), wire_mode_component(k, n_w, np.arange(1, n_w + 1))


def _check_sites(decomp, *sites):
    for s in sites:
        if not 0 <= s < decomp.size:
            raise IndexOutOfRange(f"site {s} outside 0..{decomp.size - 1}")


def _phased_rows(decomp, sites, t):
    return decomp.modes[list(sites)] * np.exp(-1j * decomp.energies * t)


def single_amplitude(decomp: SpectralDecomposition, s: int, r: int, t):
    """Amplitude ``<r| exp(-iHt) |s>`` for 0-based sites; ``t`` may be an array."""
    _check_sites(decomp, s, r)
    if np.ndim(t) == 0:
        return complex(np.dot(_phased_rows(decomp, [s], t)[0], decomp.modes[r]))
    weights = decomp.modes[r] * decomp.modes[s]
    phases = np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), decomp.energies))
    return phases @ weights


@dataclass(frozen=True)
class AmplitudeBlock:
    t: float
    sources: tuple[int, ...]
    targets: tuple[int, ...]
    values: np.ndarray  # values[i, j] = f_{sources[i]}^{targets[j]}(t)


def amplitude_block(decomp, sources, targets, t) -> AmplitudeBlock:
    _check_sites(decomp, *sources, *targets)
    phased = _phased_rows(decomp, sources, t)
    values = np.empty((len(sources), len(targets)), dtype=complex)
    for i in range(len(sources)):
        for j, r in enumerate(targets):
            values[i, j] = np.dot(phased[i], decomp.modes[r])
    return AmplitudeBlock(float(t), tuple(sources), tuple(targets), values)
