"""Oracle and invariant checks behind ``exrouter verify``."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import fermion, planner, spin
from .network import NetworkSpec, to_adjacency
from .spectral import eigendecompose

TABLE_CONTACTS = {
    1.0: [1, 2, 4, 5, 7, 8, 10, 11],
    float(np.sqrt(2.0)): [1, 3, 5, 7, 9, 11],
    float(np.sqrt(3.0)): [1, 5, 7, 11],
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float | None
    tolerance: float | None
    detail: str = ""
    seconds: float = 0.0

    def to_dict(self):
        return asdict(self)


def random_graph(rng: np.random.Generator, N: int, density: float = 0.5) -> np.ndarray:
    """Symmetric coupling matrix with entries in [-1, 1] and zero diagonal."""
    upper = np.triu(rng.uniform(-1.0, 1.0, (N, N)) * (rng.random((N, N)) < density), 1)
    return upper + upper.T


def determinant_vs_fock(rng, graphs=10, sizes=(4, 8), n_times=5, t_max=50.0) -> float:
    """Largest deviation of squared two-excitation amplitudes between both routes."""
    worst = 0.0
    for _ in range(graphs):
        N = int(rng.integers(sizes[0], sizes[1] + 1))
        M = random_graph(rng, N)
        decomp = eigendecompose(M)
        s = sorted(rng.choice(N, 2, replace=False).tolist())
        r = sorted(rng.choice(N, 2, replace=False).tolist())
        times = rng.uniform(0.0, t_max, n_times)
        oracle = fermion.fock_oracle_amplitude(M, s, r, times)
        det = np.array([fermion.many_body_amplitude(decomp, s, r, t) for t in times])
        worst = max(worst, float(np.max(np.abs(np.abs(det) ** 2 - np.abs(oracle) ** 2))))
    return worst


def unitarity_residual(spec: NetworkSpec, times) -> float:
    """Worst deviation from 1 of single- and two-excitation probability sums."""
    decomp = eigendecompose(to_adjacency(spec))
    worst = 0.0
    for t in times:
        U = decomp.propagator(t)
        single = np.sum(np.abs(U) ** 2, axis=0)
        worst = max(worst, float(np.max(np.abs(single - 1.0))))
        worst = max(worst, abs(fermion.two_excitation_norm(decomp, (0, 1), t) - 1.0))
    return worst


def _timed(name, tolerance, fn, compare="le"):
    start = time.perf_counter()
    measured, detail = fn()
    ok = measured <= tolerance if compare == "le" else measured >= tolerance
    return CheckResult(name, bool(ok), measured, tolerance, detail, time.perf_counter() - start)


def _planner_identities():
    plan = planner.routing_table(11, 1)
    mismatches = 0
    for J, expected in TABLE_CONTACTS.items():
        entry = next(e for e in plan.entries if abs(e.J_address - J) < 1e-12)
        mismatches += list(entry.contacts) != expected
    allowed = planner.allowed_contacts(4, 11, 1)
    forbidden = sorted(set(range(1, 12)) - set(allowed))
    mismatches += forbidden != planner.forbidden_contacts(11)
    mismatches += planner.receiver_count(11) != 8
    return float(mismatches), "n_w=11 contact sets, forbidden sites, receiver count"


def _resonant_run():
    series = fermion.transfer_fidelity(NetworkSpec.chain(11, 7), np.linspace(0, 5000, 2001))
    peak, t_peak = series.peak()
    return peak, f"n_w=11 contact 7: peak {peak:.6f} at t={t_peak:g}"


def _spin_vs_fermion():
    spec = NetworkSpec.chain(11)
    times = np.linspace(0.0, 5000.0, 2001)
    a = fermion.transfer_fidelity(spec, times).values
    b = spin.spin_transfer_probability(spec, times).values
    return float(np.max(np.abs(a - b))), "pure chain n_w=11, 2001 points on [0, 5000]"


def _spin_suppression():
    times = np.linspace(0.0, 5000.0, 2001)
    peaks = {c: spin.spin_transfer_probability(NetworkSpec.chain(32, c), times).values.max()
             for c in (32, 30, 27)}
    worst = max(peaks[30], peaks[27])
    detail = ", ".join(f"contact {c}: {p:.4f}" for c, p in peaks.items())
    ok = worst <= 0.1 and peaks[32] >= 0.5
    return (0.0 if ok else 1.0), detail


def band_edge_scan(n_w=11, contact=None, points=21):
    """Peak fidelity with ``J_s = J_r`` set to each band-edge address candidate.

    Candidates are the planner addresses of levels 1 and floor(n_w/2), the best
    point of a fine scan around each, and for n_w=11 the two legacy values
    (sqrt(3) -/+ 1)/2. Rows are ``(label, J, peak)``.
    """
    contact = n_w if contact is None else contact
    times = np.linspace(0.0, 5000.0, 2001)
    candidates = []
    for k in (1, n_w // 2):
        J_plan = planner.level_energy(k, n_w)
        scan = J_plan + np.linspace(-0.05, 0.05, points)
        scan = scan[(scan > 0) & (scan < 2)]
        best = max(scan, key=lambda J: _peak(n_w, contact, J, times))
        candidates += [(f"planner k={k}", J_plan), (f"scan-best k={k}", float(best))]
    if n_w == 11:
        r3 = np.sqrt(3.0)
        candidates += [("legacy (sqrt3-1)/2", (r3 - 1) / 2), ("legacy (sqrt3+1)/2", (r3 + 1) / 2)]
    return [(label, float(J), _peak(n_w, contact, J, times)) for label, J in candidates]


def _peak(n_w, contact, J, times):
    spec = NetworkSpec.chain(n_w, contact, J_s=J, J_r=J)
    return float(fermion.transfer_fidelity(spec, times).values.max())


def _band_edge():
    rows = band_edge_scan()
    planner_peaks = [p for label, _, p in rows if label.startswith("planner")]
    detail = "; ".join(f"{label} J={J:.6f} peak={p:.4f}" for label, J, p in rows)
    return min(planner_peaks), detail


def run_checks(level: str = "fast", extra: NetworkSpec | None = None, seed: int = 2024):
    rng = np.random.default_rng(seed)
    results = [
        _timed("determinant_vs_fock", 1e-10,
               lambda: (determinant_vs_fock(rng), "random graphs N in [4, 8], m=2")),
        _timed("unitarity_fig1", 1e-8,
               lambda: (unitarity_residual(NetworkSpec.chain(11, 7), [0.0, 1.0, 1000.0, 5000.0]),
                        "n_w=11 contact 7")),
        _timed("planner_identities", 0.0, _planner_identities),
        _timed("resonant_switchable", 0.95, _resonant_run, compare="ge"),
    ]
    if extra is not None:
        results.append(_timed("unitarity_config", 1e-8,
                              lambda: (unitarity_residual(extra, [0.0, 1.0, 50.0 / extra.J0]),
                                       "network from --config")))
    if level == "full":
        results += [
            _timed("spin_vs_fermion_1d", 1e-6, _spin_vs_fermion),
            _timed("spin_suppression_nw32", 0.0, _spin_suppression),
            _timed("band_edge_scan", 0.9, _band_edge, compare="ge"),
        ]
    return results
