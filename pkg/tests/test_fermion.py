import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exrouter import fermion
from exrouter.errors import LengthMismatch, NoActiveReceiver, NoPeak, TooLarge, UnsortedSites
from exrouter.fermion import (
    FidelitySeries,
    first_peak,
    fock_oracle_amplitude,
    many_body_amplitude,
    transfer_fidelity,
)
from exrouter.network import NetworkSpec, ReceiverSpec, to_adjacency
from exrouter.spectral import amplitude_block, eigendecompose, single_amplitude
from exrouter.verify import random_graph


def test_identity_at_zero(make_graph):
    d = eigendecompose(make_graph(6))
    assert many_body_amplitude(d, [1, 4], [1, 4], 0.0) == pytest.approx(1.0, abs=1e-14)
    assert many_body_amplitude(d, [1, 4], [2, 4], 0.0) == pytest.approx(0.0, abs=1e-14)


def test_two_by_two_layout_matches_explicit_determinant():
    d = eigendecompose(to_adjacency(NetworkSpec.chain(11, 7)))
    N, t = d.size, 812.5
    f = lambda s, r: single_amplitude(d, s, r, t)
    explicit = f(0, N - 2) * f(1, N - 1) - f(0, N - 1) * f(1, N - 2)
    assert many_body_amplitude(d, [0, 1], [N - 2, N - 1], t) == pytest.approx(explicit, abs=1e-14)


def test_m1_reduces_to_single_amplitude(make_graph):
    d = eigendecompose(make_graph(5))
    assert many_body_amplitude(d, [2], [4], 1.3) == single_amplitude(d, 2, 4, 1.3)


def test_argument_errors(make_graph):
    d = eigendecompose(make_graph(5))
    with pytest.raises(LengthMismatch):
        many_body_amplitude(d, [0, 1], [2], 1.0)
    with pytest.raises(UnsortedSites):
        many_body_amplitude(d, [1, 0], [2, 3], 1.0)
    with pytest.raises(UnsortedSites):
        many_body_amplitude(d, [0, 1], [3, 3], 1.0)


# -- oracle agreement -------------------------------------------------------

def test_oracle_m1_equals_single_amplitude(make_graph):
    M = make_graph(7)
    d = eigendecompose(M)
    times = np.array([0.0, 0.4, 3.7, 21.0])
    oracle = fock_oracle_amplitude(M, [2], [5], times)
    np.testing.assert_allclose(oracle, single_amplitude(d, 2, 5, times), atol=1e-12)


def test_oracle_identity_at_zero(make_graph):
    M = make_graph(5)
    assert fock_oracle_amplitude(M, [0, 3], [0, 3], 0.0) == pytest.approx(1.0, abs=1e-14)
    assert fock_oracle_amplitude(M, [0, 3], [1, 3], 0.0) == pytest.approx(0.0, abs=1e-14)


def test_determinant_matches_oracle_six_sites(make_graph):
    M = make_graph(6)
    d = eigendecompose(M)
    for s, r in [([0, 1], [4, 5]), ([1, 3], [0, 2]), ([2, 5], [2, 5])]:
        assert many_body_amplitude(d, s, r, 3.7) == pytest.approx(
            fock_oracle_amplitude(M, s, r, 3.7), abs=1e-10
        )


def test_determinant_matches_oracle_eight_sites(rng):
    M = random_graph(rng, 8, density=0.7)
    d = eigendecompose(M)
    times = rng.uniform(0, 50, 20)
    oracle = fock_oracle_amplitude(M, [0, 1], [6, 7], times)
    det = np.array([many_body_amplitude(d, [0, 1], [6, 7], t) for t in times])
    np.testing.assert_allclose(det, oracle, atol=1e-10)


def test_determinant_matches_sparse_oracle_route(rng):
    # N > 10 goes through the sparse exponential action instead of eigh
    M = random_graph(rng, 11, density=0.4)
    d = eigendecompose(M)
    times = [0.7, 9.1]
    oracle = fock_oracle_amplitude(M, [0, 4], [3, 10], times)
    det = [many_body_amplitude(d, [0, 4], [3, 10], t) for t in times]
    np.testing.assert_allclose(det, oracle, atol=1e-10)


def test_three_particles_best_effort(rng):
    M = random_graph(rng, 7)
    d = eigendecompose(M)
    assert many_body_amplitude(d, [0, 2, 5], [1, 3, 6], 2.2) == pytest.approx(
        fock_oracle_amplitude(M, [0, 2, 5], [1, 3, 6], 2.2), abs=1e-10
    )


def test_oracle_too_large():
    with pytest.raises(TooLarge):
        fock_oracle_amplitude(np.zeros((15, 15)), [0, 1], [2, 3], 1.0)


def test_oracle_accepts_network_spec():
    spec = NetworkSpec.chain(4, 2)
    d = eigendecompose(to_adjacency(spec))
    assert fock_oracle_amplitude(spec, [0, 1], [6, 7], 40.0) == pytest.approx(
        many_body_amplitude(d, [0, 1], [6, 7], 40.0), abs=1e-10
    )


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 9), st.integers(0, 2**32 - 1), st.floats(0, 50))
def test_determinant_oracle_property(N, seed, t):
    rng = np.random.default_rng(seed)
    M = random_graph(rng, N)
    s = sorted(rng.choice(N, 2, replace=False))
    r = sorted(rng.choice(N, 2, replace=False))
    det = many_body_amplitude(eigendecompose(M), s, r, t)
    assert abs(det) ** 2 == pytest.approx(abs(fock_oracle_amplitude(M, s, r, t)) ** 2, abs=1e-10)


# -- invariants -------------------------------------------------------------

@pytest.mark.parametrize("t", [0.0, 3.3, 250.0, 4999.0])
def test_two_excitation_unitarity(t):
    d = eigendecompose(to_adjacency(NetworkSpec.chain(11, 5)))
    N = d.size
    total = sum(
        abs(many_body_amplitude(d, [0, 1], [r1, r2], t)) ** 2
        for r1 in range(N) for r2 in range(r1 + 1, N)
    )
    assert total == pytest.approx(1.0, abs=1e-8)
    assert fermion.two_excitation_norm(d, (0, 1), t) == pytest.approx(total, abs=1e-12)


def test_antisymmetry(make_graph):
    M = make_graph(6)
    d = eigendecompose(M)
    block = amplitude_block(d, [0, 2], [5, 3], 4.2).values
    assert fermion.slater_determinant(block) == -many_body_amplitude(d, [0, 2], [3, 5], 4.2)
    assert fermion.slater_determinant(block[:, ::-1]) == -fermion.slater_determinant(block)
    ops = fermion.annihilators(4)
    np.testing.assert_array_equal(fermion.fock_state([3, 1], ops), -fermion.fock_state([1, 3], ops))


def test_permanent_continuity_with_switchable():
    J0 = 1e-6
    times = np.linspace(0.0, 50.0, 401) / J0
    perm = NetworkSpec(
        n_w=11, J0=J0, mode="permanent",
        receivers=(ReceiverSpec(2, np.sqrt(2.0)), ReceiverSpec(7, 1.0)),
    )
    a = transfer_fidelity(perm, times).values
    b = transfer_fidelity(NetworkSpec.chain(11, 7, J0=J0), times).values
    assert np.max(np.abs(a - b)) <= 1e-3


# -- transfer series ----------------------------------------------------------

def test_transfer_starts_at_zero():
    series = transfer_fidelity(NetworkSpec.chain(11, 7), [0.0, 1.0])
    assert series.values[0] == pytest.approx(0.0, abs=1e-20)
    assert series.meta["engine"] == "fermion" and series.meta["active_sites"] == 15


def test_resonant_transfer_fig2():
    series = transfer_fidelity(NetworkSpec.chain(11, 7), np.linspace(0, 5000, 2001))
    assert series.values.max() >= 0.95
    assert 200 <= first_peak(series, 0.5).t_peak <= 5000


def test_forbidden_contact_suppressed():
    series = transfer_fidelity(NetworkSpec.chain(11, 6), np.linspace(0, 2000, 801))
    assert series.values.max() <= 0.05


def test_default_grid_and_idle_blocks():
    spec = NetworkSpec(n_w=11, receivers=(ReceiverSpec(2, active=False), ReceiverSpec(7)))
    series = transfer_fidelity(spec)
    assert len(series.times) == 2001 and series.times[-1] == pytest.approx(5000.0)
    assert series.meta["total_sites"] == 17 and series.meta["active_sites"] == 15
    np.testing.assert_allclose(series.values, transfer_fidelity(NetworkSpec.chain(11, 7)).values, atol=1e-12)


def test_no_active_receiver():
    spec = NetworkSpec(n_w=5, receivers=(ReceiverSpec(2, active=False),))
    with pytest.raises(NoActiveReceiver):
        transfer_fidelity(spec, [0.0, 1.0])


# -- peaks and serialization --------------------------------------------------

def test_first_peak_sinusoid():
    t = np.arange(0.0, 5000.0, 10.0)
    report = first_peak(FidelitySeries(t, np.sin(0.001 * t) ** 2), 0.5)
    assert abs(report.t_peak - np.pi / 0.002) <= 10.0
    assert report.value_peak == FidelitySeries(t, np.sin(0.001 * t) ** 2).values[report.index]


def test_first_peak_none():
    with pytest.raises(NoPeak):
        first_peak(FidelitySeries(np.arange(5.0), np.zeros(5)), 0.5)
    with pytest.raises(ValueError):
        first_peak(FidelitySeries(np.arange(5.0), np.zeros(5)), 1.5)


def test_series_rejects_bad_times():
    with pytest.raises(ValueError):
        FidelitySeries([0.0, 0.0], [0.1, 0.2])


def test_csv_and_json_round_trip(tmp_path):
    series = transfer_fidelity(NetworkSpec.chain(5, 5), np.linspace(0, 100, 11))
    text = series.to_csv(tmp_path / "s.csv")
    assert text.splitlines()[0] == "t,probability"
    back = FidelitySeries.from_csv(tmp_path / "s.csv")
    np.testing.assert_allclose(back.values, series.values, rtol=1e-11, atol=1e-300)
    doc = json.loads(series.to_json())
    assert doc["meta"]["network"]["n_w"] == 5
    again = FidelitySeries.from_json(series.to_json())
    np.testing.assert_array_equal(again.values, series.values)
