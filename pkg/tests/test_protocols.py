"""Protocol-level tests: trivial limits, statistics, oracle-coupled replay."""

import numpy as np
import pytest

from ptim.cluster import pair_density_matrix
from ptim.protocols import (
    MeasurementEvent,
    ProtocolConfig,
    born_pair_outcomes,
    run_sample,
    sample_rng,
)
from ptim.tableau import Tableau, Pauli, pauli_matrix

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                dtype=float)


def replay_on_tableau(record):
    """Force the full event history onto a fresh tableau; returns it.

    Raises MeasurementContradiction if the record is inconsistent with
    quantum mechanics, so a clean pass doubles as an outcome check.
    """
    t = Tableau.from_spec(record.spec)
    for ev in record.events:
        if ev.kind == "E":
            t.measure_x(ev.pos, force=ev.outcome)
        else:
            t.measure_zz(ev.pos, force=ev.outcome)
    return t


def test_p_zero_keeps_ghz():
    for idx in range(20):
        s = run_sample(ProtocolConfig("halfchain", L=8, T=16, p=0.0, eta=0.0,
                                      sample_index=idx))
        assert s.entropy == 1
        assert not any(ev.kind == "E" for ev in s.record.events)


def test_p_one_destroys_everything():
    for idx in range(20):
        s = run_sample(ProtocolConfig("ancilla", L=8, T=8, p=1.0, eta=0.0,
                                      sample_index=idx))
        assert s.entropy == 0
        bulk = [ev for ev in s.record.events if ev.t <= 8]
        assert all(ev.kind == "E" for ev in bulk)
        assert len(bulk) == 8 * 8


def test_event_count_binomial():
    p, L, T, runs = 0.37, 10, 10, 400
    total = 0
    for idx in range(runs):
        s = run_sample(ProtocolConfig("halfchain", L=L, T=T, p=p, eta=0.0,
                                      sample_index=idx))
        total += sum(1 for ev in s.record.events if ev.kind == "E")
    n = runs * L * T
    sigma = np.sqrt(n * p * (1 - p))
    assert abs(total - n * p) < 4 * sigma


def test_mask_fraction_binomial():
    eta, runs = 0.2, 300
    applied = recorded = 0
    for idx in range(runs):
        s = run_sample(ProtocolConfig("ancilla", L=10, T=10, p=0.5, eta=eta,
                                      sample_index=idx))
        bulk = [ev for ev in s.record.events if ev.t <= 10]
        applied += len(bulk)
        recorded += sum(1 for ev in bulk if not ev.recorded)
    sigma = np.sqrt(applied * eta * (1 - eta))
    assert abs(recorded - applied * eta) < 4 * sigma


def test_final_rounds_always_recorded():
    s = run_sample(ProtocolConfig("shadow", L=6, T=6, p=0.5, eta=0.9,
                                  sample_index=2))
    special = [ev for ev in s.record.events if ev.t > 6]
    assert all(ev.recorded for ev in special)
    assert {ev.t for ev in special} == {7, 8}
    assert sorted(ev.pos for ev in special if ev.kind == "S") == list(range(5))
    assert sorted(ev.pos for ev in special if ev.kind == "E") == list(range(5))


def test_decoding_p_zero_returns_bit():
    for idx in range(20):
        s = run_sample(ProtocolConfig("decoding", L=8, T=8, p=0.0, eta=0.0,
                                      sample_index=idx))
        assert s.z1 == (-1) ** s.m_star


def test_determinism_per_sample():
    cfg = ProtocolConfig("shadow", L=8, T=8, p=0.45, eta=0.15,
                         master_seed=99, sample_index=5)
    a, b = run_sample(cfg), run_sample(cfg)
    assert a.record.events == b.record.events
    assert (a.basis_a, a.basis_l, a.out_a, a.out_l) == \
           (b.basis_a, b.basis_l, b.out_a, b.out_l)


@pytest.mark.parametrize("protocol", ["halfchain", "ancilla", "decoding",
                                      "shadow"])
def test_records_replay_on_oracle(protocol):
    """Full histories are quantum-mechanically consistent and payloads match."""
    for idx in range(25):
        L = 6
        cfg = ProtocolConfig(protocol, L=L, T=L, p=0.5, eta=0.3,
                             master_seed=11, sample_index=idx)
        s = run_sample(cfg)
        t = replay_on_tableau(s.record)
        if protocol == "halfchain":
            assert t.entanglement_entropy(range(L // 2)) == s.entropy
        elif protocol == "ancilla":
            assert t.entanglement_entropy([L]) == s.entropy
        elif protocol == "decoding":
            t.measure(Pauli(L, zs=[0]), force=s.z1)
        else:
            rho_oracle = t.reduced_density_matrix([L - 1, L])
            rho = SWAP @ s.true_rho @ SWAP
            assert np.allclose(rho, rho_oracle, atol=1e-12)
            assert t.entanglement_entropy([L]) == s.true_entropy


def test_born_frequencies():
    rng = np.random.default_rng(5)
    rho = (pauli_matrix("II") + 0.5 * pauli_matrix("XX")
           + 0.5 * pauli_matrix("ZZ")) / 4
    n = 8000
    counts = {}
    for _ in range(n):
        o = born_pair_outcomes(rho, "Z", "Z", rng)
        counts[o] = counts.get(o, 0) + 1
    for (oa, ob), c in counts.items():
        pa = (np.eye(2) + oa * pauli_matrix("Z")) / 2
        pb = (np.eye(2) + ob * pauli_matrix("Z")) / 2
        want = float(np.real(np.trace(rho @ np.kron(pa, pb))))
        sigma = np.sqrt(n * want * (1 - want))
        assert abs(c - n * want) < 4 * max(sigma, 1.0)


def test_shadow_y_basis_unbiased():
    """Final pair states are real, so single Y outcomes are fair coins."""
    tot = plus = 0
    idx = 0
    while tot < 300:
        s = run_sample(ProtocolConfig("shadow", L=6, T=6, p=0.5, eta=0.2,
                                      master_seed=4, sample_index=idx))
        idx += 1
        if s.basis_a == "Y":
            tot += 1
            plus += s.out_a == 1
    sigma = np.sqrt(tot * 0.25)
    assert abs(plus - tot / 2) < 4 * sigma
