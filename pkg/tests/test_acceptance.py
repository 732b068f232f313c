"""End-to-end acceptance suite.

Statistical end-to-end checks of the full pipeline: simulator against the
stabilizer oracle, shadow unbiasedness and entropy bounds, threshold
crossings with and without record noise, the failure of uncorrected
predictions, and scan determinism.  The scan-based tests are heavy; the
noise-probe fixture dominates the runtime.
"""

import hashlib
import itertools
import math

import numpy as np
import pytest

from ptim.cluster import ClusterState, InitialStateSpec
from ptim.correction import (augment_E, augment_S, decode,
                             decoded_correlation, predict_state,
                             StatePrediction, ENTANGLED, PRODUCT,
                             PARTIAL_MIXED)
from ptim.harness import (NoCrossingError, ScanConfig, curve_from_rows,
                          delta_probe, find_crossing, run_scan)
from ptim.matching import (MINUS_PARITY, PLUS_PARITY, SyndromeGraph,
                           mwpm_bruteforce, mwpm_exact)
from ptim.protocols import (DECODE_STREAM, ProtocolConfig, run_sample,
                            sample_rng)
from ptim.shadows import make_shadow, make_pair_shadow, regularize, \
    shadow_entropy
from ptim.tableau import Pauli, Tableau

# ---------------------------------------------------------------------------
# oracle equivalence


def random_init(L, rng):
    kind = rng.integers(3)
    if kind == 0:
        return InitialStateSpec(kind="ghz", num_qubits=L,
                                ghz_parity=1 if rng.integers(2) else -1)
    if kind == 1:
        return InitialStateSpec(kind="ghz", num_qubits=L, with_ancilla=True,
                                ghz_parity=1 if rng.integers(2) else -1)
    bits = tuple(int(b) for b in rng.integers(0, 2, L))
    return InitialStateSpec(kind="classical", num_qubits=L,
                            classical_bits=bits)


def test_oracle_equivalence_on_random_trajectories():
    """Coupled cluster/tableau runs agree on classification, outcomes,
    and entanglement entropies; 1000 trajectories, zero mismatches."""
    rng = np.random.default_rng(20260826)
    for traj in range(1000):
        L = int(rng.integers(2, 9))
        T = int(rng.integers(1, 9))
        p = (0.2, 0.5, 0.8)[traj % 3]
        spec = random_init(L, rng)
        n = spec.total_qubits
        cs = ClusterState(spec)
        tab = Tableau.from_spec(spec)
        for _ in range(T):
            for i in range(L):
                if rng.random() < p:
                    px = Pauli.x_on(n, i)
                    assert cs.e_deterministic(i) == \
                        tab.is_deterministic(px)
                    out = cs.measure_e(i, rng)
                    assert tab.measure(px, force=out) == out
            for j in range(L - 1):
                if rng.random() >= p:
                    pzz = Pauli.zz_on(n, j, j + 1)
                    assert cs.s_deterministic(j) == \
                        tab.is_deterministic(pzz)
                    out = cs.measure_s(j, rng)
                    assert tab.measure(pzz, force=out) == out
        for cut in range(1, n):
            sub = range(cut)
            assert cs.entanglement_entropy(sub) == \
                tab.entanglement_entropy(sub)
        if spec.with_ancilla:
            assert cs.entanglement_entropy([n - 1]) == \
                tab.entanglement_entropy([n - 1])


# ---------------------------------------------------------------------------
# shadow unbiasedness and Klein bound

ALL_FORMS = [
    StatePrediction(ENTANGLED, sign_xx=1, sign_zz=1),
    StatePrediction(ENTANGLED, sign_xx=1, sign_zz=-1),
    StatePrediction(ENTANGLED, sign_xx=-1, sign_zz=1),
    StatePrediction(ENTANGLED, sign_xx=-1, sign_zz=-1),
    StatePrediction(PRODUCT, sign_xx=1, sign_xa=1),
    StatePrediction(PRODUCT, sign_xx=1, sign_xa=-1),
    StatePrediction(PRODUCT, sign_xx=-1, sign_xa=1),
    StatePrediction(PARTIAL_MIXED, sign_xx=1),
]

_PAULIS = {"X": np.array([[0, 1], [1, 0]], dtype=complex),
           "Y": np.array([[0, -1j], [1j, 0]]),
           "Z": np.array([[1, 0], [0, -1]], dtype=complex)}


def born(rho, basis, outcome):
    proj = (np.eye(len(rho)) + outcome * basis) / 2
    return float(np.trace(proj @ rho).real)


def test_shadow_unbiasedness_exact_enumeration():
    for pred in ALL_FORMS:
        rho = pred.pair_rho().astype(complex)
        avg = np.zeros((4, 4), dtype=complex)
        for ba, bl in itertools.product("XYZ", repeat=2):
            big = np.kron(_PAULIS[ba], _PAULIS[bl])
            for oa, ol in itertools.product((1, -1), repeat=2):
                proj = (np.kron((np.eye(2) + oa * _PAULIS[ba]) / 2,
                                (np.eye(2) + ol * _PAULIS[bl]) / 2))
                w = float(np.trace(proj @ rho).real)
                avg += w * make_pair_shadow(ba, oa, bl, ol) / 9
        assert np.allclose(avg, rho, atol=1e-12)


def test_epsilon_one_entropy_shadow_is_exact():
    for pred in ALL_FORMS:
        for basis in "XYZ":
            for outcome in (1, -1):
                s1 = shadow_entropy(make_shadow(basis, outcome),
                                    regularize(pred.ancilla_rho(), 1.0))
                assert abs(s1 - 1.0) < 1e-12
                pair = make_pair_shadow(basis, outcome, basis, outcome)
                s2 = shadow_entropy(pair, regularize(pred.pair_rho(), 1.0))
                assert abs(s2 - 2.0) < 1e-12


def test_klein_bound_orders_shadow_means():
    """Mean upper shadow >= mean ancilla EE >= mean lower shadow at every
    regularization, within 3 combined standard errors."""
    rows = run_scan(ScanConfig("shadow", (16,), (0.4, 0.5, 0.6),
                               (0.0, 0.2), samples=2500, master_seed=16))
    for eta in (0.0, 0.2):
        for p in (0.4, 0.5, 0.6):
            sel = [r for r in rows if abs(r.p - p) < 1e-12
                   and abs(r.eta - eta) < 1e-12]
            (sa,) = [r for r in sel if r.estimator == "S_a"]
            for r in sel:
                tol = 3 * math.hypot(r.stderr, sa.stderr)
                if r.estimator == "S_upper":
                    assert r.mean >= sa.mean - tol, (p, eta, r.epsilon)
                elif r.estimator == "S_lower":
                    assert r.mean <= sa.mean + tol, (p, eta, r.epsilon)


# ---------------------------------------------------------------------------
# noise-free thresholds

GRID5 = (0.42, 0.46, 0.50, 0.54, 0.58)


def test_noise_free_ancilla_crossing_near_half():
    rows = run_scan(ScanConfig("ancilla", (12, 24), GRID5,
                               samples=10000, master_seed=31))
    a = curve_from_rows(rows, "S_a", 12, 0.0)
    b = curve_from_rows(rows, "S_a", 24, 0.0)
    est = find_crossing(a, b, (12, 24))
    assert 0.47 <= est.p_cross <= 0.53


def test_noise_free_decoding_crossing_near_half():
    rows = run_scan(ScanConfig("decoding", (12, 24), GRID5,
                               samples=4000, master_seed=32))
    a = curve_from_rows(rows, "R", 12, 0.0)
    b = curve_from_rows(rows, "R", 24, 0.0)
    est = find_crossing(a, b, (12, 24))
    assert 0.47 <= est.p_cross <= 0.53


def test_noise_free_survivors_decode_perfectly():
    seed, n = 33, 2000
    survivors = 0
    for k in range(n):
        cfg = ProtocolConfig("decoding", L=12, T=12, p=0.5, eta=0.0,
                             master_seed=seed, sample_index=k)
        s = run_sample(cfg)
        corr = decode(s.record, sample_rng(seed, k, DECODE_STREAM))
        if corr.survived:
            survivors += 1
            assert decoded_correlation(s, corr) == 1
    assert survivors > 100


# ---------------------------------------------------------------------------
# matching

def natural_mode(protocol):
    return PLUS_PARITY if protocol == "halfchain" else MINUS_PARITY


def test_noise_free_records_match_at_zero_weight():
    for protocol in ("halfchain", "ancilla", "decoding", "shadow"):
        for k in range(250):
            cfg = ProtocolConfig(protocol, L=8, T=8,
                                 p=(0.3, 0.5, 0.7)[k % 3], eta=0.0,
                                 master_seed=41, sample_index=k)
            record = run_sample(cfg).record
            assert not augment_E(record).added_e
            assert not augment_S(record, natural_mode(protocol)).added_s


def test_mwpm_equals_bruteforce_on_random_graphs():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(1, 6)) * 2
        g = SyndromeGraph(num_defects=n)
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < 0.8:
                g.edges[(i, j)] = int(rng.integers(0, 30))
        try:
            brute = mwpm_bruteforce(g)
        except ValueError:
            continue  # no perfect matching in this draw
        assert mwpm_exact(g).total_weight == brute.total_weight
        checked += 1


# ---------------------------------------------------------------------------
# noisy bounds, ordering, and the noise probe

GRID9 = tuple(round(0.24 + 0.06 * k, 2) for k in range(9))
PROBE_ETAS = ((0.0, 1500), (0.05, 1500), (0.1, 1500), (0.2, 3000))


@pytest.fixture(scope="module")
def noise_probe_points():
    shadow, decoding = {}, {}
    for eta, n in PROBE_ETAS:
        shadow[eta] = run_scan(ScanConfig("shadow", (12, 24), GRID9,
                                          (eta,), samples=n,
                                          master_seed=202))
        decoding[eta] = run_scan(ScanConfig("decoding", (12, 24), GRID9,
                                            (eta,), samples=n,
                                            master_seed=202))
    return delta_probe(shadow, decoding, (12, 24), seed=6)


def test_noisy_crossings_bracket_the_transition(noise_probe_points):
    pt = [q for q in noise_probe_points if q.eta == 0.2][0]
    assert pt.p_lower_shadow.p_cross < 0.5 < pt.p_upper_shadow.p_cross
    assert pt.delta > 0
    assert pt.delta_ci_low > 0


def test_noisy_decoding_and_shadow_lower_bounds_coincide(
        noise_probe_points):
    pt = [q for q in noise_probe_points if q.eta == 0.2][0]
    dec, sha = pt.p_lower_decode, pt.p_lower_shadow
    assert dec is not None
    assert dec.ci_low <= sha.ci_high and sha.ci_low <= dec.ci_high


def test_delta_grows_with_noise(noise_probe_points):
    by_eta = {q.eta: q for q in noise_probe_points}
    assert by_eta[0.0].delta_ci_low <= 0 <= by_eta[0.0].delta_ci_high
    deltas = [by_eta[e].delta for e in (0.05, 0.1, 0.2)]
    assert deltas[0] < deltas[1] < deltas[2]
    assert by_eta[0.2].delta_ci_low > 0


# ---------------------------------------------------------------------------
# baseline failure without correction

def pseudo_threshold(curve):
    """First p where the curve falls below halfway between its
    saturation value (1) and its global minimum."""
    level = (1.0 + min(m for _, m, _ in curve)) / 2
    for (p0, m0, _), (p1, m1, _) in zip(curve, curve[1:]):
        if m0 >= level > m1:
            return p0 + (p1 - p0) * (m0 - level) / (m0 - m1)
    raise AssertionError("curve never drops below its midpoint level")


def test_naive_upper_bound_fails_at_large_sizes():
    rows = run_scan(ScanConfig("shadow", (40, 80),
                               tuple(round(0.3 + 0.1 * k, 1)
                                     for k in range(7)),
                               (0.2,), samples=2000, master_seed=303,
                               predictor="naive"))
    a = curve_from_rows(rows, "naive_S_upper_env", 40, 0.2)
    b = curve_from_rows(rows, "naive_S_upper_env", 80, 0.2)
    with pytest.raises(NoCrossingError):
        find_crossing(a, b, (40, 80))
    assert pseudo_threshold(b) > pseudo_threshold(a)


# ---------------------------------------------------------------------------
# determinism

def test_scan_bytes_identical_for_worker_counts(tmp_path):
    digests = []
    for w in (1, 4, 8):
        out = tmp_path / f"scan_{w}.csv"
        run_scan(ScanConfig("shadow", (6,), (0.4, 0.6), (0.1,),
                            samples=30, master_seed=55, workers=w,
                            out=str(out)))
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert len(set(digests)) == 1
