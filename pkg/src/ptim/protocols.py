"""The four experimental protocols and their per-sample records.

Each protocol runs bulk evolution (per timestep: every site X-measured with
probability p in ascending order, then every bond ZZ-measured with
probability 1-p in ascending order), applies the noise mask (each bulk
event unrecorded with probability eta), and appends its protocol-specific
perfect rounds.  Time coordinates in events: bulk timestep t in 1..T;
a final or transfer ZZ round sits at t = T+1 and a transfer X round at
t = T+2.  The implicit initialization ZZ round (t = 0) is not stored; its
outcomes follow from the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cluster import ClusterState, InitialStateSpec, pair_density_matrix

FINAL_S_TIME = lambda T: T + 1  # noqa: E731
TRANSFER_E_TIME = lambda T: T + 2  # noqa: E731


@dataclass(frozen=True)
class MeasurementEvent:
    t: int
    kind: str  # "E" (site X) or "S" (bond ZZ)
    pos: int   # site index for E, left qubit of the bond for S
    outcome: int
    recorded: bool = True


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str  # halfchain | ancilla | decoding | shadow
    L: int
    T: int
    p: float
    eta: float
    master_seed: int = 0
    sample_index: int = 0

    def validate(self) -> None:
        if self.protocol not in ("halfchain", "ancilla", "decoding", "shadow"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not 0.0 <= self.p <= 1.0 or not 0.0 <= self.eta <= 1.0:
            raise ValueError("p and eta must lie in [0, 1]")
        if self.L < 2 or self.T < 1:
            raise ValueError("need L >= 2 and T >= 1")
        if self.protocol == "halfchain" and self.L % 2:
            raise ValueError("halfchain protocol needs even L")


@dataclass
class MeasurementRecord:
    """Observed view of one trajectory plus the retained full history."""

    config: ProtocolConfig
    spec: InitialStateSpec
    events: list[MeasurementEvent]

    @property
    def has_final_s_round(self) -> bool:
        return self.config.protocol in ("decoding", "ancilla", "shadow")

    @property
    def has_transfer_e_round(self) -> bool:
        return self.config.protocol in ("ancilla", "shadow")

    def observed(self) -> list[MeasurementEvent]:
        return [ev for ev in self.events if ev.recorded]

    def _index(self, kind, recorded_only):
        return {(ev.t, ev.pos): ev.outcome for ev in self.events
                if ev.kind == kind and (ev.recorded or not recorded_only)}

    def observed_e(self) -> dict[tuple[int, int], int]:
        return self._index("E", True)

    def observed_s(self) -> dict[tuple[int, int], int]:
        return self._index("S", True)

    def full_e(self) -> dict[tuple[int, int], int]:
        return self._index("E", False)

    def full_s(self) -> dict[tuple[int, int], int]:
        return self._index("S", False)

    def init_s_outcomes(self) -> dict[int, int]:
        """Outcomes of the implicit perfect ZZ round at t = 0."""
        L = self.config.L
        if self.spec.kind == "ghz":
            return {j: 1 for j in range(L - 1)}
        b = self.spec.classical_bits
        return {j: -1 if b[j] ^ b[j + 1] else 1 for j in range(L - 1)}


@dataclass
class Sample:
    record: MeasurementRecord
    # protocol payloads (unused ones stay None)
    entropy: int | None = None            # halfchain S(L/2) or ancilla S({a})
    m_star: int | None = None             # decoding: encoded bit
    z1: int | None = None                 # decoding: final Z readout, qubit 0
    basis_a: str | None = None            # shadow: Pauli basis on the ancilla
    basis_l: str | None = None            # shadow: Pauli basis on qubit L-1
    out_a: int | None = None
    out_l: int | None = None
    # diagnostics, never consumed by estimators
    true_rho: np.ndarray | None = None
    true_entropy: int | None = None


TRAJECTORY_STREAM = 0
SHADOW_STREAM = 1
DECODE_STREAM = 2


def sample_rng(master_seed: int, sample_index: int, stream: int):
    seq = np.random.SeedSequence(entropy=(master_seed, sample_index, stream))
    return np.random.default_rng(seq)


def run_bulk_evolution(state: ClusterState, cfg: ProtocolConfig, rng):
    """T timesteps of the projective Ising dynamics; returns the event list.

    The ancilla (if present) is never touched.  Draw order is fixed: per
    timestep one uniform per site (apply X if u < p), then one uniform per
    bond (apply ZZ if u < 1-p); each applied measurement that is random in
    the current state consumes one extra draw for its outcome.
    """
    L = cfg.L
    events = []
    for t in range(1, cfg.T + 1):
        for i in range(L):
            if rng.random() < cfg.p:
                out = state.measure_e(i, rng=rng)
                events.append(MeasurementEvent(t, "E", i, out))
        for j in range(L - 1):
            if rng.random() < 1.0 - cfg.p:
                out = state.measure_s(j, rng=rng)
                events.append(MeasurementEvent(t, "S", j, out))
    return events


def mask_record(events, eta: float, rng, T: int):
    """Mark each bulk event unrecorded with probability eta."""
    if eta == 0.0:
        return list(events)
    masked = []
    for ev in events:
        if 1 <= ev.t <= T and rng.random() < eta:
            masked.append(replace(ev, recorded=False))
        else:
            masked.append(ev)
    return masked


def _final_s_round(state, L, T, rng):
    t = FINAL_S_TIME(T)
    return [MeasurementEvent(t, "S", j, state.measure_s(j, rng=rng))
            for j in range(L - 1)]


def _transfer_e_round(state, L, T, rng):
    t = TRANSFER_E_TIME(T)
    return [MeasurementEvent(t, "E", i, state.measure_e(i, rng=rng))
            for i in range(L - 1)]


def protocol_halfchain(cfg: ProtocolConfig, rng) -> Sample:
    cfg.validate()
    spec = InitialStateSpec(kind="ghz", num_qubits=cfg.L)
    state = ClusterState(spec)
    events = run_bulk_evolution(state, cfg, rng)
    events = mask_record(events, cfg.eta, rng, cfg.T)
    rec = MeasurementRecord(cfg, spec, events)
    return Sample(rec, entropy=state.entanglement_entropy(range(cfg.L // 2)))


def protocol_ancilla(cfg: ProtocolConfig, rng) -> Sample:
    """Ancilla protocol: bulk evolution then a perfect entanglement transfer.

    The transfer measures every system bond (ZZ) and then X on every site
    except the last system qubit; all transfer events are recorded.  The
    payload is the ancilla entropy, 0 or 1.
    """
    cfg.validate()
    L = cfg.L
    spec = InitialStateSpec(kind="ghz", num_qubits=L, with_ancilla=True)
    state = ClusterState(spec)
    events = run_bulk_evolution(state, cfg, rng)
    events = mask_record(events, cfg.eta, rng, cfg.T)
    events += _final_s_round(state, L, cfg.T, rng)
    events += _transfer_e_round(state, L, cfg.T, rng)
    rec = MeasurementRecord(cfg, spec, events)
    return Sample(rec, entropy=state.entanglement_entropy([L]))


def protocol_decoding(cfg: ProtocolConfig, rng) -> Sample:
    """Bit-retrieval protocol: classical |m*...m*> init, perfect final ZZ
    round, then a Z readout of qubit 0."""
    cfg.validate()
    L = cfg.L
    m_star = int(rng.integers(2))
    spec = InitialStateSpec(kind="classical", num_qubits=L,
                            classical_bits=(m_star,) * L)
    state = ClusterState(spec)
    events = run_bulk_evolution(state, cfg, rng)
    events = mask_record(events, cfg.eta, rng, cfg.T)
    events += _final_s_round(state, L, cfg.T, rng)
    z1 = state.measure_z(0, rng=rng)
    rec = MeasurementRecord(cfg, spec, events)
    return Sample(rec, m_star=m_star, z1=z1)


_BASES = ("X", "Y", "Z")

_PAULI_R = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def born_pair_outcomes(rho: np.ndarray, basis_a: str, basis_b: str, rng):
    """Sample (+-1, +-1) outcomes of a joint Pauli measurement on rho."""
    probs = np.empty(4)
    outs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    for k, (oa, ob) in enumerate(outs):
        pa = (np.eye(2) + oa * _PAULI_R[basis_a]) / 2
        pb = (np.eye(2) + ob * _PAULI_R[basis_b]) / 2
        probs[k] = float(np.real(np.trace(rho @ np.kron(pa, pb))))
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return outs[int(rng.choice(4, p=probs))]


def protocol_shadow(cfg: ProtocolConfig, rng, basis_rng) -> Sample:
    """Ancilla protocol plus one random-basis Pauli snapshot of the pair
    (ancilla, last system qubit).

    Bases and Born-rule outcomes draw from ``basis_rng`` so that the
    trajectory stream is untouched by shadow sampling.
    """
    cfg.validate()
    L = cfg.L
    spec = InitialStateSpec(kind="ghz", num_qubits=L, with_ancilla=True)
    state = ClusterState(spec)
    events = run_bulk_evolution(state, cfg, rng)
    events = mask_record(events, cfg.eta, rng, cfg.T)
    events += _final_s_round(state, L, cfg.T, rng)
    events += _transfer_e_round(state, L, cfg.T, rng)
    rec = MeasurementRecord(cfg, spec, events)
    rho = pair_density_matrix(state, L, L - 1)
    basis_a = _BASES[int(basis_rng.integers(3))]
    basis_l = _BASES[int(basis_rng.integers(3))]
    out_a, out_l = born_pair_outcomes(rho, basis_a, basis_l, basis_rng)
    return Sample(rec, basis_a=basis_a, basis_l=basis_l,
                  out_a=out_a, out_l=out_l,
                  true_rho=rho, true_entropy=state.entanglement_entropy([L]))


_RUNNERS = {
    "halfchain": protocol_halfchain,
    "ancilla": protocol_ancilla,
    "decoding": protocol_decoding,
}


def run_sample(cfg: ProtocolConfig) -> Sample:
    """Generate the sample for (cfg.master_seed, cfg.sample_index)."""
    rng = sample_rng(cfg.master_seed, cfg.sample_index, TRAJECTORY_STREAM)
    if cfg.protocol == "shadow":
        basis_rng = sample_rng(cfg.master_seed, cfg.sample_index,
                               SHADOW_STREAM)
        return protocol_shadow(cfg, rng, basis_rng)
    return _RUNNERS[cfg.protocol](cfg, rng)
