"""Colored-cluster simulation of the projective transverse-field Ising chain.

Under alternating projective X (site) and ZZ (bond) measurements the chain
state stays a tensor product of "Bell clusters" |m> + s|m-bar| (m-bar the
bitwise complement, s = +-1) and, for computational-basis initial states,
qubits with a definite Z value.  Tracking cluster membership (a color per
qubit), one representative bit configuration and the relative sign per
cluster reproduces measurement statistics and stabilizer entanglement
exactly, at near-linear cost in the number of measurements.

Qubit indexing convention: system qubits are 0 .. L-1; when an ancilla is
requested it sits at index L (the last qubit).  Bond j couples qubits
(j, j+1) for j in 0 .. L-2; the ancilla is never measured directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

BELL = 0  # cluster in a |m> + s|m-bar> superposition (size 1: X eigenstate)
ZDEF = 1  # every member qubit has a definite computational-basis value

UNKNOWN = 0  # placeholder sign when a hypothetical outcome was not supplied


class MeasurementContradiction(Exception):
    """A forced outcome disagrees with a deterministic measurement."""


@dataclass(frozen=True)
class InitialStateSpec:
    """Initial state of the chain.

    kind "ghz": |0...0> + parity |1...1| over all qubits (plus ancilla if
    requested), the single cluster being marked as designated.
    kind "classical": the computational-basis product state given by
    ``classical_bits`` (no ancilla allowed; the bit-retrieval protocol does
    not use one).
    """

    kind: str
    num_qubits: int
    with_ancilla: bool = False
    ghz_parity: int = +1
    classical_bits: tuple[int, ...] = ()

    def validate(self) -> None:
        if self.kind not in ("ghz", "classical"):
            raise ValueError(f"unknown initial state kind {self.kind!r}")
        if self.num_qubits < 2:
            raise ValueError("need at least two system qubits")
        if self.kind == "ghz":
            if self.ghz_parity not in (+1, -1):
                raise ValueError("ghz_parity must be +1 or -1")
            if self.classical_bits:
                raise ValueError("ghz initial state takes no classical bits")
        else:
            if self.with_ancilla:
                raise ValueError("classical initial state forbids an ancilla")
            if len(self.classical_bits) != self.num_qubits:
                raise ValueError("classical_bits length must equal num_qubits")
            if any(b not in (0, 1) for b in self.classical_bits):
                raise ValueError("classical_bits must be 0/1")

    @property
    def total_qubits(self) -> int:
        return self.num_qubits + (1 if self.with_ancilla else 0)


class ClusterState:
    """Mutable colored-cluster state.

    Per qubit: a color and a representative bit.  Per color: the kind
    (BELL/ZDEF), the member list, and for BELL clusters the relative sign
    (+1, -1, or UNKNOWN when evolved through outcome-free hypothetical
    measurements).
    """

    __slots__ = ("n", "num_system", "color", "bit", "members", "kind",
                 "sign", "tags", "designated", "_next_color", "ghz_parity")

    def __init__(self, spec: InitialStateSpec, track_tags: bool = False):
        spec.validate()
        n = spec.total_qubits
        self.n = n
        self.num_system = spec.num_qubits
        self.color = [0] * n
        self.members: dict[int, list[int]] = {}
        self.kind: dict[int, int] = {}
        self.sign: dict[int, int] = {}
        self.designated: int | None = None
        self.tags: dict[int, frozenset] | None = {} if track_tags else None
        self.ghz_parity = spec.ghz_parity if spec.kind == "ghz" else 0
        if spec.kind == "ghz":
            self.bit = [0] * n
            self.members[0] = list(range(n))
            self.kind[0] = BELL
            self.sign[0] = spec.ghz_parity
            self.designated = 0
            self._next_color = 1
        else:
            self.bit = list(spec.classical_bits)
            for q in range(n):
                self.color[q] = q
                self.members[q] = [q]
                self.kind[q] = ZDEF
                self.sign[q] = 0
            self._next_color = n
        if self.tags is not None:
            self.tags = {c: frozenset() for c in self.members}

    # -- helpers ---------------------------------------------------------

    def _fresh_color(self) -> int:
        c = self._next_color
        self._next_color += 1
        return c

    def cluster_size(self, q: int) -> int:
        return len(self.members[self.color[q]])

    def cluster_qubits(self, q: int) -> list[int]:
        return self.members[self.color[q]]

    def designated_members(self) -> list[int]:
        if self.designated is None or self.designated not in self.members:
            return []
        return self.members[self.designated]

    def designated_survives(self, system_only: bool = False) -> bool:
        mem = self.designated_members()
        if not mem:
            return False
        if system_only:
            return any(q < self.num_system for q in mem)
        return True

    def _detach(self, q: int) -> None:
        """Remove qubit q from its cluster's member list."""
        mem = self.members[self.color[q]]
        mem.remove(q)
        if not mem:
            c = self.color[q]
            del self.members[c], self.kind[c], self.sign[c]
            if self.tags is not None:
                del self.tags[c]

    def _relabel(self, src: int, dst: int, invert: bool) -> None:
        for q in self.members[src]:
            self.color[q] = dst
            if invert:
                self.bit[q] ^= 1
        self.members[dst].extend(self.members[src])
        del self.members[src], self.kind[src], self.sign[src]
        if self.tags is not None:
            del self.tags[src]

    # -- measurement predicates ------------------------------------------

    def e_deterministic(self, i: int) -> bool:
        c = self.color[i]
        return self.kind[c] == BELL and len(self.members[c]) == 1

    def s_deterministic(self, j: int) -> bool:
        ci, cj = self.color[j], self.color[j + 1]
        if ci == cj:
            return True
        return self.kind[ci] == ZDEF and self.kind[cj] == ZDEF

    # -- site (X) measurement --------------------------------------------

    def measure_e(self, i: int, rng=None, force: int | None = None,
                  tag=None) -> int:
        """Projectively measure X on qubit i; returns the +-1 outcome.

        Random outcomes draw one integer from ``rng``; ``force`` overrides
        the draw (only valid where the outcome is not deterministic).  When
        tag tracking is on, ``tag`` labels this event in the per-cluster
        sign expressions.
        """
        c = self.color[i]
        if self.kind[c] == BELL and len(self.members[c]) == 1:
            out = self.sign[c]
            if force is not None and out != 0 and force != out:
                raise MeasurementContradiction(
                    f"X on qubit {i} is deterministically {out:+d}")
            if out == 0 and force is not None:
                # state sign was unknown; the forced outcome pins it
                self.sign[c] = force
                out = force
            if self.tags is not None and tag is not None and out != 0:
                self.tags[c] = frozenset((tag,))
            return out
        out = force if force is not None else (1 if rng.integers(2) else -1)
        if self.kind[c] == BELL:
            old = self.sign[c]
            self._detach(i)
            rest = self.color[i]  # color id unchanged for the remainder
            self.sign[rest] = old * out if old != 0 and out != 0 else 0
            if self.tags is not None:
                self.tags[rest] = self.tags[rest] ^ frozenset((tag,))
        else:
            self._detach(i)
        nc = self._fresh_color()
        self.color[i] = nc
        self.members[nc] = [i]
        self.kind[nc] = BELL
        self.sign[nc] = out
        if self.tags is not None:
            self.tags[nc] = frozenset((tag,))
        return out

    def measure_e_unknown(self, i: int, tag=None) -> None:
        """Hypothetical X measurement with unrecorded outcome.

        On an X-eigenstate singleton this is a no-op (the outcome is
        deterministic, so the state is unchanged)."""
        c = self.color[i]
        if self.kind[c] == BELL and len(self.members[c]) == 1:
            return
        if self.kind[c] == BELL:
            self._detach(i)
            rest = self.color[i]
            self.sign[rest] = 0
            if self.tags is not None:
                self.tags[rest] = self.tags[rest] ^ frozenset((tag,))
        else:
            self._detach(i)
        nc = self._fresh_color()
        self.color[i] = nc
        self.members[nc] = [i]
        self.kind[nc] = BELL
        self.sign[nc] = 0
        if self.tags is not None:
            self.tags[nc] = frozenset((tag,))

    # -- bond (ZZ) measurement -------------------------------------------

    def measure_s(self, j: int, rng=None, force: int | None = None) -> int:
        """Projectively measure Z_j Z_{j+1}; returns the +-1 outcome."""
        a, b = j, j + 1
        ca, cb = self.color[a], self.color[b]
        if ca == cb or (self.kind[ca] == ZDEF and self.kind[cb] == ZDEF):
            out = -1 if (self.bit[a] ^ self.bit[b]) else 1
            if force is not None and force != out:
                raise MeasurementContradiction(
                    f"ZZ on bond {j} is deterministically {out:+d}")
            return out
        out = force if force is not None else (1 if rng.integers(2) else -1)
        self._merge_on_outcome(a, b, out)
        return out

    def measure_s_unknown(self, j: int) -> None:
        """Hypothetical ZZ measurement with unrecorded outcome.

        Only the cluster topology stays trustworthy afterwards: the merged
        sign and the relative bit alignment are marked unknown.
        """
        a, b = j, j + 1
        ca, cb = self.color[a], self.color[b]
        if ca == cb or (self.kind[ca] == ZDEF and self.kind[cb] == ZDEF):
            return
        matched = -1 if (self.bit[a] ^ self.bit[b]) else 1
        self._merge_on_outcome(a, b, matched)  # arbitrary branch
        self.sign[self.color[a]] = 0

    def _merge_on_outcome(self, a: int, b: int, out: int) -> None:
        ca, cb = self.color[a], self.color[b]
        ka, kb = self.kind[ca], self.kind[cb]
        mismatch = ((-1 if (self.bit[a] ^ self.bit[b]) else 1) != out)
        if ka == BELL and kb == BELL:
            # designated color always absorbs; otherwise smaller into larger
            if ca == self.designated:
                src, dst = cb, ca
            elif cb == self.designated:
                src, dst = ca, cb
            elif len(self.members[ca]) < len(self.members[cb]):
                src, dst = ca, cb
            else:
                src, dst = cb, ca
            sa, sb = self.sign[ca], self.sign[cb]
            merged = sa * sb if sa != 0 and sb != 0 else 0
            combined = (self.tags[ca] ^ self.tags[cb]
                        if self.tags is not None else None)
            self._relabel(src, dst, invert=mismatch)
            self.sign[dst] = merged
            if self.tags is not None:
                self.tags[dst] = combined
            return
        # one side has definite Z: the Bell side collapses to that basis
        bell = ca if ka == BELL else cb
        if mismatch:
            for q in self.members[bell]:
                self.bit[q] ^= 1
        for q in list(self.members[bell]):
            nc = self._fresh_color()
            self.color[q] = nc
            self.members[nc] = [q]
            self.kind[nc] = ZDEF
            self.sign[nc] = 0
            if self.tags is not None:
                self.tags[nc] = frozenset()
        del self.members[bell], self.kind[bell], self.sign[bell]
        if self.tags is not None:
            del self.tags[bell]

    # -- site (Z) readout ---------------------------------------------------

    def measure_z(self, q: int, rng=None, force: int | None = None) -> int:
        """Projectively measure Z on qubit q; returns the +-1 outcome.

        Deterministic on definite-Z qubits; on a Bell cluster the outcome is
        a fair coin and the whole cluster collapses to the matching branch.
        """
        c = self.color[q]
        if self.kind[c] == ZDEF:
            out = -1 if self.bit[q] else 1
            if force is not None and force != out:
                raise MeasurementContradiction(
                    f"Z on qubit {q} is deterministically {out:+d}")
            return out
        out = force if force is not None else (1 if rng.integers(2) else -1)
        if (-1 if self.bit[q] else 1) != out:
            for m in self.members[c]:
                self.bit[m] ^= 1
        for m in list(self.members[c]):
            nc = self._fresh_color()
            self.color[m] = nc
            self.members[nc] = [m]
            self.kind[nc] = ZDEF
            self.sign[nc] = 0
            if self.tags is not None:
                self.tags[nc] = frozenset()
        del self.members[c], self.kind[c], self.sign[c]
        if self.tags is not None:
            del self.tags[c]
        return out

    # -- queries -----------------------------------------------------------

    def entanglement_entropy(self, subsystem) -> int:
        """Entanglement entropy of ``subsystem`` in bits.

        Equals the number of Bell clusters of size >= 2 straddling the cut;
        definite-Z qubits and fully contained clusters contribute nothing.
        """
        sub = set(subsystem)
        if not sub or not all(0 <= q < self.n for q in sub):
            raise ValueError("subsystem must be a non-empty set of valid qubits")
        inside: dict[int, int] = {}
        for q in sub:
            c = self.color[q]
            inside[c] = inside.get(c, 0) + 1
        ent = 0
        for c, k in inside.items():
            if self.kind[c] == BELL and len(self.members[c]) >= 2 \
                    and k < len(self.members[c]):
                ent += 1
        return ent

    def survival_and_config(self) -> tuple[bool, list[int], int]:
        """(designated cluster alive?, tracked bits, its sign or 0)."""
        alive = self.designated is not None and self.designated in self.members
        sign = self.sign[self.designated] if alive else 0
        return alive, list(self.bit), sign

    def total_sign_parity(self) -> int:
        """Product of all cluster signs (0 if any is unknown)."""
        p = 1
        for c, k in self.kind.items():
            if k == BELL:
                s = self.sign[c]
                if s == 0:
                    return 0
                p *= s
        return p


def pair_density_matrix(state: ClusterState, qa: int, qb: int):
    """Exact 4x4 density matrix of qubits (qa, qb), qa as the first factor.

    Reduced states of Bell clusters are GHZ-like: superposition terms with
    support outside the pair kill the off-diagonals, so every case reduces
    to a short list of Pauli products.
    """
    import numpy as np

    eye = np.eye(2)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])

    def single(q):
        c = state.color[q]
        zval = -1 if state.bit[q] else 1
        if state.kind[c] == ZDEF:
            return (eye + zval * sz) / 2
        if len(state.members[c]) == 1:
            return (eye + state.sign[c] * sx) / 2
        return eye / 2

    ca, cb = state.color[qa], state.color[qb]
    if ca != cb:
        return np.kron(single(qa), single(qb))
    szz = -1 if (state.bit[qa] ^ state.bit[qb]) else 1
    rho = (np.kron(eye, eye) + szz * np.kron(sz, sz)) / 4
    if len(state.members[ca]) == 2:
        rho = rho + state.sign[ca] * (np.kron(sx, sx)
                                      + szz * np.kron(sx @ sz, sx @ sz)) / 4
    return rho
