"""Small exact stabilizer-tableau simulator, used as a ground-truth oracle.

Standard binary symplectic tableau with destabilizer rows (Aaronson/Gottesman
style), capped at 32 qubits: every operation here is meant to be obviously
correct rather than fast.  Provides projective Pauli measurements with
optional forced outcomes, exact stabilizer entanglement entropies, and exact
reduced density matrices for one- and two-qubit subsystems.
"""

from __future__ import annotations

import numpy as np

from .cluster import InitialStateSpec, MeasurementContradiction

MAX_QUBITS = 32

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. "XZ" -> X (x) Z."""
    m = _PAULI[label[0]]
    for ch in label[1:]:
        m = np.kron(m, _PAULI[ch])
    return m


class Pauli:
    """A signed Pauli operator in binary symplectic form."""

    def __init__(self, n: int, xs=(), zs=(), sign: int = +1):
        self.x = np.zeros(n, dtype=np.uint8)
        self.z = np.zeros(n, dtype=np.uint8)
        for i in xs:
            self.x[i] ^= 1
        for i in zs:
            self.z[i] ^= 1
        self.sign = sign

    @classmethod
    def x_on(cls, n: int, i: int, sign: int = +1) -> "Pauli":
        return cls(n, xs=[i], sign=sign)

    @classmethod
    def zz_on(cls, n: int, i: int, j: int, sign: int = +1) -> "Pauli":
        return cls(n, zs=[i, j], sign=sign)


def _phase_exponent(x1, z1, x2, z2) -> int:
    """Phase i^k picked up when multiplying rows: (x1,z1) * (x2,z2)."""
    # per-qubit contribution of the standard g function
    k = 0
    for a, b, c, d in zip(x1, z1, x2, z2):
        if a == 0 and b == 0:
            continue
        if a == 1 and b == 1:  # Y
            k += int(c) - int(d)
        elif a == 1:           # X
            k += int(d) * (2 * int(c) - 1)
        else:                  # Z
            k += int(c) * (1 - 2 * int(d))
    return k % 4


class Tableau:
    """Stabilizer state on n qubits (destabilizers in rows 0..n-1)."""

    def __init__(self, n: int):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"qubit count {n} outside 1..{MAX_QUBITS}")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)  # phase exponent mod 4

    # -- construction ------------------------------------------------------

    @classmethod
    def from_spec(cls, spec: InitialStateSpec) -> "Tableau":
        spec.validate()
        n = spec.total_qubits
        t = cls(n)
        if spec.kind == "classical":
            for i in range(n):
                t.z[n + i, i] = 1
                t.r[n + i] = 2 if spec.classical_bits[i] else 0
                t.x[i, i] = 1
        else:
            # chain of ZZ stabilizers (the ancilla, at index n-1, is just
            # the last link) plus the global X parity
            for i in range(n - 1):
                t.z[n + i, i] = 1
                t.z[n + i, i + 1] = 1
                t.x[i, i + 1:] = 1  # destabilizer X_{i+1}..X_{n-1}
            t.x[2 * n - 1, :] = 1
            t.r[2 * n - 1] = 0 if spec.ghz_parity == 1 else 2
            t.z[n - 1, 0] = 1  # destabilizer Z_0 for the parity row
        return t

    # -- internals -----------------------------------------------------------

    def _row_mult(self, h: int, k: int) -> None:
        """row[h] <- row[k] * row[h]."""
        self.r[h] = (self.r[h] + self.r[k]
                     + _phase_exponent(self.x[k], self.z[k],
                                       self.x[h], self.z[h])) % 4
        self.x[h] ^= self.x[k]
        self.z[h] ^= self.z[k]

    def _anticommutes(self, row: int, p: Pauli) -> bool:
        sym = (self.x[row] & p.z).sum() + (self.z[row] & p.x).sum()
        return bool(sym % 2)

    # -- measurement ---------------------------------------------------------

    def is_deterministic(self, p: Pauli) -> bool:
        n = self.n
        return not any(self._anticommutes(n + k, p) for k in range(n))

    def measure(self, p: Pauli, rng=None, force: int | None = None) -> int:
        """Projectively measure the signed Pauli p; returns the +-1 outcome."""
        n = self.n
        anti = [k for k in range(n) if self._anticommutes(n + k, p)]
        if not anti:
            # deterministic: express p as a product of stabilizer rows,
            # selected by which destabilizers anticommute with p
            acc_x = np.zeros(n, dtype=np.uint8)
            acc_z = np.zeros(n, dtype=np.uint8)
            phase = 0
            for k in range(n):
                if self._anticommutes(k, p):
                    phase = (phase + self.r[n + k]
                             + _phase_exponent(acc_x, acc_z,
                                               self.x[n + k], self.z[n + k])) % 4
                    acc_x ^= self.x[n + k]
                    acc_z ^= self.z[n + k]
            assert np.array_equal(acc_x, p.x) and np.array_equal(acc_z, p.z)
            value = 1 if phase == 0 else -1
            out = value * p.sign
            if force is not None and force != out:
                raise MeasurementContradiction(
                    f"measurement deterministically {out:+d}")
            return out
        out = force if force is not None else (1 if rng.integers(2) else -1)
        q = anti[0]
        for h in range(2 * n):
            if h != n + q and self._anticommutes(h, p):
                self._row_mult(h, n + q)
        # old stabilizer row becomes the destabilizer of the new one
        self.x[q] = self.x[n + q].copy()
        self.z[q] = self.z[n + q].copy()
        self.r[q] = self.r[n + q]
        self.x[n + q] = p.x.copy()
        self.z[n + q] = p.z.copy()
        want = out * p.sign  # overall sign of the new stabilizer row
        self.r[n + q] = 0 if want == 1 else 2
        return out

    def measure_x(self, i: int, rng=None, force=None) -> int:
        return self.measure(Pauli.x_on(self.n, i), rng=rng, force=force)

    def measure_zz(self, j: int, rng=None, force=None) -> int:
        return self.measure(Pauli.zz_on(self.n, j, j + 1), rng=rng, force=force)

    # -- entropy and reduced states -------------------------------------------

    def entanglement_entropy(self, subsystem) -> int:
        """Exact entropy (bits): |A| - dim of the stabilizer subgroup on A."""
        sub = sorted(set(subsystem))
        if not sub or not all(0 <= q < self.n for q in sub):
            raise ValueError("invalid subsystem")
        comp = [q for q in range(self.n) if q not in sub]
        n = self.n
        m = np.concatenate([self.x[n:, comp], self.z[n:, comp]], axis=1)
        s_a = n - _gf2_rank(m)
        return len(sub) - s_a

    def reduced_density_matrix(self, subsystem) -> np.ndarray:
        """Exact reduced density matrix for a 1- or 2-qubit subsystem."""
        sub = sorted(set(subsystem))
        if len(sub) not in (1, 2):
            raise ValueError("subsystem must have one or two qubits")
        n = self.n
        comp = [q for q in range(n) if q not in sub]
        outside = np.concatenate([self.x[n:, comp], self.z[n:, comp]], axis=1)
        basis = _gf2_nullspace(outside.T)  # combos acting trivially outside
        d = 2 ** len(sub)
        rho = np.zeros((d, d), dtype=complex)
        for mask in range(2 ** len(basis)):
            acc_x = np.zeros(n, dtype=np.uint8)
            acc_z = np.zeros(n, dtype=np.uint8)
            phase = 0
            for b, vec in enumerate(basis):
                if not (mask >> b) & 1:
                    continue
                for row in vec.nonzero()[0]:
                    phase = (phase + self.r[n + row]
                             + _phase_exponent(acc_x, acc_z,
                                               self.x[n + row], self.z[n + row])) % 4
                    acc_x ^= self.x[n + row]
                    acc_z ^= self.z[n + row]
            label = ""
            for q in sub:
                xz = (acc_x[q], acc_z[q])
                label += {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[xz]
            factor = (1j) ** phase
            rho += factor * pauli_matrix(label)
        rho /= d
        return rho


def _gf2_rank(m: np.ndarray) -> int:
    m = m.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = None
        for rr in range(rank, rows):
            if m[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for rr in range(rows):
            if rr != rank and m[rr, c]:
                m[rr] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_nullspace(m: np.ndarray) -> list[np.ndarray]:
    """Basis of {v : m @ v = 0 over GF(2)} for m of shape (rows, cols)."""
    m = m.copy() % 2
    rows, cols = m.shape
    pivots = {}
    rank = 0
    for c in range(cols):
        pivot = None
        for rr in range(rank, rows):
            if m[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for rr in range(rows):
            if rr != rank and m[rr, c]:
                m[rr] ^= m[rank]
        pivots[c] = rank
        rank += 1
        if rank == rows:
            break
    basis = []
    free = [c for c in range(cols) if c not in pivots]
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for c, rr in pivots.items():
            if m[rr, f]:
                v[c] = 1
        basis.append(v)
    return basis
