"""Classical shadows of the final pair and entropy bound curves.

A single random-Pauli measurement (basis O, outcome o) yields the shadow
rho_S = (3/2)(I + o O) - I, an unbiased but non-positive estimator of the
measured state.  Combined with a predicted state rho_C, regularized by a
depolarizing channel of strength epsilon, the per-sample quantity
-Tr[rho_S log2 rho_C(eps)] averages to an upper bound on the ancilla
entanglement entropy; the difference of the one- and two-qubit versions
averages to a lower bound.  Optimizing the sample means over an epsilon
grid gives the reported envelope curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def make_shadow(basis: str, outcome: int) -> np.ndarray:
    """Single-qubit shadow (3/2)(I + o O) - I of one Pauli measurement."""
    if basis not in _PAULI:
        raise ValueError(f"unknown Pauli basis {basis!r}")
    if outcome not in (1, -1):
        raise ValueError("outcome must be +1 or -1")
    return np.eye(2, dtype=complex) / 2 + 1.5 * outcome * _PAULI[basis]


def make_pair_shadow(basis_a: str, out_a: int,
                     basis_b: str, out_b: int) -> np.ndarray:
    """Two-qubit shadow: tensor product of the single-qubit shadows."""
    return np.kron(make_shadow(basis_a, out_a), make_shadow(basis_b, out_b))


def regularize(rho: np.ndarray, eps: float) -> np.ndarray:
    """Depolarize: (1-eps) rho + eps I/d, full rank for eps in (0, 1]."""
    if not 0 < eps <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    d = rho.shape[0]
    return (1 - eps) * rho + eps * np.eye(d) / d


def shadow_entropy(rho_s: np.ndarray, rho_c_reg: np.ndarray) -> float:
    """-Tr[rho_S log2 rho_C] for a full-rank regularized prediction."""
    vals, vecs = np.linalg.eigh(rho_c_reg)
    if vals.min() <= 0:
        raise ValueError("prediction must be regularized to full rank")
    log_rho = (vecs * np.log2(vals)) @ vecs.conj().T
    return float(np.real(-np.trace(rho_s @ log_rho)))


def _entropy_from_eigensystem(rho_s, vals, vecs, eps) -> float:
    """Same as shadow_entropy, with the prediction given as (vals, vecs).

    The regularized eigenvalues are (1-eps) vals + eps/d in the fixed
    eigenbasis, so no numerical diagonalization is needed.
    """
    d = vecs.shape[0]
    reg = (1 - eps) * vals + eps / d
    weights = np.real(np.einsum("ij,jk,ki->i", vecs.conj().T, rho_s, vecs))
    return float(-np.dot(np.log2(reg), weights))


@dataclass(frozen=True)
class EpsilonGrid:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or any(not 0 < v <= 1 for v in vals):
            raise ValueError("epsilon values must lie in (0, 1]")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        if vals[-1] != 1.0:
            raise ValueError("epsilon grid must include 1.0")
        object.__setattr__(self, "values", vals)

    @classmethod
    def default(cls) -> "EpsilonGrid":
        vals = np.geomspace(1e-3, 1.0, 13)
        vals[-1] = 1.0
        return cls(tuple(vals))


@dataclass(frozen=True)
class BoundCurves:
    """Sample-averaged entropy bounds over an epsilon grid.

    upper_mean[k]/upper_se[k]: mean and standard error of the ancilla
    shadow entropy at epsilon k; lower_*: of the ancilla-minus-pair
    difference.  The envelopes optimize the means over the grid.
    """

    epsilons: tuple
    upper_mean: tuple
    upper_se: tuple
    lower_mean: tuple
    lower_se: tuple
    n_samples: int

    @property
    def upper_envelope(self) -> tuple:
        """(value, standard error, epsilon) of the best upper bound."""
        k = int(np.argmin(self.upper_mean))
        return self.upper_mean[k], self.upper_se[k], self.epsilons[k]

    @property
    def lower_envelope(self) -> tuple:
        """(value, standard error, epsilon) of the best lower bound."""
        k = int(np.argmax(self.lower_mean))
        return self.lower_mean[k], self.lower_se[k], self.epsilons[k]


def bound_curves(samples, grid: EpsilonGrid) -> BoundCurves:
    """Aggregate shadow-entropy bounds for (sample, prediction) pairs.

    Each sample carries one random-Pauli snapshot (basis_a/out_a on the
    ancilla, basis_l/out_l on the last system qubit); each prediction
    supplies the pair and ancilla-marginal eigensystems.  The same shadow
    is reused across all epsilon values.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    eps = np.asarray(grid.values)
    n = len(samples)
    up = np.zeros((len(eps), n))
    lo = np.zeros((len(eps), n))
    for s_idx, (sample, pred) in enumerate(samples):
        shadow_a = make_shadow(sample.basis_a, sample.out_a)
        shadow_al = np.kron(shadow_a, make_shadow(sample.basis_l,
                                                  sample.out_l))
        vals_a, vecs_a = pred.ancilla_eigensystem()
        vals_al, vecs_al = pred.pair_eigensystem()
        for k, e in enumerate(eps):
            s_a = _entropy_from_eigensystem(shadow_a, vals_a, vecs_a, e)
            s_al = _entropy_from_eigensystem(shadow_al, vals_al, vecs_al, e)
            up[k, s_idx] = s_a
            lo[k, s_idx] = s_a - s_al
    def stats(m):
        mean = m.mean(axis=1)
        se = m.std(axis=1, ddof=1) / math.sqrt(n) if n > 1 \
            else np.zeros(len(eps))
        return tuple(mean), tuple(se)
    um, use = stats(up)
    lm, lse = stats(lo)
    return BoundCurves(tuple(eps), um, use, lm, lse, n)
