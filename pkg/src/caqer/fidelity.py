"""Choi matrices, the fidelity data matrix, and average entanglement fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opalg import dket, hermitize, ptrace_left, ptrace_right

__all__ = [
    "NumericalIntegrityError",
    "Ensemble",
    "DataMatrix",
    "choi",
    "choi_apply",
    "build_data_matrix",
    "avg_ent_fidelity",
    "entanglement_fidelity_kraus",
]

FIDELITY_SLACK = 1e-9


class NumericalIntegrityError(ArithmeticError):
    """A quantity left its mathematically allowed range beyond roundoff."""


@dataclass(frozen=True)
class Ensemble:
    """States ``rho_i`` with prior probabilities ``p_i``."""

    states: tuple
    probabilities: tuple

    def __post_init__(self):
        states = tuple(np.asarray(r, dtype=complex) for r in self.states)
        probs = tuple(float(p) for p in self.probabilities)
        if len(states) != len(probs) or not states:
            raise ValueError("need one probability per state")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        d = states[0].shape[0]
        for r in states:
            if r.shape != (d, d):
                raise ValueError("all states must share one dimension")
            if np.max(np.abs(r - r.conj().T)) > 1e-12:
                raise ValueError("state is not Hermitian")
            if abs(np.trace(r) - 1) > 1e-12:
                raise ValueError("state does not have unit trace")
            if np.linalg.eigvalsh(r)[0] < -1e-12:
                raise ValueError("state is not positive semidefinite")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def maximally_mixed(cls, d: int) -> "Ensemble":
        return cls((np.eye(d) / d,), (1.0,))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def purity(self) -> float:
        return float(sum(p * np.real(np.trace(r @ r)) for r, p in zip(self.states, self.probabilities)))


@dataclass(frozen=True)
class DataMatrix:
    """Hermitian PSD ``C`` on ``H_S (x) H_C*`` with ``fidelity = tr(X_R C)``."""

    C: np.ndarray
    d_S: int
    d_C: int

    def __post_init__(self):
        C = np.asarray(self.C, dtype=complex)
        n = self.d_S * self.d_C
        if C.shape != (n, n):
            raise ValueError(f"data matrix shape {C.shape} does not match d_S*d_C = {n}")
        C = hermitize(C, tol=1e-12)
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def shape(self):
        return self.C.shape

    def scaled(self, s: float) -> "DataMatrix":
        return DataMatrix(s * self.C, self.d_S, self.d_C)

    def restrict(self, Q) -> "DataMatrix":
        """Compress onto ``H_S (x) S*`` for the subspace with orthonormal basis ``Q``.

        A double-ket ``|X'>>`` in the compressed space corresponds to the
        operator ``X' Q^dagger`` on the full code space.
        """
        Q = np.asarray(Q)
        d_S, d_C, r = self.d_S, self.d_C, Q.shape[1]
        if Q.shape[0] != d_C:
            raise ValueError(f"basis has {Q.shape[0]} rows, expected {d_C}")
        # sum_ab Q[a, i] C[s, a, t, b] conj(Q)[b, j], without forming I (x) conj(Q)
        T = np.tensordot(self.C.reshape(d_S, d_C, d_S, d_C), Q.conj(), axes=([3], [0]))
        T = np.tensordot(Q, T, axes=([0], [1])).transpose(1, 0, 2, 3).reshape(d_S * r, d_S * r)
        return DataMatrix._trusted((T + T.conj().T) / 2, d_S, r)

    @classmethod
    def _trusted(cls, C, d_S: int, d_C: int) -> "DataMatrix":
        """Wrap an already-Hermitian matrix without re-checking it."""
        obj = object.__new__(cls)
        C = np.ascontiguousarray(C, dtype=complex)
        C.setflags(write=False)
        object.__setattr__(obj, "C", C)
        object.__setattr__(obj, "d_S", d_S)
        object.__setattr__(obj, "d_C", d_C)
        return obj

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.C)[0])


def embedding(Q, d_S: int) -> np.ndarray:
    """``I (x) conj(Q)``: maps ``|X'>>`` on ``H_S (x) S*`` to ``|X' Q^dagger>>``."""
    return np.kron(np.eye(d_S), np.asarray(Q).conj())


def choi(ch) -> np.ndarray:
    """``X_A = sum_k |A_k>><<A_k|``."""
    vecs = np.stack([dket(A) for A in ch.elements], axis=1)
    return vecs @ vecs.conj().T


def choi_apply(X, rho, dims) -> np.ndarray:
    """Channel output ``tr_{H*} (I (x) conj(rho)) X``; ``dims = (d_out, d_in)``."""
    d_out, d_in = dims
    M = np.kron(np.eye(d_out), np.asarray(rho).conj()) @ X
    return ptrace_right(M, dims)


def build_data_matrix(ens: Ensemble, encoded) -> DataMatrix:
    """``C = sum_ik p_i |rho_i E_k^dagger>><<rho_i E_k^dagger|``.

    ``encoded`` is the channel including the encoding (source -> code).
    """
    elements = encoded.elements
    d_C, d_S = elements[0].shape
    if ens.dim != d_S:
        raise ValueError(f"ensemble dimension {ens.dim} does not match source dim {d_S}")
    cols = []
    for rho, p in zip(ens.states, ens.probabilities):
        if p == 0:
            continue
        s = np.sqrt(p)
        for E in elements:
            cols.append(s * dket(rho @ E.conj().T))
    F = np.stack(cols, axis=1)
    C = DataMatrix(F @ F.conj().T, d_S, d_C)
    expected = ens.purity()
    tr = float(np.real(np.trace(C.C)))
    if abs(tr - expected) > 1e-10 * max(1.0, expected):
        raise NumericalIntegrityError(f"trace(C) = {tr} but ensemble purity is {expected}")
    return C


def _check_range(value: float) -> float:
    if value < -FIDELITY_SLACK or value > 1 + FIDELITY_SLACK:
        raise NumericalIntegrityError(f"fidelity {value!r} outside [0, 1]")
    return value


def avg_ent_fidelity(rec, C: DataMatrix) -> float:
    """``tr(X_R C)`` for a recovery given as a Choi matrix or as a recovery object.

    Structured recoveries are evaluated element-wise as
    ``sum_k <<R_k| C |R_k>>``.
    """
    if hasattr(rec, "fidelity_on"):
        return _check_range(rec.fidelity_on(C))
    X = np.asarray(rec)
    if X.shape != C.shape:
        raise ValueError(f"Choi matrix shape {X.shape} does not match data matrix {C.shape}")
    return _check_range(float(np.real(np.vdot(X.conj().T, C.C))))


def recovery_choi(elements) -> np.ndarray:
    vecs = np.stack([dket(R) for R in elements], axis=1)
    return vecs @ vecs.conj().T


def partial_trace_constraint(X, d_S: int, d_C: int) -> np.ndarray:
    """``tr_{H_S} X``; equals the identity on ``H_C*`` for a CPTP recovery."""
    return ptrace_left(X, (d_S, d_C))


def entanglement_fidelity_kraus(ens: Ensemble, elements) -> float:
    """Direct ``sum_ik p_i |tr(rho_i A_k)|^2`` for a channel on the source."""
    total = 0.0
    for rho, p in zip(ens.states, ens.probabilities):
        for A in elements:
            total += p * abs(np.trace(rho @ A)) ** 2
    return float(total)
