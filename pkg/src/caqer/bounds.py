"""Dual feasible points and upper bounds on the achievable fidelity.

Any Hermitian ``Y`` on ``H_C*`` with ``Z = I (x) Y - C >= 0`` certifies
``fidelity <= tr Y`` for every CPTP recovery.  Partitions of the code space
are passed as lists of orthonormal basis matrices ``Q_q`` (``d_C x d_q``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .fidelity import DataMatrix, Ensemble, build_data_matrix
from .opalg import EigenSolverError, hermitize, min_eig

__all__ = [
    "DualPoint",
    "check_feasible",
    "as_partition",
    "gersgorin_dual",
    "svd_dual",
    "iterative_dual",
    "init_block_lambda_max",
    "init_block_sdp_duals",
    "iterated_block_dual",
    "pauli_certificate",
]

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8


@dataclass
class DualPoint:
    """A candidate dual variable and its certificate data."""

    Y: np.ndarray
    bound: float
    feasibility_margin: float
    provenance: str = ""
    iterations: int = 0
    tol: float = FEAS_TOL
    history: list = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> bool:
        return self.feasibility_margin >= -self.tol


def _slack(Y, C: DataMatrix) -> np.ndarray:
    return np.kron(np.eye(C.d_S), Y) - C.C


def check_feasible(Y, C: DataMatrix, tol: float = FEAS_TOL) -> float:
    """Feasibility margin ``lambda_min(I (x) Y - C)``; feasible iff ``>= -tol``."""
    Y = np.asarray(Y)
    if Y.shape != (C.d_C, C.d_C):
        raise ValueError(f"Y has shape {Y.shape}, expected {(C.d_C, C.d_C)}")
    return float(min_eig(_slack(Y, C), method="lapack"))


def _make_point(Y, C, provenance, iterations=0, history=None, tol=FEAS_TOL) -> DualPoint:
    Y = hermitize(Y, tol=1e-8)
    return DualPoint(Y, float(np.real(np.trace(Y))), check_feasible(Y, C), provenance,
                     iterations, tol, history or [])


def as_partition(parts, d_C: int, complete: bool = True, tol: float = 1e-8) -> list:
    """Normalize a partition given as projectors or bases to a list of bases.

    Raises ``ValueError`` unless the subspaces are mutually orthogonal and,
    when ``complete``, span the whole code space.
    """
    bases = []
    for P in parts:
        P = np.asarray(P, dtype=complex)
        if P.shape[0] != d_C:
            raise ValueError(f"partition element has {P.shape[0]} rows, expected {d_C}")
        if P.shape == (d_C, d_C) and np.max(np.abs(P @ P - P)) < tol \
                and np.max(np.abs(P - P.conj().T)) < tol:
            w, V = np.linalg.eigh(hermitize(P, tol=tol))
            P = V[:, w > 0.5]
        bases.append(P)
    B = np.concatenate(bases, axis=1) if bases else np.zeros((d_C, 0))
    G = B.conj().T @ B
    if np.max(np.abs(G - np.eye(G.shape[0])), initial=0) > tol:
        raise ValueError("partition subspaces are not orthonormal and mutually orthogonal")
    if complete and B.shape[1] != d_C:
        raise ValueError(f"partition spans {B.shape[1]} of {d_C} dimensions")
    return bases


def _block_rows(C: DataMatrix, bases):
    """``C`` in the subspace-ordered basis, with the row indices of each block."""
    B = np.concatenate(bases, axis=1)
    V = np.kron(np.eye(C.d_S), B.conj())
    Cb = V.conj().T @ C.C @ V
    # row (s, j) sits at s * d_C + j
    offsets = np.cumsum([0] + [b.shape[1] for b in bases])
    rows = []
    for q in range(len(bases)):
        cols = np.arange(offsets[q], offsets[q + 1])
        rows.append((np.arange(C.d_S)[:, None] * C.d_C + cols[None, :]).reshape(-1))
    return Cb, rows


def _weighted_dual(bases, weights) -> np.ndarray:
    return sum(w * (Q.conj() @ Q.T) for Q, w in zip(bases, weights))


def gersgorin_dual(C: DataMatrix, partition) -> DualPoint:
    """``Y = sum_q w_q conj(P_q)`` with ``w_q`` the largest absolute row sum of block ``q``.

    Feasible by the Gersgorin disc theorem.
    """
    bases = as_partition(partition, C.d_C)
    Cb, rows = _block_rows(C, bases)
    sums = np.sum(np.abs(Cb), axis=1)
    w = [float(np.max(sums[r])) for r in rows]
    return _make_point(_weighted_dual(bases, w), C, "gersgorin")


def svd_dual(C: DataMatrix, partition) -> DualPoint:
    """``w_q = sigma_max((I (x) conj P_q) C)``; feasibility is not guaranteed."""
    bases = as_partition(partition, C.d_C)
    Cb, rows = _block_rows(C, bases)
    w = [float(np.linalg.norm(Cb[r], 2)) for r in rows]
    return _make_point(_weighted_dual(bases, w), C, "svd")


def init_block_lambda_max(C: DataMatrix, partition) -> np.ndarray:
    """``Y0 = sum_q lambda_max(C_qq) conj(P_q)``."""
    bases = as_partition(partition, C.d_C)
    Cb, rows = _block_rows(C, bases)
    w = [float(np.linalg.eigvalsh(Cb[np.ix_(r, r)])[-1]) for r in rows]
    return _weighted_dual(bases, w)


def init_block_sdp_duals(blocks, d_C: int, C: DataMatrix | None = None) -> np.ndarray:
    """Block-diagonal ``Y0`` assembled from per-subspace optimal duals.

    ``blocks`` holds ``(Q_q, Y_q)`` pairs with ``Y_q`` on the compressed space
    ``S_q*``.  A ``Y_q`` of ``None`` is filled with ``lambda_max(C_qq) I``,
    which needs ``C``.
    """
    bases = as_partition([Q for Q, _ in blocks], d_C)
    Y = np.zeros((d_C, d_C), dtype=complex)
    for Q, (_, Yq) in zip(bases, blocks):
        if Yq is None:
            if C is None:
                raise ValueError("a block without a dual needs the data matrix")
            Yq = float(np.linalg.eigvalsh(C.restrict(Q).C)[-1]) * np.eye(Q.shape[1])
        Yq = np.asarray(Yq)
        if Yq.shape != (Q.shape[1], Q.shape[1]):
            raise ValueError("block dual does not match its subspace dimension")
        Y += Q.conj() @ Yq @ Q.T
    return Y


def iterative_dual(C: DataMatrix, Y0, tol: float = FEAS_TOL, max_updates: int | None = None,
                   provenance: str = "iterative", check_floor: bool = True) -> DualPoint:
    """Repair ``Y0`` into a feasible point by rank-one updates.

    While ``Z = I (x) Y - C`` has an eigenvalue ``x < -tol``, reshape the
    eigenvector to a ``d_S x d_C`` operator with largest singular triple
    ``(lambda_1, u, v)`` and add ``|x| / lambda_1**2`` times the rank-one
    operator of ``v`` on ``H_C*``.

    Parameters
    ----------
    C : DataMatrix
    Y0 : ndarray
        Hermitian start point on ``H_C*``.
    tol : float
        Stop once ``lambda_min(Z) >= -tol``.
    max_updates : int, optional
        Update cap, ``20 * d_S * d_C`` by default.

    Returns
    -------
    DualPoint
        ``history`` records ``(tr Y, lambda_min)`` before every update.
    """
    d_S, d_C = C.d_S, C.d_C
    Y = hermitize(np.array(Y0, dtype=complex), tol=1e-8)
    if Y.shape != (d_C, d_C):
        raise ValueError(f"Y0 has shape {Y.shape}, expected {(d_C, d_C)}")
    if max_updates is None:
        max_updates = 20 * d_S * d_C
    history = []
    updates = 0
    while True:
        Z = _slack(Y, C)
        try:
            w, V = scipy.linalg.eigh(Z, subset_by_index=[0, 0])
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(f"eigensolver failed: {exc}") from exc
        x, vec = float(w[0]), V[:, 0]
        history.append((float(np.real(np.trace(Y))), x))
        if x >= -tol or updates >= max_updates:
            break
        X = vec.reshape(d_S, d_C)
        _, s, Vh = np.linalg.svd(X, full_matrices=False)
        lam1 = float(s[0])
        if check_floor and lam1 ** 2 < 1.0 / d_S - 1e-12:
            raise AssertionError(f"Schmidt floor violated: {lam1 ** 2} < 1/{d_S}")
        v = Vh[0].conj()
        # (I (x) Y)|X>> = |X Y^T>>, so Y^T += c v v^dagger gives <<X|..|X>> += c lam1^2
        Y = Y + (abs(x) / lam1 ** 2) * np.outer(v.conj(), v)
        updates += 1
    if updates >= max_updates and history[-1][1] < -tol:
        log.warning("iterative_dual hit the update cap (%d) with margin %.3e", max_updates,
                    history[-1][1])
    return DualPoint(Y, float(np.real(np.trace(Y))), history[-1][1], provenance, updates, tol,
                     history)


def _merge(C: DataMatrix, a, b, tol):
    Qa, Ya = a
    Qb, Yb = b
    Q = np.concatenate([Qa, Qb], axis=1)
    Y0 = scipy.linalg.block_diag(Ya, Yb)
    pt = iterative_dual(C.restrict(Q), Y0, tol=tol, provenance="merge")
    return Q, pt.Y, pt.iterations


def iterated_block_dual(C: DataMatrix, blocks, tol: float = FEAS_TOL) -> DualPoint:
    """Merge per-subspace duals pairwise, repairing each union with :func:`iterative_dual`.

    ``blocks`` holds ``(Q_q, Y_q)`` pairs as in :func:`init_block_sdp_duals`.
    Each round sorts blocks by dimension and pairs neighbours
    smallest-with-smallest; a final pass runs on the full space.
    """
    bases = as_partition([Q for Q, _ in blocks], C.d_C)
    work = []
    for Q, (_, Yq) in zip(bases, blocks):
        if Yq is None:
            Yq = float(np.linalg.eigvalsh(C.restrict(Q).C)[-1]) * np.eye(Q.shape[1])
        work.append((Q, hermitize(np.asarray(Yq, dtype=complex), tol=1e-8)))
    total_updates = 0
    while len(work) > 1:
        work.sort(key=lambda item: item[0].shape[1])
        merged = []
        for i in range(0, len(work) - 1, 2):
            Q, Y, it = _merge(C, work[i], work[i + 1], tol)
            total_updates += it
            merged.append((Q, Y))
        if len(work) % 2:
            merged.append(work[-1])
        work = merged
    Q, Yc = work[0]
    Y0 = Q.conj() @ Yc @ Q.T
    pt = iterative_dual(C, Y0, tol=tol, provenance="iterated_block")
    pt.iterations += total_updates
    return pt


def pauli_certificate(code, spec, C: DataMatrix | None = None):
    """Optimal recovery and matching dual point for a Pauli channel.

    Returns
    -------
    (StructuredRecovery, DualPoint, float)
        The maximum-likelihood normalizer recovery, the dual point
        ``Y = sum_q |a~_q|^2 conj(P_q) / d_S`` and the table value
        ``sum_q max_p |a_pq|^2``.
    """
    from .channels import PauliChannelSpec, compose_encoding, pauli_channel
    from .codes import pauli_error_coefficients, syndrome_decomposition
    from .recovery import StructuredRecovery

    if not isinstance(spec, PauliChannelSpec):
        raise TypeError("pauli_certificate needs a PauliChannelSpec")
    dec = syndrome_decomposition(code)
    table = pauli_error_coefficients(code, spec, dec)
    U = code.U_C
    d_S, d_C = code.d_S, code.d_C
    elements, supports = [], []
    for q, p in enumerate(table.best_normalizers):
        B = dec.normalizer_matrix(int(p)) @ dec.basis(q)  # orthonormal basis of S_q
        elements.append(B.conj().T)
        supports.append(B)
    weights = table.best_weights
    rec = StructuredRecovery(elements, [float(w) for w in weights], d_S, d_C, "pauli_ml",
                             supports)
    rec.check_invariants()
    if C is None:
        C = build_data_matrix(Ensemble.maximally_mixed(d_S),
                              compose_encoding(pauli_channel(spec), U))
    Y = sum(w * dec.projector(q).conj() for q, w in enumerate(weights)) / d_S
    point = _make_point(Y, C, "pauli_cert")
    return rec, point, table.optimal_fidelity()
