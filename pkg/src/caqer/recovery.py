"""Structured recovery algorithms: EigQER, BlockEigQER, OrderQER, standard QEC.

All algorithms work on a :class:`~caqer.fidelity.DataMatrix`.  The part of the
code space not yet claimed by a recovery element is tracked as an orthonormal
basis ``Q`` together with the compressed data matrix ``C.restrict(Q)``, so
"projecting out" a subspace shrinks the eigenproblems as the run proceeds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
import scipy.linalg

from .channels import TensorPowerChannel
from .fidelity import DataMatrix
from .opalg import dket, orthonormal_complement, top_eigs
from .pauli import Pauli
from .sdp import BlockSolution, solve_block_sdp, solve_qer_sdp, QerSdpProblem

__all__ = [
    "StructuredRecovery",
    "BlockRecovery",
    "eig_qer",
    "block_eig_qer",
    "order_qer",
    "standard_qec_recovery",
    "optimal_recovery",
    "order_subspaces",
]

log = logging.getLogger(__name__)

INVARIANT_TOL = 1e-10
RANK_SV_THRESHOLD = 0.05
EARLY_STOP_CONTRIBUTION = 1e-5
# dominant eigenvalues below this (relative to lambda_max(C)) count as zero
ZERO_EIG_RTOL = 1e-13
DROP_TOL = 1e-10
# per-block SDP gap target; many blocks are summed, so tighter than the global default
BLOCK_SDP_TOL = 1e-10


def _support(R):
    """Orthonormal basis of the support ``range(R^dagger)`` of a partial isometry."""
    _, s, Vh = np.linalg.svd(R, full_matrices=False)
    return Vh[s > 0.5].conj().T


@dataclass
class StructuredRecovery:
    """Recovery ``{R_k}`` whose elements are partial isometries with orthogonal supports.

    Attributes
    ----------
    elements : list of ndarray
        ``R_k`` of shape ``(d_S, d_C)``, in the order they were produced.
    contributions : list of float
        ``f_k = <<R_k| C |R_k>>`` against the data matrix used to build them.
    name : str
        Tag for reports.
    domain : ndarray, optional
        Orthonormal basis of the subspace the recovery is meant to cover
        (default: all of ``H_C``); completeness is judged against it.
    """

    elements: list
    contributions: list
    d_S: int
    d_C: int
    name: str = ""
    supports: list = field(default=None, repr=False)
    domain: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.supports is None:
            self.supports = [_support(R) for R in self.elements]

    def __len__(self):
        return len(self.elements)

    @property
    def projectors(self) -> list:
        return [V @ V.conj().T for V in self.supports]

    @property
    def ranks(self) -> list:
        return [V.shape[1] for V in self.supports]

    def support_union(self) -> np.ndarray:
        if not self.supports:
            return np.zeros((self.d_C, 0), dtype=complex)
        return np.concatenate(self.supports, axis=1)

    @property
    def domain_dim(self) -> int:
        return self.d_C if self.domain is None else self.domain.shape[1]

    def deficit_basis(self) -> np.ndarray:
        """Orthonormal basis of the part of the domain no element covers."""
        B = self.support_union()
        if self.domain is None:
            return orthonormal_complement(B, self.d_C)
        D = self.domain
        return D @ orthonormal_complement(D.conj().T @ B, D.shape[1])

    def deficit(self) -> np.ndarray:
        """``P_domain - sum_k P_k`` (PSD; zero when the recovery is complete)."""
        D = self.deficit_basis()
        return D @ D.conj().T

    @property
    def is_complete(self) -> bool:
        return sum(self.ranks) == self.domain_dim

    def partition(self) -> list:
        """Orthonormal bases of the subspaces ``S_k``; a deficit joins as one block."""
        parts = list(self.supports)
        if not self.is_complete:
            parts.append(self.deficit_basis())
        return parts

    def truncated(self, count: int) -> "StructuredRecovery":
        return StructuredRecovery(self.elements[:count], self.contributions[:count],
                                  self.d_S, self.d_C, self.name, self.supports[:count],
                                  self.domain)

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.contributions)

    def check_invariants(self, tol: float = INVARIANT_TOL):
        """Assert ``R_k^dagger R_k = P_k``, ``R_k R_k^dagger`` a projector, ``P_j P_k = 0``."""
        for R, V in zip(self.elements, self.supports):
            if np.max(np.abs(R.conj().T @ R - V @ V.conj().T), initial=0) > tol:
                raise AssertionError("R_k^dagger R_k is not the projector onto its support")
            RR = R @ R.conj().T
            if np.max(np.abs(RR @ RR - RR), initial=0) > tol:
                raise AssertionError("R_k R_k^dagger is not a projector")
            if V.shape[1] > self.d_S:
                raise AssertionError("element rank exceeds d_S")
        B = self.support_union()
        G = B.conj().T @ B
        if np.max(np.abs(G - np.eye(G.shape[0])), initial=0) > tol:
            raise AssertionError("supports are not mutually orthogonal")
        return True

    def choi(self) -> np.ndarray:
        F = np.stack([dket(R) for R in self.elements], axis=1)
        return F @ F.conj().T

    def element_fidelities(self, C: DataMatrix) -> np.ndarray:
        if not self.elements:
            return np.zeros(0)
        F = np.stack([dket(R) for R in self.elements], axis=1)
        return np.real(np.sum(F.conj() * (C.C @ F), axis=0))

    def fidelity_on(self, C: DataMatrix) -> float:
        return float(np.sum(self.element_fidelities(C)))


@dataclass
class BlockRecovery:
    """Syndrome measurement onto subspaces ``S_q`` followed by per-block optimal recovery.

    ``residual`` optionally holds a structured recovery for the part of the
    code space not covered by ``blocks``.
    """

    blocks: list  # of BlockSolution
    d_S: int
    d_C: int
    residual: StructuredRecovery | None = None
    name: str = ""

    @property
    def projectors(self) -> list:
        return [b.projector for b in self.blocks]

    @property
    def value(self) -> float:
        total = sum(b.value for b in self.blocks)
        if self.residual is not None:
            total += float(np.sum(self.residual.contributions))
        return total

    def partition(self) -> list:
        parts = [b.basis for b in self.blocks]
        if self.residual is not None:
            parts += self.residual.partition()
        elif sum(p.shape[1] for p in parts) < self.d_C:
            B = np.concatenate(parts, axis=1)
            parts.append(orthonormal_complement(B, self.d_C))
        return parts

    def block_duals(self) -> list:
        """``(basis, Y_q)`` pairs for every block with a dual variable."""
        return [(b.basis, b.Y) for b in self.blocks]

    def dual_pairs(self) -> list:
        """:meth:`block_duals` plus ``(basis, None)`` for residual subspaces."""
        pairs = self.block_duals()
        if self.residual is not None:
            pairs += [(Q, None) for Q in self.residual.partition()]
        elif sum(b.dim for b in self.blocks) < self.d_C:
            pairs.append((self.partition()[-1], None))
        return pairs

    def choi(self) -> np.ndarray:
        X = sum(b.full_choi(self.d_S) for b in self.blocks)
        if self.residual is not None and len(self.residual):
            X = X + self.residual.choi()
        return X

    def fidelity_on(self, C: DataMatrix) -> float:
        total = 0.0
        for b in self.blocks:
            Ck = C.restrict(b.basis)
            total += float(np.real(np.vdot(b.X.conj().T, Ck.C)))
        if self.residual is not None:
            total += self.residual.fidelity_on(C)
        return total

    def check_invariants(self, tol: float = 1e-8):
        B = np.concatenate([p for p in self.partition()], axis=1)
        G = B.conj().T @ B
        if np.max(np.abs(G - np.eye(G.shape[0])), initial=0) > tol:
            raise AssertionError("block subspaces are not mutually orthogonal")
        if self.residual is not None:
            self.residual.check_invariants()
        return True


def _as_data_matrix(C) -> DataMatrix:
    if not isinstance(C, DataMatrix):
        raise TypeError(f"expected a DataMatrix, got {type(C).__name__}")
    return C


def eig_qer(C: DataMatrix, rank_sv_threshold: float = RANK_SV_THRESHOLD,
            early_stop_contribution: float = EARLY_STOP_CONTRIBUTION,
            max_elements: int | None = None, basis=None) -> StructuredRecovery:
    """Greedy eigenvector recovery.

    Parameters
    ----------
    C : DataMatrix
        Fidelity data matrix.
    rank_sv_threshold : float
        Rank of each element is the number of singular values of the
        reshaped dominant eigenvector with ``sigma**2 >= rank_sv_threshold``.
    early_stop_contribution : float
        Stop after the first element whose contribution is below this value.
        Pass ``0`` to run until the code space is exhausted.
    max_elements : int, optional
        Hard cap on the number of elements.
    basis : ndarray, optional
        Orthonormal basis of the subspace to work in (default: all of ``H_C``).

    Returns
    -------
    StructuredRecovery
        Elements in greedy order; a zero dominant eigenvalue ends the run
        and leaves the rest as a completeness deficit.
    """
    C = _as_data_matrix(C)
    d_S, d_C = C.d_S, C.d_C
    Q = np.eye(d_C, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    Cr = C.restrict(Q) if basis is not None else C
    lam_scale = float(np.linalg.eigvalsh(C.C)[-1]) if d_C else 0.0
    elements, contributions, supports = [], [], []
    while Q.shape[1] > 0:
        if max_elements is not None and len(elements) >= max_elements:
            break
        r = Q.shape[1]
        w, V = top_eigs(Cr.C, 1)
        if w[0] <= ZERO_EIG_RTOL * lam_scale:
            log.debug("eig_qer: zero dominant eigenvalue with %d dimensions left", r)
            break
        X = V[:, 0].reshape(d_S, r)
        U, s, Vh = np.linalg.svd(X, full_matrices=False)
        d_k = max(1, int(np.sum(s ** 2 >= rank_sv_threshold)))
        R_c = U[:, :d_k] @ Vh[:d_k]
        f_k = float(np.real(np.vdot(dket(R_c), Cr.C @ dket(R_c))))
        Vk = Vh[:d_k].conj().T  # support in compressed coordinates
        elements.append(R_c @ Q.conj().T)
        supports.append(Q @ Vk)
        contributions.append(f_k)
        comp = orthonormal_complement(Vk, r)
        Q = Q @ comp
        Cr = Cr.restrict(comp) if comp.shape[1] else None
        if f_k < early_stop_contribution:
            break
    rec = StructuredRecovery(elements, contributions, d_S, d_C, "eigqer", supports,
                             None if basis is None else np.asarray(basis, dtype=complex))
    rec.check_invariants()
    return rec


def _orthonormalize(vectors, against=None, tol: float = DROP_TOL) -> np.ndarray:
    """Pivoted-QR basis of ``span(vectors)`` after projecting out ``against``.

    Columns whose norm after projection falls below ``tol`` are dropped.
    """
    A = np.asarray(vectors, dtype=complex)
    dim = A.shape[0]
    if A.shape[1] == 0:
        return np.zeros((dim, 0), dtype=complex)
    if against is not None and against.shape[1]:
        A = A - against @ (against.conj().T @ A)
    Qf, R, _ = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag >= tol))
    return Qf[:, :rank]


def _block_step(Q, Cr, basis_c, tol):
    sol = solve_block_sdp(Cr, basis=basis_c, tol=tol)
    full = BlockSolution(Q @ basis_c, sol.X, sol.Y, sol.value, sol.gap)
    comp = orthonormal_complement(basis_c, Q.shape[1])
    return full, Q @ comp, (Cr.restrict(comp) if comp.shape[1] else None)


def block_eig_qer(C: DataMatrix, block_size: int, sdp_tol: float = BLOCK_SDP_TOL) -> BlockRecovery:
    """BlockEigQER with ``block_size`` eigenvectors per round.

    Each round takes the ``block_size`` dominant eigenvectors of the current
    data matrix, forms the union of the supports of their reshaped operators,
    solves the fidelity SDP on that subspace and projects it out.  Once the
    remaining dimension is at most ``block_size * d_S`` it is processed as the
    final block.
    """
    C = _as_data_matrix(C)
    d_S, d_C = C.d_S, C.d_C
    if not 1 <= block_size <= d_S * d_C:
        raise ValueError(f"block size must lie in [1, {d_S * d_C}], got {block_size}")
    Q = np.eye(d_C, dtype=complex)
    Cr = C
    blocks = []
    while Q.shape[1] > 0:
        r = Q.shape[1]
        if r <= block_size * d_S:
            basis_c = np.eye(r, dtype=complex)
        else:
            _, V = top_eigs(Cr.C, block_size)
            # support of X_m is range(X_m^dagger)
            vecs = np.concatenate([V[:, m].reshape(d_S, r).conj().T for m in range(V.shape[1])],
                                  axis=1)
            basis_c = _orthonormalize(vecs)
            if basis_c.shape[1] == 0:
                basis_c = np.eye(r, dtype=complex)
        blk, Q, Cr = _block_step(Q, Cr, basis_c, sdp_tol)
        blocks.append(blk)
    rec = BlockRecovery(blocks, d_S, d_C, name=f"blockeig{block_size}")
    rec.check_invariants()
    return rec


def order_subspaces(code, channel, orders) -> list:
    """Orthonormal bases of the error-order subspaces ``S_o`` for ``o in orders``.

    ``S_1`` spans the no-error and single-error images of the logical basis;
    ``S_o`` for ``o >= 2`` spans the images with exactly ``o`` error events.
    Each is orthogonalized against all earlier ones and near-null directions
    are dropped.
    """
    base = getattr(channel, "base", channel)
    n = code.n
    e = base.error_index
    if e is None:
        raise ValueError("channel has no designated error element")
    if base.dim_in ** n != code.d_C:
        raise ValueError("channel does not act on the code's qubits")
    orders = sorted(set(int(o) for o in orders))
    if not orders or orders[0] < 1 or orders[-1] > n:
        raise ValueError(f"orders must lie in [1, {n}]")
    nonerr = [k for k in range(len(base)) if k != e]
    tp = TensorPowerChannel(base, n)
    L = code.logical_basis()
    out = []
    done = np.zeros((code.d_C, 0), dtype=complex)
    for o in orders:
        vecs = []
        sizes = [0, 1] if o == 1 else [o]
        for size in sizes:
            for pos in combinations(range(n), size):
                # remaining qubits take every non-error element (just E_0 for
                # amplitude damping)
                for fill in _fills(nonerr, n - size):
                    idx, it = [], iter(fill)
                    for j in range(n):
                        idx.append(e if j in pos else next(it))
                    v = tp.apply_local(tuple(idx), L)
                    vecs.append(v)
        A = np.concatenate(vecs, axis=1)
        norms = np.linalg.norm(A, axis=0)
        A = A[:, norms > 1e-300] / norms[norms > 1e-300]
        Qo = _orthonormalize(A, done)
        out.append(Qo)
        done = np.concatenate([done, Qo], axis=1)
    return out


def _fills(choices, count):
    if count == 0:
        yield ()
        return
    if len(choices) == 1:
        yield (choices[0],) * count
        return
    yield from product(choices, repeat=count)


def order_qer(code, channel, C: DataMatrix, orders=(1,), residual: str = "eigqer",
              early_stop_contribution: float = 0.0, sdp_tol: float = BLOCK_SDP_TOL) -> BlockRecovery:
    """OrderQER: per-order SDP blocks, remaining space by EigQER.

    Parameters
    ----------
    code
        Encoding with a ``logical_basis`` method.
    channel
        The single-qubit channel (or its tensor power) with ``error_index`` set.
    C : DataMatrix
        Data matrix of the encoded channel.
    orders : sequence of int
        Error orders to give their own block.
    residual : {"eigqer", "none"}
        Treatment of the remaining subspace.
    """
    C = _as_data_matrix(C)
    subspaces = order_subspaces(code, channel, orders)
    blocks = []
    for Qo in subspaces:
        if Qo.shape[1] == 0:
            continue
        blocks.append(solve_block_sdp(C, basis=Qo, tol=sdp_tol))
    covered = np.concatenate([b.basis for b in blocks], axis=1) if blocks else np.zeros((C.d_C, 0))
    rest = orthonormal_complement(covered, C.d_C)
    res = None
    if residual == "eigqer" and rest.shape[1]:
        res = eig_qer(C, early_stop_contribution=early_stop_contribution, basis=rest)
    elif residual not in ("eigqer", "none"):
        raise ValueError(f"unknown residual treatment {residual!r}")
    tag = "+".join(str(o) for o in sorted(set(orders)))
    rec = BlockRecovery(blocks, C.d_S, C.d_C, residual=res, name=f"orderqer{tag}")
    rec.check_invariants()
    return rec


def standard_qec_recovery(code) -> StructuredRecovery:
    """Syndrome measurement plus minimum-weight Pauli correction, then decoding.

    ``R_q = U_C^dagger E_q^dagger P_q`` with ``E_q`` the lowest-weight Pauli of
    syndrome ``q`` (lexicographic tie-break in ``I < X < Y < Z`` order).
    """
    from .codes import min_weight_corrections

    U = code.U_C
    elements, supports = [], []
    for q, label in enumerate(min_weight_corrections(code)):
        E = Pauli.from_label(label).matrix()
        B = E @ U  # orthonormal basis of S_q
        elements.append(U.conj().T @ E.conj().T @ (B @ B.conj().T))
        supports.append(B)
    rec = StructuredRecovery(elements, [float("nan")] * len(elements), code.d_S, code.d_C,
                             "qec", supports)
    rec.check_invariants()
    return rec


def optimal_recovery(C: DataMatrix, tol: float = 1e-7) -> BlockRecovery:
    """Global SDP optimum as a one-block recovery."""
    C = _as_data_matrix(C)
    sol = solve_qer_sdp(QerSdpProblem(C), tol=tol)
    blk = BlockSolution(np.eye(C.d_C, dtype=complex), sol.X_opt, sol.Y_opt, sol.primal_value,
                        sol.gap)
    return BlockRecovery([blk], C.d_S, C.d_C, name="optimal")
