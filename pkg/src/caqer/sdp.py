"""Interior-point solver for the CPTP-constrained fidelity SDP.

Primal:  maximize tr(X C)  s.t.  X >= 0,  tr_{H_S} X = I
Dual:    minimize tr(Y)    s.t.  Z = I (x) Y - C >= 0

The solver is a feasible-start primal-dual path-following method with the
HKM search direction and a Mehrotra predictor-corrector.  Hermitian matrices
are handled directly in complex arithmetic; the Schur complement of the
equality constraint is assembled over a real orthonormal basis of Hermitian
``d x d`` matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .fidelity import DataMatrix, embedding
from .opalg import ptrace_left

__all__ = [
    "SDPError",
    "QerSdpProblem",
    "QerSdpSolution",
    "solve_qer_sdp",
    "solve_block_sdp",
    "BlockSolution",
]

log = logging.getLogger(__name__)

GAP_TOL = 1e-7
INFEAS_TOL = 1e-8
MAX_ITERS = 200
_STEP_FRACTION = 0.95


# data matrices with lambda_max below this are treated as zero
ZERO_SCALE = 1e-14


class SDPError(RuntimeError):
    """The interior-point iteration stopped short of its tolerances."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class QerSdpProblem:
    """Fidelity SDP on ``H_S (x) S*`` with ``dim(S) = d_sub``."""

    C: DataMatrix

    @property
    def d_S(self) -> int:
        return self.C.d_S

    @property
    def d_sub(self) -> int:
        return self.C.d_C


@dataclass
class QerSdpSolution:
    X_opt: np.ndarray
    Y_opt: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_margin: float
    iterations: int
    history: list = field(default_factory=list, repr=False)


def _hermitian_basis(d):
    """Index/weight arrays for a real orthonormal basis of d x d Hermitian matrices.

    Basis element ``j`` has entries ``w1[j]`` at flat index ``i1[j]`` and
    ``w2[j]`` at ``i2[j]``.
    """
    i1, i2, w1, w2 = [], [], [], []
    r = 1 / np.sqrt(2)
    for a in range(d):
        i1.append(a * d + a)
        i2.append(a * d + a)
        w1.append(1.0)
        w2.append(0.0)
    for a in range(d):
        for b in range(a + 1, d):
            i1 += [a * d + b, a * d + b]
            i2 += [b * d + a, b * d + a]
            w1 += [r, -1j * r]
            w2 += [r, 1j * r]
    return np.array(i1), np.array(i2), np.array(w1, dtype=complex), np.array(w2, dtype=complex)


class _Basis:
    def __init__(self, d):
        self.d = d
        self.i1, self.i2, self.w1, self.w2 = _hermitian_basis(d)

    def to_matrix(self, y):
        v = np.zeros(self.d * self.d, dtype=complex)
        np.add.at(v, self.i1, self.w1 * y)
        np.add.at(v, self.i2, self.w2 * y)
        return v.reshape(self.d, self.d)

    def coords(self, H):
        h = H.reshape(-1)
        return np.real(np.conj(self.w1) * h[self.i1] + np.conj(self.w2) * h[self.i2])

    def schur(self, K):
        # Re(T^H K T) without forming T
        KT = K[:, self.i1] * self.w1 + K[:, self.i2] * self.w2
        M = np.conj(self.w1)[:, None] * KT[self.i1, :] + np.conj(self.w2)[:, None] * KT[self.i2, :]
        return np.real(M)


def _inv_psd(A):
    L = np.linalg.cholesky(A)
    Li = scipy.linalg.solve_triangular(L, np.eye(A.shape[0]), lower=True)
    return Li.conj().T @ Li, L


def _max_step(L, D):
    """Largest ``a`` with ``L L^dagger + a D >= 0`` (``inf`` if unbounded)."""
    Li = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    S = Li @ D @ Li.conj().T
    lam = np.linalg.eigvalsh((S + S.conj().T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _sym(A):
    return (A + A.conj().T) / 2


def solve_qer_sdp(prob, tol: float = GAP_TOL, max_iters: int = MAX_ITERS) -> QerSdpSolution:
    """Optimal recovery Choi matrix and dual variable for a data matrix.

    Stops when the duality gap is below ``tol * max(1, |primal|)`` in the
    internally normalized problem (so it is relative to the scale of ``C``)
    and the equality residual is below ``1e-8``.
    """
    Cm = prob.C if isinstance(prob, DataMatrix) else prob.C
    C_full = np.asarray(Cm.C)
    d_S, d = Cm.d_S, Cm.d_C
    n = d_S * d
    eye_d = np.eye(d)
    scale = float(np.linalg.eigvalsh(C_full)[-1]) if n else 0.0
    X = np.eye(n, dtype=complex) / d_S
    if scale <= ZERO_SCALE:
        # numerically zero data: normalizing would amplify rounding noise, so
        # return the trivial recovery with the exactly feasible dual Y = scale I
        scale = max(scale, 0.0)
        primal = float(np.real(np.vdot(X.conj().T, C_full)))
        margin = float(np.linalg.eigvalsh(np.kron(np.eye(d_S), scale * eye_d) - C_full)[0])
        return QerSdpSolution(X, scale * eye_d.astype(complex), primal, d * scale,
                              d * scale - primal, 0.0, margin, 0)
    C = C_full / scale
    basis = _Basis(d)
    Y = 2.0 * eye_d.astype(complex)
    history = []
    it = 0
    status = "max_iters"

    def dual_slack(Y):
        return np.kron(np.eye(d_S), Y) - C

    Z = dual_slack(Y)
    for it in range(1, max_iters + 1):
        Zi, LZ = _inv_psd(Z)
        LX = np.linalg.cholesky(X)
        primal = float(np.real(np.vdot(X.conj().T, C)))
        dual = float(np.real(np.trace(Y)))
        gap = float(np.real(np.vdot(X, Z)))
        r_p = eye_d - ptrace_left(X, (d_S, d))
        res_p = float(np.max(np.abs(r_p)))
        history.append((primal * scale, dual * scale))
        if gap <= tol * max(1.0, abs(primal)) and res_p <= INFEAS_TOL:
            status = "optimal"
            break
        mu = gap / n

        X4 = X.reshape(d_S, d, d_S, d)
        Zi4 = Zi.reshape(d_S, d, d_S, d)
        # G(dY) = tr_S(X (I (x) dY) Z^-1) as a linear map on vec(dY)
        K = np.einsum("satb,tcse->aebc", X4, Zi4, optimize=True).reshape(d * d, d * d)
        M = basis.schur(K)
        M = (M + M.T) / 2
        try:
            cho = scipy.linalg.cho_factor(M)
        except np.linalg.LinAlgError:
            status = "schur_singular"
            break

        def direction(target):
            # dX = target - sym(X dZ Z^-1), dZ = I (x) dY, tr_S dX = r_p
            rhs = basis.coords(ptrace_left(target, (d_S, d)) - r_p)
            dy = scipy.linalg.cho_solve(cho, rhs)
            dY = basis.to_matrix(dy)
            dY = _sym(dY)
            dZ = np.kron(np.eye(d_S), dY)
            dX = target - _sym(X @ dZ @ Zi)
            return dX, dY, dZ

        # predictor
        dXa, dYa, dZa = direction(-X)
        ap = min(1.0, _max_step(LX, dXa))
        ad = min(1.0, _max_step(LZ, dZa))
        mu_aff = float(np.real(np.vdot(X + ap * dXa, Z + ad * dZa))) / n
        sigma = min(1.0, (mu_aff / mu) ** 3)
        # corrector
        target = sigma * mu * Zi - X - _sym(dXa @ dZa @ Zi)
        dX, dY, dZ = direction(target)
        ap = min(1.0, _STEP_FRACTION * _max_step(LX, dX))
        ad = min(1.0, _STEP_FRACTION * _max_step(LZ, dZ))
        X = _sym(X + ap * dX)
        Y = _sym(Y + ad * dY)
        Z = dual_slack(Y)
    primal = float(np.real(np.vdot(X.conj().T, C)))
    dual = float(np.real(np.trace(Y)))
    res_p = float(np.max(np.abs(eye_d - ptrace_left(X, (d_S, d)))))
    margin = float(np.linalg.eigvalsh(Z)[0]) * scale
    sol = QerSdpSolution(
        X_opt=X,
        Y_opt=Y * scale,
        primal_value=primal * scale,
        dual_value=dual * scale,
        gap=(dual - primal) * scale,
        primal_residual=res_p,
        dual_margin=margin,
        iterations=it,
        history=history,
    )
    log.debug("sdp n=%d status=%s iters=%d gap=%.2e", n, status, it, sol.gap)
    if status != "optimal":
        raise SDPError(f"SDP stopped ({status}) after {it} iterations: gap {sol.gap:.3e}, "
                       f"primal residual {res_p:.3e}", sol)
    return sol


@dataclass
class BlockSolution:
    """Optimal recovery on one subspace ``S_k`` of the code space.

    ``basis`` holds orthonormal columns spanning ``S_k``; ``X`` and ``Y`` live
    on the compressed space ``H_S (x) S_k*``.
    """

    basis: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    value: float
    gap: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def full_choi(self, d_S: int) -> np.ndarray:
        V = embedding(self.basis, d_S)
        return V @ self.X @ V.conj().T

    def full_dual(self) -> np.ndarray:
        """``Y`` mapped to ``H_C*``: ``conj(Q) Y Q^T``."""
        Q = self.basis
        return Q.conj() @ self.Y @ Q.T


def support_basis(P, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal columns spanning the range of a projector."""
    w, V = np.linalg.eigh(_sym(np.asarray(P)))
    return V[:, w > 0.5]


def solve_block_sdp(C: DataMatrix, P=None, basis=None, tol: float = GAP_TOL) -> BlockSolution:
    """Optimal syndrome recovery restricted to the support of projector ``P``.

    Pass either ``P`` or an orthonormal ``basis`` of the subspace.
    """
    if basis is None:
        if P is None:
            raise ValueError("need a projector or a basis")
        P = np.asarray(P)
        if P.shape != (C.d_C, C.d_C):
            raise ValueError(f"projector shape {P.shape} does not match d_C = {C.d_C}")
        if np.max(np.abs(P @ P - P)) > 1e-8:
            raise ValueError("P is not a projector")
        basis = support_basis(P)
    basis = np.asarray(basis, dtype=complex)
    Ck = C.restrict(basis)
    sol = solve_qer_sdp(QerSdpProblem(Ck), tol=tol)
    return BlockSolution(basis, sol.X_opt, sol.Y_opt, sol.primal_value, sol.gap)
