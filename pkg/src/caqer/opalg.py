"""Dense complex operator algebra.

Operators are plain 2-D ``numpy`` arrays: row index is the codomain basis,
column index the domain basis.  An operator ``A: H -> K`` is vectorized as

    |A>> = sum_ij a_ij |i> (x) conj|j>

with coordinate ``(i, j)`` stored at flat index ``i * cols + j`` (row-major),
so the coordinates of ``|A>>`` are literally the entries of ``A``.  With this
layout ``(A (x) conj(B)) |C>> = |A C B^dagger>>`` and the Kronecker product
is taken with the conjugation folded into the second factor.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

__all__ = [
    "EigenSolverError",
    "dket",
    "undket",
    "hs_inner",
    "kron_conj_apply",
    "ptrace_left",
    "ptrace_right",
    "hermitize",
    "is_isometry",
    "dominant_eig",
    "min_eig",
    "top_eigs",
    "closest_isometry",
    "orthonormal_complement",
    "haar_isometry",
]

HERMITIAN_TOL = 1e-10
LANCZOS_MIN_DIM = 256
_STALL_WINDOW = 50
_STALL_RATIO = 1e-14


class EigenSolverError(RuntimeError):
    """Raised when an eigensolver fails to reach its residual target."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def dket(A) -> np.ndarray:
    """Vectorize an operator into ``K (x) H*`` coordinates."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D operator, got shape {A.shape}")
    return A.reshape(-1).astype(complex, copy=True)


def undket(v, dim_left: int, dim_right: int) -> np.ndarray:
    """Inverse of :func:`dket`."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != dim_left * dim_right:
        raise ValueError(
            f"coords of length {v.size} do not match {dim_left}x{dim_right}"
        )
    return v.reshape(dim_left, dim_right).astype(complex, copy=True)


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product ``tr(A^dagger B)``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def kron_conj_apply(A, B, c, c_shape=None) -> np.ndarray:
    """Apply ``A (x) conj(B)`` to the double-ket ``c``.

    ``c`` may be given either as the operator ``C`` itself or as its flat
    coordinates (then ``c_shape`` is required).  Returns ``|A C B^dagger>>``.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    c = np.asarray(c)
    if c.ndim == 1:
        if c_shape is None:
            raise ValueError("c_shape is required for flat coordinates")
        C = undket(c, *c_shape)
    else:
        C = c
    if A.shape[1] != C.shape[0] or B.shape[1] != C.shape[1]:
        raise ValueError(
            f"cannot form A C B^dagger with A{A.shape}, C{C.shape}, B{B.shape}"
        )
    return dket(A @ C @ B.conj().T)


def _split(M, dims):
    M = np.asarray(M)
    dk, dh = dims
    if M.ndim != 2 or M.shape != (dk * dh, dk * dh):
        raise ValueError(f"dims {dims} do not factor a matrix of shape {M.shape}")
    return M.reshape(dk, dh, dk, dh)


def ptrace_left(M, dims) -> np.ndarray:
    """Trace out the left factor of an operator on ``K (x) H*``.

    For a rank-one ``|A>><<B|`` the result is ``conj(A^dagger B)``, an
    operator on ``H*``.
    """
    return np.einsum("iaib->ab", _split(M, dims))


def ptrace_right(M, dims) -> np.ndarray:
    """Trace out the right factor; ``|A>><<B|`` maps to ``A B^dagger``."""
    return np.einsum("aibi->ab", _split(M, dims))


def hermitize(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(M + M^dagger)/2``; reject matrices that are far from Hermitian."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    asym = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return (M + M.conj().T) / 2


def is_isometry(V, tol: float = 1e-10) -> bool:
    """True when ``V^dagger V`` is the identity on the domain."""
    V = np.asarray(V)
    G = V.conj().T @ V
    return bool(np.max(np.abs(G - np.eye(G.shape[0])), initial=0.0) <= tol)


def _residual(M, lam, v):
    return float(np.linalg.norm(M @ v - lam * v))


def _power_iterate(M, tol, max_iters, seed=0):
    """Power method on a PSD matrix; returns (lambda, v, residual)."""
    n = M.shape[0]
    norm_m = float(np.linalg.norm(M, 2))
    if norm_m == 0.0:
        v = np.zeros(n, dtype=complex)
        v[0] = 1.0
        return 0.0, v, 0.0
    target = tol * norm_m
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    rng = None
    best = np.inf
    stalled = 0
    lam = 0.0
    res = np.inf
    for _ in range(max_iters):
        w = M @ v
        lam = float(np.real(np.vdot(v, w)))
        res = float(np.linalg.norm(w - lam * v))
        if res <= target:
            return lam, v, res
        if res < best * (1 - _STALL_RATIO):
            best = res
            stalled = 0
        else:
            stalled += 1
        nw = np.linalg.norm(w)
        if nw == 0.0 or stalled >= _STALL_WINDOW:
            # start vector orthogonal to the top eigenspace, or a stall
            rng = rng or np.random.default_rng(seed)
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            nw = np.linalg.norm(w)
            stalled = 0
            best = np.inf
        v = w / nw
    return lam, v, res


def dominant_eig(M, tol: float = 1e-10, max_iters: int | None = None, method: str = "power"):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Parameters
    ----------
    M : array_like
        Hermitian matrix (positive semidefinite for ``method="power"``).
    tol : float
        Relative residual target: ``||M v - lam v|| <= tol * ||M||``.
    max_iters : int, optional
        Power-method iteration cap, ``50 * dim`` by default.
    method : {"power", "lapack"}
        ``"power"`` runs the power method from the normalized all-ones
        vector.  ``"lapack"`` calls the dense Hermitian eigensolver for the
        top eigenpair only; it is much faster on clustered spectra.

    Returns
    -------
    (float, ndarray)
        Eigenvalue and unit eigenvector.
    """
    M = hermitize(M)
    n = M.shape[0]
    if method == "lapack":
        w, V = scipy.linalg.eigh(M, subset_by_index=[n - 1, n - 1])
        lam, v = float(w[0]), V[:, 0]
    elif method == "power":
        if max_iters is None:
            max_iters = 50 * n
        lam, v, res = _power_iterate(M, tol, max_iters)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _residual(M, lam, v)
    # Frobenius norm bounds the spectral norm and avoids an SVD on large inputs
    norm = np.linalg.norm(M, 2) if method == "power" else np.linalg.norm(M)
    scale = max(float(norm), np.finfo(float).tiny)
    if res > tol * scale and res > 1e3 * np.finfo(float).eps * scale:
        raise EigenSolverError(
            f"dominant_eig did not converge: residual {res:.3e}", residual=res
        )
    return lam, v


def min_eig(M, tol: float = 1e-10, max_iters: int | None = None, method: str = "power",
            return_vector: bool = False):
    """Smallest eigenvalue of a Hermitian matrix.

    The power method is applied to ``eta I - M`` where ``eta`` is one plus the
    largest absolute row sum of ``M``, which makes the shifted matrix
    positive definite.
    """
    M = hermitize(M)
    n = M.shape[0]
    if method == "lapack":
        w, V = scipy.linalg.eigh(M, subset_by_index=[0, 0])
        lam, v = float(w[0]), V[:, 0]
    elif method == "power":
        eta = 1.0 + float(np.max(np.sum(np.abs(M), axis=1)))
        norm_m = float(np.linalg.norm(M, 2))
        shifted = eta * np.eye(n) - M
        # residual of the shifted problem equals the residual for M
        shift_tol = tol * norm_m / float(np.linalg.norm(shifted, 2)) if norm_m else tol
        _, v = dominant_eig(shifted, tol=shift_tol, max_iters=max_iters, method="power")
        lam = float(np.real(np.vdot(v, M @ v)))
    else:
        raise ValueError(f"unknown method {method!r}")
    if return_vector:
        return lam, v
    return lam


def top_eigs(M, count: int, method: str = "auto"):
    """The ``count`` largest eigenpairs, eigenvalues in descending order.

    ``method="lanczos"`` uses ARPACK from a fixed start vector (deterministic);
    ``"auto"`` picks it for matrices larger than ``LANCZOS_MIN_DIM`` and falls
    back to the dense solver if ARPACK does not converge.
    """
    M = hermitize(M)
    n = M.shape[0]
    count = min(count, n)
    if method == "auto":
        method = "lanczos" if n >= LANCZOS_MIN_DIM and count <= n // 8 else "lapack"
    if method == "lanczos":
        try:
            w, V = scipy.sparse.linalg.eigsh(M, k=count, which="LA",
                                             v0=np.ones(n, dtype=M.dtype) / np.sqrt(n),
                                             ncv=min(n, max(2 * count + 1, 40)), tol=0)
            order = np.argsort(w)[::-1]
            return w[order], V[:, order]
        except scipy.sparse.linalg.ArpackNoConvergence:
            method = "lapack"
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = scipy.linalg.eigh(M, subset_by_index=[n - count, n - 1])
    return w[::-1], V[:, ::-1]


def closest_isometry(X, d: int) -> np.ndarray:
    """Rank-``d`` partial isometry closest to ``X`` in Hilbert-Schmidt norm.

    With ``X = U S V^dagger`` (singular values descending) this returns
    ``U I_d V^dagger`` where ``I_d`` keeps the first ``d`` diagonal ones.
    """
    X = np.asarray(X)
    if not 1 <= d <= min(X.shape):
        raise ValueError(f"rank {d} out of range for shape {X.shape}")
    U, _, Vh = np.linalg.svd(X, full_matrices=False)
    return U[:, :d] @ Vh[:d, :]


def orthonormal_complement(Q, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of ``range(Q)`` in ``C^dim``.

    ``Q`` must have orthonormal columns; the result comes from a full QR
    factorization of ``Q``.
    """
    if Q is None or np.asarray(Q).size == 0:
        return np.eye(dim, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    k = Q.shape[1]
    if k >= dim:
        return np.zeros((dim, 0), dtype=complex)
    F, _ = scipy.linalg.qr(Q, mode="full")
    return F[:, k:]


def haar_isometry(rows: int, cols: int, rng) -> np.ndarray:
    """Haar-random isometry with orthonormal columns (``rows >= cols``)."""
    G = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
