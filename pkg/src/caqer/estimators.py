"""Estimator-style wrappers around the recovery and bound routines.

Each recovery estimator is fitted on a data matrix and scores a data matrix
by the average entanglement fidelity of its fitted recovery.  Bound
estimators expose ``bound_`` and ``dual_``.

>>> rec = EigQER(early_stop_contribution=0.0).fit(C)      # doctest: +SKIP
>>> rec.score(C), len(rec.recovery_)                      # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import bounds, recovery
from .fidelity import avg_ent_fidelity
from .validation import check_data_matrix, check_in_range, check_is_fitted, check_positive_int

__all__ = [
    "EigQER",
    "BlockEigQER",
    "OrderQER",
    "StandardQEC",
    "OptimalQER",
    "GersgorinBound",
    "SVDBound",
    "IterativeDualBound",
    "IteratedBlockDualBound",
]


class _RecoveryEstimator(BaseEstimator):
    def _build(self, C):
        raise NotImplementedError

    def fit(self, C, y=None):
        C = check_data_matrix(C)
        self.recovery_ = self._build(C)
        self.fidelity_ = avg_ent_fidelity(self.recovery_, C)
        return self

    def score(self, C, y=None) -> float:
        check_is_fitted(self, "recovery_")
        return avg_ent_fidelity(self.recovery_, check_data_matrix(C))

    def partition(self):
        check_is_fitted(self, "recovery_")
        return self.recovery_.partition()


class EigQER(_RecoveryEstimator):
    """Greedy eigenvector recovery.

    Parameters
    ----------
    rank_sv_threshold : float
        Singular-value cut (on ``sigma**2``) that fixes each element's rank.
    early_stop_contribution : float
        Stop after an element contributing less than this.
    max_elements : int or None
        Cap on the number of elements.
    """

    def __init__(self, rank_sv_threshold=recovery.RANK_SV_THRESHOLD,
                 early_stop_contribution=recovery.EARLY_STOP_CONTRIBUTION, max_elements=None):
        self.rank_sv_threshold = rank_sv_threshold
        self.early_stop_contribution = early_stop_contribution
        self.max_elements = max_elements

    def _build(self, C):
        check_in_range("rank_sv_threshold", self.rank_sv_threshold, 0.0, 1.0)
        check_in_range("early_stop_contribution", self.early_stop_contribution, 0.0, 1.0)
        if self.max_elements is not None:
            check_positive_int("max_elements", self.max_elements)
        return recovery.eig_qer(C, self.rank_sv_threshold, self.early_stop_contribution,
                                self.max_elements)


class BlockEigQER(_RecoveryEstimator):
    """Block recovery from the ``block_size`` dominant eigenvectors per round."""

    def __init__(self, block_size=2, sdp_tol=recovery.BLOCK_SDP_TOL):
        self.block_size = block_size
        self.sdp_tol = sdp_tol

    def _build(self, C):
        check_positive_int("block_size", self.block_size)
        return recovery.block_eig_qer(C, self.block_size, sdp_tol=self.sdp_tol)


class OrderQER(_RecoveryEstimator):
    """Error-order subspace blocks with an EigQER residual."""

    def __init__(self, code=None, channel=None, orders=(1,)):
        self.code = code
        self.channel = channel
        self.orders = orders

    def _build(self, C):
        if self.code is None or self.channel is None:
            raise ValueError("OrderQER needs a code and a single-qubit channel")
        return recovery.order_qer(self.code, self.channel, C, self.orders)


class StandardQEC(_RecoveryEstimator):
    """Minimum-weight syndrome decoding; ``fit`` only checks dimensions."""

    def __init__(self, code=None):
        self.code = code

    def _build(self, C):
        if self.code is None:
            raise ValueError("StandardQEC needs a stabilizer code")
        check_data_matrix(C, self.code.d_S, self.code.d_C)
        return recovery.standard_qec_recovery(self.code)


class OptimalQER(_RecoveryEstimator):
    """Global SDP optimum; ``dual_`` holds the matching dual point."""

    def __init__(self, tol=1e-7):
        self.tol = tol

    def _build(self, C):
        rec = recovery.optimal_recovery(C, tol=self.tol)
        blk = rec.blocks[0]
        self.dual_ = bounds._make_point(blk.full_dual(), C, "sdp")
        return rec


class _BoundEstimator(BaseEstimator):
    def _dual(self, C, partition):
        raise NotImplementedError

    def fit(self, C, partition=None):
        """``partition`` is a list of bases/projectors or a fitted recovery estimator."""
        C = check_data_matrix(C)
        self.dual_ = self._dual(C, partition)
        self.bound_ = self.dual_.bound
        self.feasibility_margin_ = self.dual_.feasibility_margin
        return self

    def score(self, C=None, y=None) -> float:
        """The bound, or ``nan`` if the dual point is infeasible."""
        check_is_fitted(self, "dual_")
        return self.bound_ if self.dual_.feasible else float("nan")


def _parts(partition):
    if partition is None:
        raise ValueError("a partition of the code space is required")
    if hasattr(partition, "partition"):
        return partition.partition()
    return partition


class GersgorinBound(_BoundEstimator):
    def _dual(self, C, partition):
        return bounds.gersgorin_dual(C, _parts(partition))


class SVDBound(_BoundEstimator):
    def _dual(self, C, partition):
        return bounds.svd_dual(C, _parts(partition))


class IterativeDualBound(_BoundEstimator):
    """Iterative repair of an initial dual point.

    Parameters
    ----------
    init : {"lambda_max", "block_sdp", "svd", "gersgorin", "zero"}
        Start point.  ``"block_sdp"`` needs a fitted block recovery.
    tol : float
        Feasibility tolerance on ``lambda_min(I (x) Y - C)``.
    """

    def __init__(self, init="lambda_max", tol=bounds.FEAS_TOL):
        self.init = init
        self.tol = tol

    def _dual(self, C, partition):
        if self.init == "zero":
            Y0 = np.zeros((C.d_C, C.d_C))
        elif self.init == "block_sdp":
            rec = getattr(partition, "recovery_", partition)
            if not hasattr(rec, "block_duals"):
                raise ValueError("block_sdp init needs a block recovery")
            Y0 = bounds.init_block_sdp_duals(rec.dual_pairs(), C.d_C, C)
        elif self.init == "lambda_max":
            Y0 = bounds.init_block_lambda_max(C, _parts(partition))
        elif self.init == "svd":
            Y0 = bounds.svd_dual(C, _parts(partition)).Y
        elif self.init == "gersgorin":
            Y0 = bounds.gersgorin_dual(C, _parts(partition)).Y
        else:
            raise ValueError(f"unknown init {self.init!r}")
        return bounds.iterative_dual(C, Y0, tol=self.tol, provenance=f"iterative:{self.init}")


class IteratedBlockDualBound(_BoundEstimator):
    """Pairwise-merged block duals from a fitted block recovery."""

    def __init__(self, tol=bounds.FEAS_TOL):
        self.tol = tol

    def _dual(self, C, partition):
        rec = getattr(partition, "recovery_", partition)
        if not hasattr(rec, "block_duals"):
            raise ValueError("iterated block dual needs a block recovery")
        return bounds.iterated_block_dual(C, rec.dual_pairs(), tol=self.tol)
