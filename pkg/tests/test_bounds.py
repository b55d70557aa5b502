import numpy as np
import pytest

from caqer.bounds import (as_partition, check_feasible, gersgorin_dual, init_block_lambda_max,
                          init_block_sdp_duals, iterated_block_dual, iterative_dual,
                          pauli_certificate, svd_dual)
from caqer.channels import depolarizing, depolarizing_spec
from caqer.recovery import block_eig_qer, eig_qer, optimal_recovery

from conftest import data_matrix


@pytest.fixture(scope="module")
def fitted(C_amp):
    return {"eig": eig_qer(C_amp), "block": block_eig_qer(C_amp, 2),
            "opt": optimal_recovery(C_amp).value}


def test_gersgorin_always_feasible(C_amp, fitted):
    d = gersgorin_dual(C_amp, fitted["eig"].partition())
    assert d.feasible
    assert d.bound >= fitted["opt"] - 1e-7
    assert np.isclose(np.trace(d.Y).real, d.bound)


def test_feasibility_margin_is_lambda_min(C_amp, fitted):
    d = gersgorin_dual(C_amp, fitted["eig"].partition())
    S = np.kron(np.eye(2), d.Y) - C_amp.C
    assert np.isclose(check_feasible(d.Y, C_amp), np.linalg.eigvalsh(S)[0], atol=1e-10)


def test_svd_dual_weakly_tighter(C_amp, fitted):
    part = fitted["eig"].partition()
    assert svd_dual(C_amp, part).bound <= gersgorin_dual(C_amp, part).bound + 1e-12


def test_iterative_dual_feasible_and_monotone(C_amp, fitted):
    Y0 = init_block_lambda_max(C_amp, fitted["eig"].partition())
    d = iterative_dual(C_amp, Y0)
    assert d.feasible
    assert d.bound >= fitted["opt"] - 1e-7
    traces = [h[0] for h in d.history]
    assert np.all(np.diff(traces) >= -1e-12)


def test_block_sdp_init_is_tight(C_amp, fitted):
    rec = fitted["block"]
    Y0 = init_block_sdp_duals(rec.dual_pairs(), 32, C_amp)
    d = iterative_dual(C_amp, Y0)
    assert d.feasible
    assert fitted["opt"] - 1e-7 <= d.bound <= fitted["opt"] + 2e-3


def test_iterated_block_dual(C_amp, fitted):
    d = iterated_block_dual(C_amp, fitted["block"].dual_pairs())
    assert d.feasible
    assert d.bound >= fitted["opt"] - 1e-7


def test_pauli_certificate_zero_gap(five):
    p = 0.05
    C = data_matrix(five, depolarizing(p))
    rec, point, value = pauli_certificate(five, depolarizing_spec(p, 5), C)
    assert point.feasible
    assert abs(point.bound - value) < 1e-12
    assert abs(rec.fidelity_on(C) - value) < 1e-12


def test_as_partition_validates():
    Q = np.eye(4)[:, :2]
    with pytest.raises(ValueError):
        as_partition([Q], 4)
    parts = as_partition([Q, np.eye(4)[:, 2:]], 4)
    assert [p.shape[1] for p in parts] == [2, 2]
    with pytest.raises(ValueError):
        as_partition([Q, Q], 4)
