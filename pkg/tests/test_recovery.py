import numpy as np
import pytest

from caqer.channels import amplitude_damping, compose_encoding, depolarizing, tensor_pow
from caqer.fidelity import Ensemble, entanglement_fidelity_kraus, partial_trace_constraint
from caqer.recovery import (block_eig_qer, eig_qer, optimal_recovery, order_qer,
                            order_subspaces, standard_qec_recovery)

from conftest import data_matrix


@pytest.fixture(scope="module")
def optimum(C_amp):
    return optimal_recovery(C_amp).value


def test_standard_qec_corrects_single_paulis(five):
    # a perfect code under single-qubit depolarizing noise: F = (1-p)^5 + 5 p (1-p)^4
    p = 0.05
    C = data_matrix(five, depolarizing(p))
    rec = standard_qec_recovery(five)
    rec.check_invariants()
    assert rec.is_complete
    expected = (1 - p) ** 5 + 5 * p * (1 - p) ** 4
    assert rec.fidelity_on(C) >= expected - 1e-12


def test_qec_fidelity_matches_kraus_composition(five, C_amp):
    rec = standard_qec_recovery(five)
    enc = compose_encoding(tensor_pow(amplitude_damping(0.1), 5), five.U_C)
    direct = entanglement_fidelity_kraus(Ensemble.maximally_mixed(2),
                                         [R @ E for R in rec.elements for E in enc.elements])
    assert np.isclose(rec.fidelity_on(C_amp), direct, atol=1e-12)


def test_eigqer_invariants(C_amp, optimum):
    rec = eig_qer(C_amp, early_stop_contribution=0.0)
    rec.check_invariants()
    assert rec.is_complete
    np.testing.assert_allclose(partial_trace_constraint(rec.choi(), 2, 32), np.eye(32),
                               atol=1e-10)
    assert min(rec.contributions) >= 0
    assert rec.fidelity_on(C_amp) <= optimum + 1e-7
    assert np.isclose(rec.cumulative()[-1], rec.fidelity_on(C_amp))


def test_eigqer_early_stop_keeps_deficit(C_amp):
    rec = eig_qer(C_amp, early_stop_contribution=1e-2)
    assert not rec.is_complete
    parts = rec.partition()
    assert sum(p.shape[1] for p in parts) == 32
    assert rec.contributions[-1] < 1e-2 <= rec.contributions[-2]


def test_block_eig_qer(C_amp, optimum):
    eig = eig_qer(C_amp, early_stop_contribution=0.0).fidelity_on(C_amp)
    for M in (1, 2, 4):
        rec = block_eig_qer(C_amp, M)
        rec.check_invariants()
        f = rec.fidelity_on(C_amp)
        assert eig - 1e-7 <= f <= optimum + 1e-7
        assert np.isclose(f, rec.value, atol=1e-9)
        np.testing.assert_allclose(partial_trace_constraint(rec.choi(), 2, 32), np.eye(32),
                                   atol=1e-7)


def test_order_subspaces_orthonormal(five):
    subs = order_subspaces(five, amplitude_damping(0.1), [1, 2])
    B = np.concatenate(subs, axis=1)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(B.shape[1]), atol=1e-10)
    # no-error plus five single damping events, two logical states each
    assert subs[0].shape[1] == 12


def test_order_qer(five, C_amp, optimum):
    rec = order_qer(five, amplitude_damping(0.1), C_amp, [1])
    rec.check_invariants()
    f = rec.fidelity_on(C_amp)
    assert standard_qec_recovery(five).fidelity_on(C_amp) <= f <= optimum + 1e-7


def test_optimal_matches_qec_on_noiseless(five):
    C = data_matrix(five, amplitude_damping(0.0))
    assert abs(optimal_recovery(C).value - 1.0) < 1e-7
    assert abs(eig_qer(C).fidelity_on(C) - 1.0) < 1e-12
