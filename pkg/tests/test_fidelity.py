import numpy as np
import pytest

from caqer.channels import amplitude_damping, compose_encoding, tensor_pow
from caqer.fidelity import (DataMatrix, Ensemble, NumericalIntegrityError, avg_ent_fidelity,
                            build_data_matrix, choi, choi_apply, entanglement_fidelity_kraus,
                            partial_trace_constraint, recovery_choi)
from caqer.opalg import haar_isometry
from caqer.recovery import standard_qec_recovery


def random_recovery(rng, d_S, d_C, count):
    """Kraus elements H_C -> H_S of a random CPTP map."""
    V = haar_isometry(d_S * count, d_C, rng)
    return [V[i * d_S:(i + 1) * d_S] for i in range(count)]


def test_trace_of_data_matrix_is_purity(C_amp):
    assert np.isclose(np.trace(C_amp.C).real, 0.5)


def test_fidelity_matches_direct_composition(rng, five, C_amp):
    # oracle: compose recovery, channel and encoding and evaluate sum |tr(rho A)|^2
    enc = compose_encoding(tensor_pow(amplitude_damping(0.1), 5), five.U_C)
    ens = Ensemble.maximally_mixed(2)
    R = random_recovery(rng, 2, 32, 16)
    direct = entanglement_fidelity_kraus(ens, [Rk @ E for Rk in R for E in enc.elements])
    assert np.isclose(avg_ent_fidelity(recovery_choi(R), C_amp), direct, atol=1e-12)


def test_fidelity_nonuniform_ensemble(rng):
    d_S, d_C = 2, 4
    U = haar_isometry(d_C, d_S, rng)
    ch = compose_encoding(tensor_pow(amplitude_damping(0.3), 2), U)
    psi = np.array([np.cos(0.3), np.sin(0.3)])
    ens = Ensemble((np.outer(psi, psi), np.eye(2) / 2), (0.25, 0.75))
    C = build_data_matrix(ens, ch)
    R = random_recovery(rng, d_S, d_C, 2)
    direct = entanglement_fidelity_kraus(ens, [Rk @ E for Rk in R for E in ch.elements])
    assert np.isclose(avg_ent_fidelity(recovery_choi(R), C), direct, atol=1e-12)


def test_recovery_choi_constraint(rng):
    R = random_recovery(rng, 2, 8, 4)
    X = recovery_choi(R)
    np.testing.assert_allclose(partial_trace_constraint(X, 2, 8), np.eye(8), atol=1e-12)


def test_choi_apply_matches_kraus():
    ch = amplitude_damping(0.4)
    rho = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    out = sum(A @ rho @ A.conj().T for A in ch.elements)
    np.testing.assert_allclose(choi_apply(choi(ch), rho, (2, 2)), out, atol=1e-12)


def test_structured_and_choi_agree(five, C_amp):
    rec = standard_qec_recovery(five)
    assert np.isclose(avg_ent_fidelity(rec, C_amp), avg_ent_fidelity(rec.choi(), C_amp))


def test_restrict_matches_embedding(rng, C_amp):
    Q = haar_isometry(32, 5, rng)
    V = np.kron(np.eye(2), Q.conj())
    np.testing.assert_allclose(C_amp.restrict(Q).C, V.conj().T @ C_amp.C @ V, atol=1e-12)


def test_data_matrix_validation():
    with pytest.raises(ValueError):
        DataMatrix(np.zeros((4, 5)), 2, 2)
    with pytest.raises(ValueError):
        DataMatrix(np.array([[0, 1], [0, 0]]), 1, 2)
    with pytest.raises(ValueError):
        Ensemble((np.eye(2),), (1.0,))


def test_out_of_range_fidelity_raises(C_amp):
    with pytest.raises(NumericalIntegrityError):
        avg_ent_fidelity(3 * np.eye(64), C_amp)
