import numpy as np
import pytest

from caqer.channels import (KrausChannel, amplitude_damping, apply_channel, bit_flip,
                            compose_encoding, depolarizing, pure_state_rotation, tensor_pow)


@pytest.mark.parametrize("ch", [amplitude_damping(0.3), pure_state_rotation(1.0, 0.4),
                                depolarizing(0.2), bit_flip(0.1)])
def test_trace_preserving(ch):
    assert ch.closure_error() < 1e-12


def test_amplitude_damping_action():
    ch = amplitude_damping(0.25)
    out = apply_channel(ch, np.diag([0.0, 1.0]))
    np.testing.assert_allclose(out, np.diag([0.25, 0.75]), atol=1e-14)


def test_pure_state_rotation_maps_states():
    theta, phi = 1.2, 0.3
    ch = pure_state_rotation(theta, phi)
    for sign in (1, -1):
        psi = np.array([np.cos(theta / 2), sign * np.sin(theta / 2)])
        out = apply_channel(ch, np.outer(psi, psi))
        target = np.array([np.cos((theta - phi) / 2), sign * np.sin((theta - phi) / 2)])
        assert np.isclose(target @ out @ target, 1.0)


def test_rejects_non_cptp():
    with pytest.raises(ValueError):
        KrausChannel((np.eye(2) * 1.1,))


def test_tensor_power_lazy_matches_kron():
    ch = amplitude_damping(0.2)
    tp = tensor_pow(ch, 3)
    assert len(tp.elements) == 8
    E = tp.element((1, 0, 1))
    A0, A1 = ch.elements
    np.testing.assert_allclose(E, np.kron(np.kron(A1, A0), A1))
    assert tp.closure_error() < 1e-12


def test_compose_encoding_shapes(five):
    enc = compose_encoding(tensor_pow(amplitude_damping(0.1), 5), five.U_C)
    assert enc.elements[0].shape == (32, 2)
    S = sum(E.conj().T @ E for E in enc.elements)
    np.testing.assert_allclose(S, np.eye(2), atol=1e-12)
