import numpy as np
import pytest

from caqer.channels import amplitude_damping, compose_encoding, tensor_pow
from caqer.codes import five_qubit_code
from caqer.fidelity import Ensemble, build_data_matrix


def data_matrix(code, single):
    ens = Ensemble.maximally_mixed(code.d_S)
    return build_data_matrix(ens, compose_encoding(tensor_pow(single, code.n), code.U_C))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def five():
    return five_qubit_code()


@pytest.fixture(scope="session")
def C_amp(five):
    """Five-qubit code under amplitude damping with gamma = 0.1."""
    return data_matrix(five, amplitude_damping(0.1))


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
