"""Channel-adapted quantum error recovery and dual performance bounds."""

__version__ = "0.1.0"

from .bounds import (DualPoint, check_feasible, gersgorin_dual, init_block_lambda_max,
                     init_block_sdp_duals, iterated_block_dual, iterative_dual, pauli_certificate,
                     svd_dual)
from .channels import (KrausChannel, PauliChannelSpec, TensorPowerChannel, amplitude_damping,
                       compose_encoding, depolarizing, depolarizing_spec, pure_state_rotation,
                       tensor_pow)
from .codes import (StabilizerCode, five_qubit_code, random_code, shor_code, steane_code,
                    syndrome_decomposition)
from .fidelity import DataMatrix, Ensemble, avg_ent_fidelity, build_data_matrix
from .recovery import (BlockRecovery, StructuredRecovery, block_eig_qer, eig_qer,
                       optimal_recovery, order_qer, standard_qec_recovery)
from .sdp import QerSdpProblem, solve_qer_sdp

__all__ = [
    "DataMatrix", "Ensemble", "avg_ent_fidelity", "build_data_matrix",
    "KrausChannel", "TensorPowerChannel", "PauliChannelSpec", "amplitude_damping",
    "pure_state_rotation", "depolarizing", "depolarizing_spec", "tensor_pow",
    "compose_encoding",
    "StabilizerCode", "five_qubit_code", "steane_code", "shor_code", "random_code",
    "syndrome_decomposition",
    "StructuredRecovery", "BlockRecovery", "eig_qer", "block_eig_qer", "order_qer",
    "standard_qec_recovery", "optimal_recovery",
    "QerSdpProblem", "solve_qer_sdp",
    "DualPoint", "check_feasible", "gersgorin_dual", "svd_dual", "iterative_dual",
    "init_block_lambda_max", "init_block_sdp_duals", "iterated_block_dual", "pauli_certificate",
]
