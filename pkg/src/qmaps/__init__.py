"""Quantum maps, superchannels and process tensors as dense numpy objects.

The package covers the four interconvertible representations of a quantum
map (tomographic, operator-sum, A form, B form/Choi), channel constructions
and Stinespring dilations, the superchannel for initially correlated
system-environment states, multi-time process tensors with the Markov
condition and non-Markovianity measures, and exact simulated tomography for
all of them.
"""

from .linalg import (
    HermEigResult,
    SvdResult,
    herm_eig,
    matrix_function,
    maximally_entangled,
    partial_trace,
    permute_subsystems,
    relative_entropy,
    reshuffle,
    svd,
    tensor_product,
    trace_distance,
    unvec,
    vec,
)
from .maps import (
    AForm,
    BForm,
    OperatorSumRep,
    QuantumMap,
    TomographicRep,
    aform_map,
    apply_map,
    bform_map,
    check_cp,
    check_hp,
    check_tp,
    convert,
    dual_basis,
    gell_mann_basis,
    identity_map,
    kraus_map,
    kraus_rank,
    operator_sum_map,
    same_map,
    state_basis,
    to_aform,
    to_bform,
    to_operator_sum,
    to_tomographic,
    tomographic_map,
)
from .channels import (
    Dilation,
    channel_from_dilation,
    cnot_gate,
    dilation_channel,
    fresh_environment_dilation,
    random_cptp_map,
    random_density_matrix,
    random_unitary,
    standard_channel,
    stinespring_dilate,
)
from .superchannel import (
    ControlOperation,
    Superchannel,
    apply_superchannel,
    build_superchannel,
    identity_operation,
    operation_from_map,
    projection_instrument,
    random_control_operation,
    superchannel_kraus,
)
from .process_tensor import (
    ChiTerm,
    OperationSequence,
    ProcessTensor,
    ResourceLimitError,
    aform,
    apply_process_tensor,
    bform,
    build_process_tensor,
    chi_decomposition,
    initial_state,
    is_markov,
    markov_product,
    non_markovianity,
    step_map,
    surprise,
)
from .tomography import (
    OperationBasis,
    TomographyRecord,
    ancilla_assisted,
    correlated_cnot_dilation,
    ncp_demo,
    operation_basis,
    reconstruct_map,
    reconstruct_process_tensor,
    simulate_sequence,
)

__version__ = "0.1.0"
