"""Simulated tomography experiments and reconstruction.

Everything here is exact, density-matrix-level simulation: no sampling noise,
so a non-CP reconstruction verdict is attributable to initial correlations
rather than statistics. Preparations that involve measurement are kept
subnormalised, with the trace of an output recording its success probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from . import linalg, maps
from .channels import Dilation, cnot_gate
from .linalg import dagger, partial_trace, permute_subsystems, vec
from .maps import QuantumMap, apply_map, dual_basis, state_basis
from .process_tensor import ProcessTensor, _check_scale
from .superchannel import (
    ControlOperation,
    apply_superchannel,
    build_superchannel,
    projection_instrument,
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class TomographyRecord:
    prepared: str
    output_state: np.ndarray
    success_probability: float


@dataclass(frozen=True)
class OperationBasis:
    """d^4 linearly independent operations with duals on the doubled space."""

    elements: tuple[ControlOperation, ...]
    duals: tuple[np.ndarray, ...]
    labels: tuple[str, ...]


def operation_basis(d: int, states: Sequence[np.ndarray] | None = None) -> OperationBasis:
    """Measure-and-prepare basis A_ij[rho] = s_j tr(s_i rho) over a state basis.

    The B forms are the rank-one products s_j (x) s_i^T, which are CP and
    trace non-increasing for any pure-projector state basis.
    """
    states = state_basis(d) if states is None else [linalg.as_matrix(s) for s in states]
    elements = []
    labels = []
    for i, meas in enumerate(states):
        for j, prep in enumerate(states):
            elements.append(ControlOperation(np.kron(prep, meas.T), "tni"))
            labels.append(f"A[{i},{j}]")
    duals = dual_basis([op.bform for op in elements])
    return OperationBasis(tuple(elements), tuple(duals), tuple(labels))


def _op_kraus(op) -> list[np.ndarray]:
    if isinstance(op, QuantumMap):
        op = maps.to_bform(op).matrix
    b = linalg.as_matrix(getattr(op, "bform", op))
    d = round(np.sqrt(b.shape[0]))
    w, v = linalg.herm_eig(b)
    if w[-1] < -DEFAULT_TOL:
        raise ValueError("operations must be CP to be simulated")
    return [
        np.sqrt(lam) * linalg.unvec(v[:, idx], d)
        for idx, lam in enumerate(w)
        if lam > 1e-12
    ]


def simulate_sequence(dilation: Dilation, seq, label: str | None = None) -> TomographyRecord:
    """Exact propagation of one product operation sequence through a dilation.

    Alternates system-side operations with the joint unitaries and traces the
    environment; the output trace is the sequence's success probability.
    """
    if getattr(seq, "joint", None) is not None:
        raise ValueError("stepwise simulation is defined for product sequences only")
    ops = list(seq.ops) if getattr(seq, "ops", None) is not None else list(seq)
    if len(ops) != dilation.steps:
        raise ValueError(f"sequence length {len(ops)} does not match {dilation.steps} steps")
    d_s, d_e = dilation.d_s, dilation.d_e
    eye_e = np.eye(d_e, dtype=complex)
    rho = linalg.as_matrix(dilation.initial_se).copy()
    for u, op in zip(dilation.unitaries, ops):
        stepped = np.zeros_like(rho)
        for k in _op_kraus(op):
            big = np.kron(k, eye_e)
            stepped += big @ rho @ dagger(big)
        rho = u @ stepped @ dagger(u)
    out = partial_trace(rho, [d_s, d_e], [0])
    return TomographyRecord(label or "", out, float(np.real(np.trace(out))))


def reconstruct_map(
    records: Sequence[TomographyRecord], basis: Sequence[np.ndarray]
) -> QuantumMap:
    """Tomographic map from one output record per basis input state."""
    if len(records) != len(basis):
        raise ValueError(f"need one record per basis element, got {len(records)} for {len(basis)}")
    return maps.tomographic_map(basis, [r.output_state for r in records])


def ancilla_assisted(dilation: Dilation) -> QuantumMap:
    """Choi recovery by sending half of a maximally entangled pair through.

    Only meaningful for a single-step, uncorrelated dilation, where the
    dynamics is a channel; the recovered state times d is its B form.
    """
    if dilation.steps != 1:
        raise ValueError("ancilla-assisted tomography probes a single step")
    if not dilation.is_product_state():
        raise ValueError(
            "ancilla-assisted tomography presumes channel form; "
            "the initial state is correlated with the environment"
        )
    d_s, d_e = dilation.d_s, dilation.d_e
    tau_e = partial_trace(dilation.initial_se, [d_s, d_e], [1])
    pair = linalg.maximally_entangled(d_s, normalized=True)
    rho = np.kron(pair, tau_e)  # (s, a, e)
    u = permute_subsystems(
        np.kron(dilation.unitaries[0], np.eye(d_s, dtype=complex)), [d_s, d_e, d_s], [0, 2, 1]
    )
    rho = u @ rho @ dagger(u)
    choi = partial_trace(rho, [d_s, d_s, d_e], [0, 1]) * d_s
    return maps.bform_map(choi, d_s, d_s)


def reconstruct_process_tensor(dilation: Dilation, basis: OperationBasis | None = None) -> ProcessTensor:
    """Process tensor from all d^4k basis sequences of control operations.

    Runs every sequence through the stepwise simulator and assembles the Choi
    state as sum of output (x) conjugated dual sequences.
    """
    d_s, k = dilation.d_s, dilation.steps
    _check_scale(d_s, k)
    if basis is None:
        basis = operation_basis(d_s)
    n = len(basis.elements)
    dim = d_s ** (2 * k + 1)
    choi = np.zeros((dim, dim), dtype=complex)
    kraus_cache = [_op_kraus(op) for op in basis.elements]
    eye_e = np.eye(dilation.d_e, dtype=complex)
    for combo in iter_product(range(n), repeat=k):
        # combo lists step indices (i_0, ..., i_{k-1})
        rho = linalg.as_matrix(dilation.initial_se).copy()
        for u, idx in zip(dilation.unitaries, combo):
            stepped = np.zeros_like(rho)
            for kr in kraus_cache[idx]:
                big = np.kron(kr, eye_e)
                stepped += big @ rho @ dagger(big)
            rho = u @ stepped @ dagger(u)
        out = partial_trace(rho, [d_s, dilation.d_e], [0])
        dual_seq = linalg.kron_all([basis.duals[idx] for idx in reversed(combo)])
        choi += np.kron(out, dual_seq.conj())
    return ProcessTensor(k, d_s, choi)


# ------------------------------------------------------------- NCP demonstration

_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
    "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2),
    "y+": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2),
    "y-": np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2),
}

# measurement basis and correcting unitary per preparation target, for the
# deterministic measure-then-rotate protocol
_ROTATE_PROTOCOL = {
    "0": ("0", "1", np.array([[0, 1], [1, 0]], dtype=complex)),
    "1": ("1", "0", np.array([[0, 1], [1, 0]], dtype=complex)),
    "+": ("+", "-", np.diag([1.0, -1.0]).astype(complex)),
    "-": ("-", "+", np.diag([1.0, -1.0]).astype(complex)),
    "y+": ("y+", "y-", np.diag([1.0, -1.0]).astype(complex)),
}


def correlated_cnot_dilation(mu: complex = 1.0, nu: complex = 1.0) -> Dilation:
    """The two-qubit circuit with |psi> = (mu|00> + nu|11>)/sqrt2 and a CNOT.

    The environment qubit controls and the system qubit is the target; this
    is the orientation under which preparing |1> yields |0> at the output.
    """
    if abs(abs(mu) ** 2 + abs(nu) ** 2 - 2.0) > 1e-12:
        raise ValueError("normalisation requires |mu|^2 + |nu|^2 = 2")
    psi = np.zeros(4, dtype=complex)
    psi[0] = mu / np.sqrt(2)
    psi[3] = nu / np.sqrt(2)
    return Dilation(2, 2, np.outer(psi, psi.conj()), (cnot_gate(control_first=False),))


def _prepare_operation(target: str, protocol: str) -> ControlOperation:
    if protocol == "projective":
        return projection_instrument(_KETS[target])
    keep, flip, correction = _ROTATE_PROTOCOL[target]
    pk = np.outer(_KETS[keep], _KETS[keep].conj())
    pf = np.outer(_KETS[flip], _KETS[flip].conj())
    b = np.outer(vec(pk), vec(pk).conj()) + np.outer(vec(correction @ pf), vec(correction @ pf).conj())
    return ControlOperation(b, "tp")


def ncp_demo(mu: complex = 1.0, nu: complex = 1.0, preparation: str = "projective") -> dict:
    """Tomography over correlated preparations: the paper-level failure mode.

    Simulates projective (or measure-then-rotate) preparations of the basis
    states through the correlated CNOT circuit, reconstructs the linear map
    from the four preparations, and contrasts its non-positive prediction for
    the minus state with the well-behaved superchannel of the same process.
    """
    if preparation not in ("projective", "rotate"):
        raise ValueError("preparation must be 'projective' or 'rotate'")
    dilation = correlated_cnot_dilation(mu, nu)
    sc = build_superchannel(dilation)

    targets = ["0", "1", "+", "y+"]
    records = []
    outputs = {}
    for t in targets + ["-"]:
        op = _prepare_operation(t, preparation)
        raw = apply_superchannel(sc, op)
        prob = float(np.real(np.trace(raw)))
        out = raw / prob if prob > 1e-12 else raw
        outputs[t] = out
        records.append(TomographyRecord(t, raw, prob))

    basis = [np.outer(_KETS[t], _KETS[t].conj()) for t in targets]
    reconstruction = maps.tomographic_map(basis, [outputs[t] for t in targets])
    pi_minus = np.outer(_KETS["-"], _KETS["-"].conj())
    predicted = apply_map(reconstruction, pi_minus)
    w_pred, _ = linalg.herm_eig(predicted)
    cp, min_choi = maps.check_cp(reconstruction)

    w_sc, _ = linalg.herm_eig(sc.choi)
    sc_minus = apply_superchannel(sc, projection_instrument(_KETS["-"]))

    rho_se = dilation.initial_se
    cond_env = {}
    for outcome, ket in (("0", _KETS["0"]), ("1", _KETS["1"])):
        proj = np.kron(np.outer(ket, ket.conj()), np.eye(2, dtype=complex))
        post = proj @ rho_se @ proj
        p = float(np.real(np.trace(post)))
        cond_env[outcome] = partial_trace(post, [2, 2], [1]) / p if p > 1e-12 else np.zeros((2, 2))

    return {
        "scenario": "correlated-preparation tomography (CNOT circuit)",
        "mu": mu,
        "nu": nu,
        "preparation": preparation,
        "cnot_orientation": "environment controls, system is the target",
        "records": records,
        "true_outputs": {t: outputs[t] for t in targets + ["-"]},
        "reconstruction": reconstruction,
        "predicted_pi_minus": predicted,
        "predicted_pi_minus_min_eig": float(w_pred[-1]),
        "verdicts": {
            "cp": bool(cp),
            "hp": bool(maps.check_hp(reconstruction)),
            "min_choi_eig": float(min_choi),
            "superchannel_cp": bool(w_sc[-1] >= -DEFAULT_TOL),
            "superchannel_min_eig": float(w_sc[-1]),
        },
        "superchannel_pi_minus_output": sc_minus,
        "conditional_env_states": cond_env,
    }
