"""One-step processes: maps from preparations to output states.

A superchannel absorbs the initial system-environment state and the joint
unitary into a single CP object acting linearly on control operations, so it
stays well-defined when the system starts out correlated with its
environment. It is stored as the k=1 process tensor, a Choi state on the
three legs (out, op-out, op-in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, maps
from .channels import Dilation
from .linalg import dagger, vec
from .maps import QuantumMap
from .process_tensor import ProcessTensor, apply_process_tensor, build_process_tensor

DEFAULT_TOL = 1e-9

TRACE_CLASSES = ("tp", "tni")


@dataclass(frozen=True)
class ControlOperation:
    """A CP, trace non-increasing operation stored as its B form."""

    bform: np.ndarray
    trace_class: str = "tni"

    def __post_init__(self):
        b = linalg.as_matrix(self.bform)
        d2 = b.shape[0]
        d = round(np.sqrt(d2))
        if b.shape != (d2, d2) or d * d != d2:
            raise ValueError(f"operation B form must be square over d^2, got {b.shape}")
        if self.trace_class not in TRACE_CLASSES:
            raise ValueError(f"trace_class must be one of {TRACE_CLASSES}")
        w, _ = linalg.herm_eig((b + dagger(b)) / 2.0)
        if not linalg.is_hermitian(b, DEFAULT_TOL) or w[-1] < -DEFAULT_TOL:
            raise ValueError(f"operation is not CP (min Choi eigenvalue {w[-1]:.3e})")
        gap = np.eye(d, dtype=complex) - linalg.partial_trace(b, [d, d], [1])
        wg, _ = linalg.herm_eig(gap)
        if wg[-1] < -DEFAULT_TOL:
            raise ValueError("operation increases trace (tr_out of the B form exceeds 1)")
        if self.trace_class == "tp" and linalg.frobenius(gap) > DEFAULT_TOL:
            raise ValueError("operation declared trace preserving is not")

    @property
    def d(self) -> int:
        return round(np.sqrt(self.bform.shape[0]))


def operation_from_map(m: QuantumMap, trace_class: str | None = None) -> ControlOperation:
    if m.d_in != m.d_out:
        raise ValueError("control operations act on a single system")
    b = maps.to_bform(m).matrix
    if trace_class is None:
        trace_class = "tp" if maps.check_tp(m)[0] else "tni"
    return ControlOperation(b, trace_class)


def identity_operation(d: int) -> ControlOperation:
    return ControlOperation(linalg.maximally_entangled(d), "tp")


def projection_instrument(ket: np.ndarray) -> ControlOperation:
    """Post-selected projective preparation |psi><psi| . |psi><psi|."""
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    ket = ket / np.linalg.norm(ket)
    proj = np.outer(ket, ket.conj())
    return ControlOperation(np.outer(vec(proj), vec(proj).conj()), "tni")


def random_control_operation(d: int, rng: np.random.Generator, trace_class: str = "tni") -> ControlOperation:
    """Random CP operation; for "tni" a random effect caps the success rate."""
    from .channels import random_cptp_map

    m = random_cptp_map(d, rng)
    if trace_class == "tp":
        return operation_from_map(m, "tp")
    kraus = maps.to_operator_sum(m).left_ops
    effect = random_effect(d, rng)
    root = linalg.sqrtm_psd(effect)
    scaled = maps.kraus_map([k @ root for k in kraus])
    return operation_from_map(scaled, "tni")


def random_effect(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + dagger(g)) / 2.0
    w, v = linalg.herm_eig(h)
    w = (w - w[-1]) / max(w[0] - w[-1], 1e-12)
    return (v * w) @ dagger(v)


@dataclass(frozen=True)
class Superchannel:
    tensor: ProcessTensor

    def __post_init__(self):
        if self.tensor.k != 1:
            raise ValueError("a superchannel is a one-step process tensor")

    @property
    def d_s(self) -> int:
        return self.tensor.d_s

    @property
    def choi(self) -> np.ndarray:
        return self.tensor.choi


def build_superchannel(dilation: Dilation) -> Superchannel:
    """Superchannel rho' = tr_e[U (A (x) 1_e)[rho0_se] U^dag] of a one-step dilation."""
    if dilation.steps != 1:
        raise ValueError(f"superchannel dilations carry exactly one unitary, got {dilation.steps}")
    return Superchannel(build_process_tensor(dilation))


def apply_superchannel(sc: Superchannel, op: ControlOperation | np.ndarray) -> np.ndarray:
    """Output state for one control operation; its trace is the success probability."""
    return apply_process_tensor(sc.tensor, [op])


def superchannel_kraus(dilation: Dilation) -> list[np.ndarray]:
    """Kraus operators mu_(eps,x) acting on operation B forms.

    mu_(eps,x) = sqrt(lambda_x) <eps| U (x)_s |Psi_x>^(T_s), built from the
    eigenpairs of the initial state; environment rows are contracted as
    ordinary matrix products, system legs stay open, with the |Psi_x> system
    index transposed onto the operation's input leg.
    """
    if dilation.steps != 1:
        raise ValueError("the Kraus construction applies to one-step dilations")
    d_s, d_e = dilation.d_s, dilation.d_e
    w, v = linalg.herm_eig(dilation.initial_se)
    blocks = linalg.as_matrix(dilation.unitaries[0]).reshape(d_s, d_e, d_s, d_e)
    out = []
    for x in range(len(w)):
        if w[x] < 1e-12:
            continue
        psi = v[:, x].reshape(d_s, d_e)
        for eps in range(d_e):
            # mu[t, (r, s)] = sqrt(w) * sum_e U[(t,eps),(r,e)] Psi[s,e]
            mu = np.sqrt(w[x]) * np.einsum("tre,se->trs", blocks[:, eps, :, :], psi)
            out.append(mu.reshape(d_s, d_s * d_s))
    return out
