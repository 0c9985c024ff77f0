"""Standard channels, system-environment dilations and Stinespring constructions.

A ``Dilation`` is the generative model used everywhere in this package: an
initial system-environment state on H_s (x) H_e plus one joint unitary per
time step. Joint indices are ordered system first, environment second.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg, maps
from .linalg import dagger, partial_trace
from .maps import QuantumMap, kraus_map

DEFAULT_TOL = 1e-9

STANDARD_CHANNEL_KINDS = (
    "unitary",
    "depolarizing",
    "amplitude_damping",
    "bit_flip",
    "phase_flip",
    "measure_prepare",
)


@dataclass(frozen=True)
class Dilation:
    d_s: int
    d_e: int
    initial_se: np.ndarray
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        d = self.d_s * self.d_e
        state = linalg.as_matrix(self.initial_se)
        if state.shape != (d, d):
            raise ValueError(f"initial state must be {d}x{d}, got {state.shape}")
        if abs(np.trace(state) - 1.0) > DEFAULT_TOL:
            raise ValueError(f"initial state trace {np.trace(state):.6f} is not 1")
        w, _ = linalg.herm_eig(state)
        if w[-1] < -DEFAULT_TOL:
            raise ValueError(f"initial state has negative eigenvalue {w[-1]:.3e}")
        if not self.unitaries:
            raise ValueError("a dilation needs at least one step unitary")
        for u in self.unitaries:
            u = linalg.as_matrix(u)
            if u.shape != (d, d):
                raise ValueError(f"step unitaries must be {d}x{d}, got {u.shape}")
            if linalg.frobenius(dagger(u) @ u - np.eye(d)) > DEFAULT_TOL:
                raise ValueError("step matrix is not unitary within 1e-9")

    @property
    def steps(self) -> int:
        return len(self.unitaries)

    def initial_system_state(self) -> np.ndarray:
        return partial_trace(self.initial_se, [self.d_s, self.d_e], [0])

    def is_product_state(self, tol: float = DEFAULT_TOL) -> bool:
        rho_s = partial_trace(self.initial_se, [self.d_s, self.d_e], [0])
        tau_e = partial_trace(self.initial_se, [self.d_s, self.d_e], [1])
        return linalg.frobenius(self.initial_se - np.kron(rho_s, tau_e)) <= tol


def channel_from_dilation(tau_e: np.ndarray, u: np.ndarray) -> QuantumMap:
    """The CPTP map rho -> tr_e[U (rho (x) tau_e) U^dag] in Kraus form.

    Kraus operators K_(eps,x) = sqrt(lambda_x) <eps| U |phi_x> over an
    environment output basis eps and the eigenvectors of tau_e.
    """
    tau_e = linalg.as_matrix(tau_e)
    u = linalg.as_matrix(u)
    d_e = tau_e.shape[0]
    if u.shape[0] % d_e != 0 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary of shape {u.shape} does not factor over d_e={d_e}")
    d_s = u.shape[0] // d_e
    if linalg.frobenius(dagger(u) @ u - np.eye(d_s * d_e)) > DEFAULT_TOL:
        raise ValueError("dilation matrix is not unitary within 1e-9")
    w, v = linalg.herm_eig(tau_e)
    if w[-1] < -DEFAULT_TOL or abs(np.sum(w) - 1.0) > DEFAULT_TOL:
        raise ValueError("environment state must be a density operator")
    blocks = u.reshape(d_s, d_e, d_s, d_e)
    kraus = []
    for x in range(d_e):
        if w[x] <= 1e-12:
            continue
        phi = v[:, x]
        for eps in range(d_e):
            kraus.append(np.sqrt(w[x]) * blocks[:, eps, :, :] @ phi)
    return kraus_map(kraus)


def stinespring_dilate(m: QuantumMap, tol: float = DEFAULT_TOL) -> Dilation:
    """Single-step dilation of a CPTP map with a pure |0><0| environment.

    The isometry V = sum_a K_a (x) |a>_e is completed to a unitary by
    Gram-Schmidt over the standard basis in index order; the environment
    dimension is the Kraus rank, floored at 2.
    """
    if m.d_in != m.d_out:
        raise ValueError("stinespring_dilate needs d_in == d_out")
    tp, residual = maps.check_tp(m, tol)
    if not tp:
        raise ValueError(f"map is not trace preserving (residual {residual:.3e})")
    cp, min_eig = maps.check_cp(m, tol)
    if not cp:
        raise ValueError(f"map is not CP (min Choi eigenvalue {min_eig:.3e})")
    d = m.d_in
    rep = maps.to_operator_sum(m)
    kraus = rep.left_ops
    d_e = max(len(kraus), 2)
    iso = np.zeros((d * d_e, d), dtype=complex)
    for a, k in enumerate(kraus):
        for so in range(d):
            iso[so * d_e + a, :] += k[so, :]
    cols = [iso[:, i] for i in range(d)]
    basis = linalg._complete_orthonormal(cols, d * d_e)
    u = np.zeros((d * d_e, d * d_e), dtype=complex)
    extra = iter(basis[d:])
    for si in range(d):
        for ei in range(d_e):
            u[:, si * d_e + ei] = iso[:, si] if ei == 0 else next(extra)
    tau = np.zeros((d_e, d_e), dtype=complex)
    tau[0, 0] = 1.0
    rho_s = np.eye(d, dtype=complex) / d
    return Dilation(d, d_e, np.kron(rho_s, tau), (u,))


def dilation_channel(dilation: Dilation, step: int = 0) -> QuantumMap:
    """Channel generated by one step of a product-state dilation."""
    if not dilation.is_product_state():
        raise ValueError("a single-step channel needs an uncorrelated initial state")
    tau_e = partial_trace(dilation.initial_se, [dilation.d_s, dilation.d_e], [1])
    return channel_from_dilation(tau_e, dilation.unitaries[step])


# ------------------------------------------------------------- constructors

def cnot_gate(control_first: bool = True) -> np.ndarray:
    """CNOT on two qubits; flips the second index unless control_first is False."""
    u = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            if control_first:
                u[a * 2 + (b ^ a), a * 2 + b] = 1.0
            else:
                u[(a ^ b) * 2 + b, a * 2 + b] = 1.0
    return u


def standard_channel(kind: str, **params) -> QuantumMap:
    """Constructor for the channels used throughout the tests and demos.

    Kinds: unitary (u=...), depolarizing (p=..., d=2), amplitude_damping
    (gamma=...), bit_flip (p=...), phase_flip (p=...), measure_prepare
    (states=[...], projectors=optional basis).
    """
    if kind == "unitary":
        u = linalg.as_matrix(params["u"])
        if linalg.frobenius(dagger(u) @ u - np.eye(u.shape[0])) > DEFAULT_TOL:
            raise ValueError("unitary channel needs a unitary matrix")
        return kraus_map([u])
    if kind == "depolarizing":
        p = float(params["p"])
        d = int(params.get("d", 2))
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing probability {p} outside [0, 1]")
        choi = (1.0 - p) * linalg.maximally_entangled(d) + p * np.eye(d * d, dtype=complex) / d
        return kraus_map(maps.to_operator_sum(maps.bform_map(choi, d, d)).left_ops)
    if kind == "amplitude_damping":
        gamma = float(params["gamma"])
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"damping rate {gamma} outside [0, 1]")
        k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
        k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
        return kraus_map([k0, k1])
    if kind in ("bit_flip", "phase_flip"):
        p = float(params["p"])
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"flip probability {p} outside [0, 1]")
        pauli = np.array([[0, 1], [1, 0]], dtype=complex) if kind == "bit_flip" else np.diag([1.0, -1.0]).astype(complex)
        return kraus_map([np.sqrt(1.0 - p) * np.eye(2, dtype=complex), np.sqrt(p) * pauli])
    if kind == "measure_prepare":
        states = [linalg.as_matrix(s) for s in params["states"]]
        d = states[0].shape[0]
        projectors = params.get("projectors")
        if projectors is None:
            projectors = [np.diag([1.0 if i == j else 0.0 for i in range(d)]).astype(complex) for j in range(d)]
        if len(projectors) != len(states):
            raise ValueError("need one prepared state per measurement operator")
        kraus = []
        for proj, sigma in zip(projectors, states):
            wp, vp = linalg.herm_eig(linalg.as_matrix(proj))
            ws, vs = linalg.herm_eig(sigma)
            for i in range(len(wp)):
                if wp[i] <= 1e-12:
                    continue
                for j in range(len(ws)):
                    if ws[j] <= 1e-12:
                        continue
                    kraus.append(
                        np.sqrt(wp[i] * ws[j]) * np.outer(vs[:, j], vp[:, i].conj())
                    )
        return kraus_map(kraus)
    raise ValueError(f"unknown channel kind {kind!r} (expected one of {STANDARD_CHANNEL_KINDS})")


def fresh_environment_dilation(
    unitaries: Sequence[np.ndarray],
    taus: Sequence[np.ndarray],
    rho_s: np.ndarray,
    d_e_step: int,
) -> Dilation:
    """Dilation whose environment is one independent unit per step.

    Step j acts with its own unitary on the system and the j-th environment
    factor only, so the resulting process is Markovian by construction.
    """
    k = len(unitaries)
    if len(taus) != k:
        raise ValueError("need one environment state per step")
    d_s = linalg.as_matrix(rho_s).shape[0]
    d_e = d_e_step**k
    initial = linalg.kron_all([rho_s] + [linalg.as_matrix(t) for t in taus])
    dims = [d_s] + [d_e_step] * k
    big_us = []
    for j, u in enumerate(unitaries):
        u = linalg.as_matrix(u)
        if u.shape != (d_s * d_e_step, d_s * d_e_step):
            raise ValueError("each step unitary acts on the system and one environment unit")
        # embed u on factors (0, j+1)
        full = np.kron(u, np.eye(d_e_step ** (k - 1), dtype=complex))
        perm_dims = [d_s, d_e_step] + [d_e_step] * (k - 1)
        # factors currently ordered (s, e_j, others...); move e_j to slot j+1
        order = list(range(1, k + 1))
        others = [x for x in order if x != j + 1]
        perm = [0, j + 1] + others
        inv = list(np.argsort(perm))
        big_us.append(linalg.permute_subsystems(full, [dims[i] for i in perm], inv))
    return Dilation(d_s, d_e, initial, tuple(big_us))


# ------------------------------------------------------------- random ensembles

def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def random_cptp_map(
    d_in: int, rng: np.random.Generator, d_out: int | None = None, kraus_count: int | None = None
) -> QuantumMap:
    """Random CPTP map: orthonormalised Gaussian Kraus set, TP-normalised.

    The Gaussian draws are orthonormalised as vectors, then the whole set is
    renormalised by the inverse square root of sum K^dag K.
    """
    d_out = d_in if d_out is None else d_out
    r = kraus_count or int(rng.integers(1, d_in * d_out + 1))
    r = min(r, d_in * d_out)
    g = rng.normal(size=(d_out * d_in, r)) + 1j * rng.normal(size=(d_out * d_in, r))
    q, _ = np.linalg.qr(g)
    ops = [q[:, i].reshape(d_out, d_in) for i in range(r)]
    s = sum(dagger(k) @ k for k in ops)
    w, v = linalg.herm_eig(s)
    s_inv_half = (v / np.sqrt(np.maximum(w, 1e-300))) @ dagger(v)
    return kraus_map([k @ s_inv_half for k in ops])
