"""Multi-time processes as Choi states on 2k+1 legs.

Leg ordering is the package-wide contract and every contraction is an index
permutation against it:

    (out_k, in_{k-1}, out_{k-1}, ..., in_0, out_0)

where out_j is what the process emits at time t_j (out_0 being the initial,
pre-preparation state slot) and in_j is what it receives back from the
operation applied at t_j. Each leg has dimension d_s. Adjacent legs group
into "slots": slot j >= 1 is the pair (out_j, in_{j-1}) carrying the step-j
marginal channel, slot 0 is the single leg out_0 carrying the initial state.

A trace-preserving process built from a unit-trace dilation has
tr(choi) = d_s^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from . import linalg
from .channels import Dilation
from .linalg import dagger, partial_trace, permute_subsystems
from .maps import BForm, QuantumMap

DEFAULT_TOL = 1e-9

# Largest Choi dimension attempted: d_s^(2k+1) up to 2^7 for qubit processes.
MAX_CHOI_DIM = 128

DISTANCES = ("trace", "relative_entropy")


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds the supported desk-scale bounds."""


def _check_scale(d_s: int, k: int) -> None:
    dim = d_s ** (2 * k + 1)
    if dim > MAX_CHOI_DIM:
        raise ResourceLimitError(
            f"process tensor with k={k}, d_s={d_s} needs a {dim}-dimensional Choi state "
            f"(limit {MAX_CHOI_DIM})"
        )


@dataclass(frozen=True)
class ProcessTensor:
    k: int
    d_s: int
    choi: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("a process tensor needs at least one step")
        _check_scale(self.d_s, self.k)
        dim = self.d_s ** (2 * self.k + 1)
        m = linalg.as_matrix(self.choi)
        if m.shape != (dim, dim):
            raise ValueError(f"Choi state must be {dim}x{dim}, got {m.shape}")
        if not linalg.is_hermitian(m, DEFAULT_TOL):
            raise ValueError("Choi state is not Hermitian within 1e-9")

    @property
    def leg_dims(self) -> list[int]:
        return [self.d_s] * (2 * self.k + 1)

    @property
    def leg_order(self) -> str:
        names = [f"out_{self.k}"]
        for j in range(self.k - 1, -1, -1):
            names += [f"in_{j}", f"out_{j}"]
        return ",".join(names)

    def slot_legs(self, j: int) -> list[int]:
        """Leg positions of slot j: (out_j, in_{j-1}) for j >= 1, (out_0,) for j = 0."""
        if j < 0 or j > self.k:
            raise ValueError(f"slot {j} out of range for a {self.k}-step process")
        if j == 0:
            return [2 * self.k]
        return [2 * (self.k - j), 2 * (self.k - j) + 1]


@dataclass(frozen=True)
class OperationSequence:
    """Either one B form per step or a single joint B form on 2k legs."""

    ops: tuple[np.ndarray, ...] | None = None
    joint: np.ndarray | None = None

    def __post_init__(self):
        if (self.ops is None) == (self.joint is None):
            raise ValueError("provide exactly one of per-step ops or a joint B form")

    @property
    def steps(self) -> int | None:
        return len(self.ops) if self.ops is not None else None


def _op_bform(op) -> np.ndarray:
    if isinstance(op, QuantumMap):
        from . import maps

        return maps.to_bform(op).matrix
    return linalg.as_matrix(getattr(op, "bform", op))


def sequence_joint_bform(seq, k: int, d_s: int) -> np.ndarray:
    """Joint B form on legs (in_{k-1}, out_{k-1}, ..., in_0, out_0).

    Accepts an OperationSequence, a list of per-step operations (objects with
    a ``bform`` attribute or plain matrices), or an already-joint matrix.
    """
    dim = d_s ** (2 * k)
    if isinstance(seq, OperationSequence):
        if seq.joint is not None:
            joint = linalg.as_matrix(seq.joint)
            if joint.shape != (dim, dim):
                raise ValueError(f"joint sequence must be {dim}x{dim}, got {joint.shape}")
            return joint
        seq = seq.ops
    if isinstance(seq, np.ndarray) and seq.shape == (dim, dim):
        return linalg.as_matrix(seq)
    ops = [_op_bform(op) for op in seq]
    if len(ops) != k:
        raise ValueError(f"sequence has {len(ops)} operations, process has {k} steps")
    for b in ops:
        if b.shape != (d_s * d_s, d_s * d_s):
            raise ValueError(f"operation B forms must be {d_s**2}x{d_s**2}, got {b.shape}")
    return linalg.kron_all(ops[::-1])


# ------------------------------------------------------------- construction

def build_process_tensor(dilation: Dilation) -> ProcessTensor:
    """Choi state of the dilated dynamics via entangled-pair insertion.

    At each step a fresh unnormalised pair |I><I| is attached, its first half
    is swapped with the system, and the step unitary is applied; tracing the
    environment leaves the (2k+1)-leg Choi state.
    """
    d_s, d_e, k = dilation.d_s, dilation.d_e, dilation.steps
    _check_scale(d_s, k)
    rho = linalg.as_matrix(dilation.initial_se).copy()
    dims = [d_s, d_e]
    pair = linalg.maximally_entangled(d_s)
    swap = linalg.swap_gate(d_s)
    for j, u in enumerate(dilation.unitaries):
        rho = np.kron(rho, pair)
        dims = dims + [d_s, d_s]
        a_leg = 2 + 2 * j
        rho = _apply_on(swap, rho, dims, [0, a_leg])
        rho = _apply_on(u, rho, dims, [0, 1])
    rho = partial_trace(rho, dims, [0] + list(range(2, len(dims))))
    dims = [d_s] * (2 * k + 1)
    # from (s, a_0, b_0, ..., a_{k-1}, b_{k-1}) to (s, b_{k-1}, a_{k-1}, ..., b_0, a_0)
    perm = [0]
    for j in range(k - 1, -1, -1):
        perm += [2 + 2 * j, 1 + 2 * j]
    choi = permute_subsystems(rho, dims, perm)
    pt = ProcessTensor(k, d_s, choi)
    w, _ = linalg.herm_eig(pt.choi)
    if w[-1] < -DEFAULT_TOL:
        raise ValueError(f"constructed Choi state has negative eigenvalue {w[-1]:.3e}")
    return pt


def _apply_on(op: np.ndarray, rho: np.ndarray, dims: list[int], where: list[int]) -> np.ndarray:
    """Conjugate rho by an operator acting on the ``where`` factors."""
    rest = [i for i in range(len(dims)) if i not in where]
    perm = where + rest
    inv = list(np.argsort(perm))
    full = np.kron(op, np.eye(int(np.prod([dims[i] for i in rest])), dtype=complex))
    full = permute_subsystems(full, [dims[i] for i in perm], inv)
    return full @ rho @ dagger(full)


# ------------------------------------------------------------- contraction

def apply_process_tensor(pt: ProcessTensor, seq) -> np.ndarray:
    """Final state tr_in[choi (1_out (x) A^T)] for a k-step operation sequence."""
    joint = sequence_joint_bform(seq, pt.k, pt.d_s)
    big = np.kron(np.eye(pt.d_s, dtype=complex), joint.T) @ pt.choi
    return partial_trace(big, [pt.d_s, pt.d_s ** (2 * pt.k)], [0])


def bform(pt: ProcessTensor) -> np.ndarray:
    """The stored Choi state, which is the process tensor's B form."""
    return pt.choi


def aform(pt: ProcessTensor) -> np.ndarray:
    """Matrix acting on vectorised sequences: aform @ vec(A) = vec(output)."""
    return linalg.reshuffle(pt.choi, pt.d_s, pt.d_s ** (2 * pt.k))


# ------------------------------------------------------------- marginals

def _slot_marginal(pt: ProcessTensor, slots: Iterable[int]) -> np.ndarray:
    slots = sorted(set(slots), reverse=True)
    legs: list[int] = []
    for j in slots:
        legs.extend(pt.slot_legs(j))
    return partial_trace(pt.choi, pt.leg_dims, legs)


def _slot_norm(pt: ProcessTensor, j: int, total: float) -> float:
    """Physical trace of the slot-j marginal: d_s per step, tr(rho0) for slot 0."""
    if j == 0:
        return total / pt.d_s**pt.k
    return float(pt.d_s)


def step_map(pt: ProcessTensor, j: int) -> QuantumMap:
    """Marginal channel of step j as a B-form map on legs (out_j, in_{j-1})."""
    if j < 1 or j > pt.k:
        raise ValueError(f"step index {j} out of range 1..{pt.k}")
    total = float(np.real(np.trace(pt.choi)))
    marginal = _slot_marginal(pt, [j]) * (_slot_norm(pt, j, total) / total)
    return QuantumMap(pt.d_s, pt.d_s, BForm(marginal))


def initial_state(pt: ProcessTensor) -> np.ndarray:
    """The pre-preparation system state, the marginal on leg out_0."""
    return _slot_marginal(pt, [0]) / pt.d_s**pt.k


def markov_product(pt: ProcessTensor) -> ProcessTensor:
    """Process with the same marginals and no correlations across slots."""
    factors = [step_map(pt, j).rep.matrix for j in range(pt.k, 0, -1)]
    factors.append(initial_state(pt))
    return ProcessTensor(pt.k, pt.d_s, linalg.kron_all(factors))


# ------------------------------------------------------------- correlations

@dataclass(frozen=True)
class ChiTerm:
    """Correlation operator over a set of slots, slots listed descending."""

    slots: tuple[int, ...]
    matrix: np.ndarray

    @property
    def norm(self) -> float:
        return linalg.frobenius(self.matrix)


def _partitions(items: tuple[int, ...]):
    """All set partitions of items into nonempty blocks."""
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + (head,)] + part[i + 1 :]
        yield part + [(head,)]


def _assemble_blocks(pt: ProcessTensor, blocks: list[tuple[tuple[int, ...], np.ndarray]]) -> np.ndarray:
    """Tensor disjoint slot-local operators and sort legs into canonical order."""
    legs: list[int] = []
    for slots, _ in blocks:
        for j in sorted(slots, reverse=True):
            legs.extend(pt.slot_legs(j))
    out = linalg.kron_all([m for _, m in blocks])
    perm = list(np.argsort(legs))
    return permute_subsystems(out, [pt.d_s] * len(legs), perm)


def chi_decomposition(pt: ProcessTensor, order: int | None = None) -> list[ChiTerm]:
    """Cumulant expansion of the Choi state over time slots.

    Slot subsets are assigned operators chi_S by Moebius recursion: the
    marginal of S minus every tensor product of lower-order terms over the
    proper partitions of S. Single-slot terms are the physical marginals
    (step Choi states and the initial state); all terms with |S| >= 2 are
    traceless over each of their slots, and the terms over all partitions
    reassemble the Choi state exactly.
    """
    order = pt.k + 1 if order is None else order
    if order < 1 or order > pt.k + 1:
        raise ValueError(f"order must lie in 1..{pt.k + 1}")
    total = float(np.real(np.trace(pt.choi)))
    slots_all = tuple(range(pt.k, -1, -1))
    chi: dict[tuple[int, ...], np.ndarray] = {}
    for j in slots_all:
        chi[(j,)] = _slot_marginal(pt, [j]) * (_slot_norm(pt, j, total) / total)
    for size in range(2, order + 1):
        for subset in combinations(slots_all, size):
            subset = tuple(sorted(subset, reverse=True))
            scale = np.prod([_slot_norm(pt, j, total) for j in subset]) / total
            term = _slot_marginal(pt, subset) * scale
            for part in _partitions(subset):
                if len(part) == 1:
                    continue
                blocks = [(tuple(sorted(b, reverse=True)), chi[tuple(sorted(b, reverse=True))]) for b in part]
                term = term - _assemble_blocks(pt, blocks)
            chi[subset] = term
    return [
        ChiTerm(slots, m)
        for slots, m in sorted(chi.items(), key=lambda kv: (len(kv[0]), kv[0]))
        if len(slots) <= order
    ]


# ------------------------------------------------------------- Markovianity

def non_markovianity(pt: ProcessTensor, distance: str = "trace") -> float:
    """Distance between the unit-trace Choi state and its Markov product.

    The trace distance or the relative entropy (actual process first) of the
    two Choi states after dividing each by its total trace.
    """
    if distance not in DISTANCES:
        raise ValueError(f"distance must be one of {DISTANCES}")
    actual = pt.choi / np.real(np.trace(pt.choi))
    mkv_pt = markov_product(pt)
    mkv = mkv_pt.choi / np.real(np.trace(mkv_pt.choi))
    if distance == "trace":
        return linalg.trace_distance(actual, mkv)
    return linalg.relative_entropy(actual, mkv)


def is_markov(pt: ProcessTensor, tol: float = 1e-8) -> bool:
    """Whether the Choi state factorises over slots within a trace-distance tol."""
    actual = pt.choi / np.real(np.trace(pt.choi))
    mkv_pt = markov_product(pt)
    mkv = mkv_pt.choi / np.real(np.trace(mkv_pt.choi))
    return linalg.trace_distance(actual, mkv) <= tol


def surprise(n: int, nm: float) -> float:
    """Probability e^(-n N) of seeing data this surprising under a Markov model."""
    if n < 1:
        raise ValueError("number of experiments must be at least 1")
    if nm < 0:
        raise ValueError("the non-Markovianity measure cannot be negative")
    return math.exp(-n * nm)
