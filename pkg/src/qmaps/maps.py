"""The four representations of a linear map on operator space.

A map E: B(H_d_in) -> B(H_d_out) is stored in exactly one of

* tomographic form: basis inputs, their duals and the corresponding outputs,
* operator-sum form: pairs (L_a, R_a) acting as sum_a L_a rho R_a^dag,
* A form: the d_out^2 x d_in^2 matrix with vec(E[rho]) = E_A vec(rho),
* B form (Choi matrix): legs ordered out (x) in, built with the unnormalised
  pair state |I> = sum_k |kk>, so a trace-preserving map has tr(B) = d_in.

Conversions between all four are provided, together with the trace,
Hermiticity and complete-positivity criteria in each representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import SUPPORT_TOL, dagger, vec, unvec

DEFAULT_TOL = 1e-9

REPRESENTATION_NAMES = ("tomographic", "kraus", "aform", "bform")


@dataclass(frozen=True)
class TomographicRep:
    """Input/output data: tr(duals[i]^dag basis_inputs[j]) = delta_ij."""

    basis_inputs: tuple[np.ndarray, ...]
    duals: tuple[np.ndarray, ...]
    outputs: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class OperatorSumRep:
    left_ops: tuple[np.ndarray, ...]
    right_ops: tuple[np.ndarray, ...]

    @property
    def is_kraus(self) -> bool:
        """True when left and right operators are the same objects."""
        return all(l is r for l, r in zip(self.left_ops, self.right_ops))


@dataclass(frozen=True)
class AForm:
    matrix: np.ndarray


@dataclass(frozen=True)
class BForm:
    matrix: np.ndarray


Representation = TomographicRep | OperatorSumRep | AForm | BForm


@dataclass(frozen=True)
class QuantumMap:
    d_in: int
    d_out: int
    rep: Representation

    def __post_init__(self):
        _validate_rep(self.d_in, self.d_out, self.rep)

    @property
    def rep_name(self) -> str:
        return {
            TomographicRep: "tomographic",
            OperatorSumRep: "kraus",
            AForm: "aform",
            BForm: "bform",
        }[type(self.rep)]


def _validate_rep(d_in: int, d_out: int, rep: Representation) -> None:
    if d_in < 1 or d_out < 1:
        raise ValueError("map dimensions must be positive")
    if isinstance(rep, TomographicRep):
        n = d_in * d_in
        if not (len(rep.basis_inputs) == len(rep.duals) == len(rep.outputs) == n):
            raise ValueError(f"tomographic representation needs {n} basis elements")
        for m in rep.basis_inputs + rep.duals:
            if m.shape != (d_in, d_in):
                raise ValueError("tomographic basis and duals must live on the input space")
        for m in rep.outputs:
            if m.shape != (d_out, d_out):
                raise ValueError("tomographic outputs must live on the output space")
        gram = np.array(
            [[np.trace(dagger(d) @ r) for r in rep.basis_inputs] for d in rep.duals]
        )
        if np.max(np.abs(gram - np.eye(n))) > 1e-10:
            raise ValueError("duals do not pair with the basis to delta_ij within 1e-10")
    elif isinstance(rep, OperatorSumRep):
        if len(rep.left_ops) != len(rep.right_ops) or not rep.left_ops:
            raise ValueError("operator-sum representation needs equal, nonempty operator lists")
        for l, r in zip(rep.left_ops, rep.right_ops):
            if l.shape != (d_out, d_in) or r.shape != (d_out, d_in):
                raise ValueError(f"operator-sum terms must be {d_out}x{d_in}")
    elif isinstance(rep, AForm):
        if rep.matrix.shape != (d_out * d_out, d_in * d_in):
            raise ValueError(f"A form must be {d_out**2}x{d_in**2}, got {rep.matrix.shape}")
    elif isinstance(rep, BForm):
        dd = d_out * d_in
        if rep.matrix.shape != (dd, dd):
            raise ValueError(f"B form must be {dd}x{dd}, got {rep.matrix.shape}")
    else:
        raise ValueError(f"unknown representation {type(rep)!r}")


# ------------------------------------------------------------- constructors

def kraus_map(kraus: Sequence[np.ndarray]) -> QuantumMap:
    """CP map sum_a K rho K^dag from a list of Kraus operators."""
    ops = tuple(linalg.as_matrix(k) for k in kraus)
    d_out, d_in = ops[0].shape
    return QuantumMap(d_in, d_out, OperatorSumRep(ops, ops))


def operator_sum_map(left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> QuantumMap:
    lo = tuple(linalg.as_matrix(m) for m in left)
    ro = tuple(linalg.as_matrix(m) for m in right)
    d_out, d_in = lo[0].shape
    return QuantumMap(d_in, d_out, OperatorSumRep(lo, ro))


def bform_map(matrix: np.ndarray, d_in: int | None = None, d_out: int | None = None) -> QuantumMap:
    m = linalg.as_matrix(matrix)
    if d_in is None or d_out is None:
        d = round(np.sqrt(m.shape[0]))
        if d * d != m.shape[0]:
            raise ValueError("cannot infer dimensions from a non-square leg structure")
        d_in = d_out = d
    return QuantumMap(d_in, d_out, BForm(m))


def aform_map(matrix: np.ndarray, d_in: int | None = None, d_out: int | None = None) -> QuantumMap:
    m = linalg.as_matrix(matrix)
    if d_in is None or d_out is None:
        d_out = round(np.sqrt(m.shape[0]))
        d_in = round(np.sqrt(m.shape[1]))
    return QuantumMap(d_in, d_out, AForm(m))


def tomographic_map(
    basis_inputs: Sequence[np.ndarray],
    outputs: Sequence[np.ndarray],
    duals: Sequence[np.ndarray] | None = None,
) -> QuantumMap:
    """Map defined by its action on a basis of input states.

    The dual set is computed from the basis when not supplied.
    """
    basis = tuple(linalg.as_matrix(b) for b in basis_inputs)
    outs = tuple(linalg.as_matrix(o) for o in outputs)
    if duals is None:
        duals = dual_basis(basis)
    return QuantumMap(
        basis[0].shape[0], outs[0].shape[0], TomographicRep(basis, tuple(duals), outs)
    )


def identity_map(d: int) -> QuantumMap:
    return kraus_map([np.eye(d, dtype=complex)])


# ------------------------------------------------------------- dual matrices

def gell_mann_basis(d: int) -> list[np.ndarray]:
    """Hermitian self-dual basis with tr(G_i G_j) = 2 delta_ij.

    Generalised Gell-Mann matrices followed by sqrt(2/d) times the identity.
    """
    out: list[np.ndarray] = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            out.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for j in range(l):
            m[j, j] = 1.0
        m[l, l] = -float(l)
        out.append(np.sqrt(2.0 / (l * (l + 1))) * m)
    out.append(np.sqrt(2.0 / d) * np.eye(d, dtype=complex))
    return out


def dual_basis(basis: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    """Dual set with tr(D_i^dag rho_j) = delta_ij for a linearly independent basis.

    Expands the basis in a Hermitian self-dual frame, rho_i = sum_j h_ij G_j,
    and inverts: D_i = (1/2) sum_j f_ij G_j with F = (H^dag)^{-1}.
    """
    basis = [linalg.as_matrix(b) for b in basis]
    d = basis[0].shape[0]
    n = d * d
    if len(basis) != n or any(b.shape != (d, d) for b in basis):
        raise ValueError(f"dual_basis needs {n} matrices of shape {d}x{d}")
    stacked = np.column_stack([vec(b) for b in basis])
    s = linalg.svd(stacked).singular_values
    if s[-1] <= 1e-8 * s[0]:
        raise ValueError("basis is linearly dependent (singular value ratio below 1e-8)")
    gs = gell_mann_basis(d)
    h = np.array([[np.trace(g @ b) / 2.0 for g in gs] for b in basis])
    f = np.linalg.solve(dagger(h), np.eye(n, dtype=complex))
    return tuple(sum(f[i, j] * gs[j] for j in range(n)) / 2.0 for i in range(n))


def state_basis(d: int) -> list[np.ndarray]:
    """Pure-state basis of B(H_d) used as the default tomography frame.

    For qubits this is the standard four-state set {pi_+, pi_y+, pi_0, pi_-};
    in higher dimension, rank-1 projectors onto computational states and onto
    the +1 eigenvectors (|k>+|l>)/sqrt2 and (|k>+i|l>)/sqrt2 of the x- and
    y-type Gell-Mann matrices.
    """
    if d < 2:
        raise ValueError("state basis needs d >= 2")
    if d == 2:
        return [
            np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
            np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
            np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
            np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex),
        ]
    kets: list[np.ndarray] = []
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = 1.0
        kets.append(e)
    states = [np.outer(k, k.conj()) for k in kets]
    for k in range(d):
        for l in range(k + 1, d):
            plus = (kets[k] + kets[l]) / np.sqrt(2)
            states.append(np.outer(plus, plus.conj()))
            yplus = (kets[k] + 1j * kets[l]) / np.sqrt(2)
            states.append(np.outer(yplus, yplus.conj()))
    return states


# ------------------------------------------------------------- map action

def apply_map(m: QuantumMap, rho: np.ndarray) -> np.ndarray:
    """Act with the map on a d_in x d_in operator, using its stored form."""
    rho = linalg.as_matrix(rho)
    if rho.shape != (m.d_in, m.d_in):
        raise ValueError(f"state shape {rho.shape} does not match d_in={m.d_in}")
    rep = m.rep
    if isinstance(rep, TomographicRep):
        out = np.zeros((m.d_out, m.d_out), dtype=complex)
        for dual, rho_out in zip(rep.duals, rep.outputs):
            out += rho_out * np.trace(dagger(dual) @ rho)
        return out
    if isinstance(rep, OperatorSumRep):
        out = np.zeros((m.d_out, m.d_out), dtype=complex)
        for l, r in zip(rep.left_ops, rep.right_ops):
            out += l @ rho @ dagger(r)
        return out
    if isinstance(rep, AForm):
        return unvec(rep.matrix @ vec(rho), m.d_out)
    big = np.kron(np.eye(m.d_out, dtype=complex), rho.T) @ rep.matrix
    return linalg.partial_trace(big, [m.d_out, m.d_in], [0])


# ------------------------------------------------------------- conversions

def to_bform(m: QuantumMap) -> BForm:
    rep = m.rep
    if isinstance(rep, BForm):
        return rep
    if isinstance(rep, AForm):
        return BForm(linalg.reshuffle(rep.matrix, m.d_out, m.d_in))
    if isinstance(rep, OperatorSumRep):
        out = np.zeros((m.d_out * m.d_in, m.d_out * m.d_in), dtype=complex)
        for l, r in zip(rep.left_ops, rep.right_ops):
            out += np.outer(vec(l), vec(r).conj())
        return BForm(out)
    out = np.zeros((m.d_out * m.d_in, m.d_out * m.d_in), dtype=complex)
    for rho_out, dual in zip(rep.outputs, rep.duals):
        out += np.kron(rho_out, dual.conj())
    return BForm(out)


def to_aform(m: QuantumMap) -> AForm:
    rep = m.rep
    if isinstance(rep, AForm):
        return rep
    if isinstance(rep, OperatorSumRep):
        out = np.zeros((m.d_out * m.d_out, m.d_in * m.d_in), dtype=complex)
        for l, r in zip(rep.left_ops, rep.right_ops):
            out += np.kron(l, r.conj())
        return AForm(out)
    if isinstance(rep, TomographicRep):
        out = np.zeros((m.d_out * m.d_out, m.d_in * m.d_in), dtype=complex)
        for rho_out, dual in zip(rep.outputs, rep.duals):
            out += np.outer(vec(rho_out), vec(dual).conj())
        return AForm(out)
    return AForm(linalg.reshuffle(rep.matrix, m.d_out, m.d_in))


def to_operator_sum(m: QuantumMap, tol: float = DEFAULT_TOL) -> OperatorSumRep:
    """Operator pairs from the spectral data of the B form.

    Hermitian B form: eigendecomposition with the eigenvalue sign carried by
    the left operator, so L_a = +/- R_a. PSD B form: canonical Kraus operators
    K_a = sqrt(lambda_a) unvec(|a>). Otherwise a singular value decomposition.
    """
    b = to_bform(m).matrix
    if linalg.is_hermitian(b, tol):
        w, v = linalg.herm_eig(b)
        left, right = [], []
        for lam, col in zip(w, v.T):
            if abs(lam) <= SUPPORT_TOL:
                continue
            k = unvec(col, m.d_out, m.d_in)
            root = np.sqrt(abs(lam))
            left.append(np.sign(lam) * root * k)
            right.append(root * k)
        if not left:
            z = np.zeros((m.d_out, m.d_in), dtype=complex)
            left, right = [z], [z]
        if w[-1] >= -tol:
            shared = tuple(left)
            return OperatorSumRep(shared, shared)
        return OperatorSumRep(tuple(left), tuple(right))
    s, u, v = linalg.svd(b)
    left, right = [], []
    for sig, ucol, vcol in zip(s, u.T, v.T):
        if sig <= SUPPORT_TOL:
            continue
        root = np.sqrt(sig)
        left.append(root * unvec(ucol, m.d_out, m.d_in))
        right.append(root * unvec(vcol, m.d_out, m.d_in))
    return OperatorSumRep(tuple(left), tuple(right))


def to_tomographic(m: QuantumMap, basis: Sequence[np.ndarray] | None = None) -> TomographicRep:
    """Probe the map on a basis of input states; duals follow from the basis."""
    if basis is None:
        basis = state_basis(m.d_in)
    basis = tuple(linalg.as_matrix(b) for b in basis)
    duals = dual_basis(basis)
    outputs = tuple(apply_map(m, b) for b in basis)
    return TomographicRep(basis, duals, outputs)


def convert(m: QuantumMap, target: str, basis: Sequence[np.ndarray] | None = None) -> QuantumMap:
    """Re-express a map in the named representation."""
    if target == "bform":
        rep: Representation = to_bform(m)
    elif target == "aform":
        rep = to_aform(m)
    elif target == "kraus":
        rep = to_operator_sum(m)
    elif target == "tomographic":
        rep = to_tomographic(m, basis)
    else:
        raise ValueError(f"unknown representation {target!r} (expected one of {REPRESENTATION_NAMES})")
    return QuantumMap(m.d_in, m.d_out, rep)


# ------------------------------------------------------------- property checks

def check_tp(m: QuantumMap, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Trace preservation in the representation's own criterion.

    Returns the verdict and the Frobenius residual of the criterion matrix.
    """
    rep = m.rep
    eye_in = np.eye(m.d_in, dtype=complex)
    if isinstance(rep, OperatorSumRep):
        acc = sum(dagger(r) @ l for l, r in zip(rep.left_ops, rep.right_ops))
        residual = linalg.frobenius(acc - eye_in)
    elif isinstance(rep, TomographicRep):
        acc = sum(np.trace(o) * d.conj() for o, d in zip(rep.outputs, rep.duals))
        residual = linalg.frobenius(acc - eye_in)
    else:
        b = to_bform(m).matrix
        residual = linalg.frobenius(
            linalg.partial_trace(b, [m.d_out, m.d_in], [1]) - eye_in
        )
    return residual <= tol, float(residual)


def check_hp(m: QuantumMap, tol: float = DEFAULT_TOL) -> bool:
    """Hermiticity preservation: the B form is Hermitian."""
    b = to_bform(m).matrix
    return linalg.is_hermitian(b, tol)


def check_cp(m: QuantumMap, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Complete positivity: Hermitian B form with spectrum above -tol.

    The reported number is the minimum eigenvalue of the Hermitian part of
    the B form, which for HP maps is the minimum Choi eigenvalue.
    """
    b = to_bform(m).matrix
    hermitian = linalg.is_hermitian(b, tol)
    w, _ = linalg.herm_eig((b + dagger(b)) / 2.0)
    min_eig = float(w[-1])
    return hermitian and min_eig >= -tol, min_eig


def kraus_rank(m: QuantumMap, tol: float = DEFAULT_TOL) -> int:
    """Number of Choi eigenvalues above the support threshold (CP maps only)."""
    cp, min_eig = check_cp(m, tol)
    if not cp:
        raise ValueError(f"kraus_rank is defined for CP maps (min Choi eigenvalue {min_eig:.3e})")
    w, _ = linalg.herm_eig(to_bform(m).matrix)
    return int(np.sum(w > SUPPORT_TOL))


def same_map(a: QuantumMap, b: QuantumMap, tol: float = DEFAULT_TOL) -> bool:
    """Equality of the underlying linear maps via their B forms."""
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        return False
    return linalg.frobenius(to_bform(a).matrix - to_bform(b).matrix) <= tol
