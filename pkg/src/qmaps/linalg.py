"""Dense complex linear algebra kernel.

Every matrix is a 2-D complex ``numpy.ndarray``. Conventions fixed here and
used by the whole package:

* ``vec`` stacks rows:  vec(rho)[r * cols + s] = rho[r, s].
* Composite indices are row-major, so ``numpy.kron(a, b)`` realises the
  tensor product with index (r * d_b + r', s * d_b + s') = a[r, s] b[r', s'].
* Eigenvalues and singular values are returned in descending order.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

# Eigenvalues below this magnitude count as zero for rank, matrix logarithms
# and support-containment decisions.
SUPPORT_TOL = 1e-10

_JACOBI_OFF_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


class HermEigResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdResult(NamedTuple):
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


def as_matrix(m: np.ndarray) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and frobenius(m - dagger(m)) <= tol


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(matrices: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in matrices:
        out = np.kron(out, m)
    return out


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major vectorisation, vec(rho) = sum_rs rho_rs |rs>."""
    return as_matrix(m).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if cols is None:
        cols = rows
    if v.size != rows * cols:
        raise ValueError(f"cannot unvec length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (original order kept)."""
    m = as_matrix(m)
    dims = list(dims)
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = sorted(set(keep))
    if any(i < 0 or i >= len(dims) for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    t = m.reshape(dims + dims)
    n = len(dims)
    removed = 0
    for ax in range(n):
        if ax in keep:
            continue
        a = ax - removed
        t = np.trace(t, axis1=a, axis2=a + t.ndim // 2)
        removed += 1
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that factor ``perm[i]`` moves to slot ``i``."""
    m = as_matrix(m)
    dims = list(dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {list(perm)} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims)
    t = t.transpose(list(perm) + [p + n for p in perm])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def maximally_entangled(d: int, normalized: bool = False) -> np.ndarray:
    """|I><I| with |I> = sum_k |kk>, optionally divided by d."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    out = np.outer(v, v)
    return out / d if normalized else out


def swap_gate(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def reshuffle(m: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    """Exchange B form and A form via the index permutation (rr';ss') <-> (rs;r's').

    Shape decides the direction: (d_out*d_in) square is read as a B form and
    returns the d_out^2 x d_in^2 A form; d_out^2 x d_in^2 is read as an A form
    and returns the B form. For d_out == d_in both coincide and the map is an
    involution.
    """
    m = as_matrix(m)
    b_shape = (d_out * d_in, d_out * d_in)
    a_shape = (d_out * d_out, d_in * d_in)
    if m.shape == b_shape and (m.shape != a_shape or d_out == d_in):
        t = m.reshape(d_out, d_in, d_out, d_in).transpose(0, 2, 1, 3)
        return t.reshape(a_shape)
    if m.shape == a_shape:
        t = m.reshape(d_out, d_out, d_in, d_in).transpose(0, 2, 1, 3)
        return t.reshape(b_shape)
    raise ValueError(
        f"shape {m.shape} is neither the B form {b_shape} nor the A form {a_shape} "
        f"for d_out={d_out}, d_in={d_in}"
    )


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> tuple[float, complex]:
    """Cosine and phased sine zeroing the (p, q) entry of a Hermitian 2x2 block."""
    phi = apq / abs(apq)
    tau = (aqq - app) / (2.0 * abs(apq))
    if tau >= 0.0:
        t = -1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = 1.0 / (-tau + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c * phi


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def herm_eig(m: np.ndarray, tol: float = 1e-10) -> HermEigResult:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps row-cyclically over all off-diagonal pairs until the off-diagonal
    Frobenius norm drops below 1e-13 (relative to the matrix norm). Returns
    eigenvalues in descending order with orthonormal eigenvector columns.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"herm_eig needs a square matrix, got {a.shape}")
    if frobenius(a - dagger(a)) > tol * max(1.0, frobenius(a)):
        raise ValueError("herm_eig: input is not Hermitian within tolerance")
    a = (a + dagger(a)) / 2.0
    v = np.eye(n, dtype=complex)
    threshold = _JACOBI_OFF_TOL * max(1.0, frobenius(a))
    for _ in range(_JACOBI_MAX_SWEEPS):
        if _off_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / n:
                    continue
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                # columns: (p, q) <- (p, q) @ [[c, -s], [conj(s), c]]
                col_p = c * a[:, p] + np.conj(s) * a[:, q]
                col_q = -s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = col_p, col_q
                row_p = c * a[p, :] + s * a[q, :]
                row_q = -np.conj(s) * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = row_p, row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                col_p = c * v[:, p] + np.conj(s) * v[:, q]
                col_q = -s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = col_p, col_q
    else:
        raise ValueError("herm_eig: Jacobi sweeps did not converge")
    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return HermEigResult(w[order], v[:, order])


def _complete_orthonormal(cols: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Extend orthonormal columns to a full basis, Gram-Schmidt in index order."""
    basis = [c.astype(complex) for c in cols]
    for idx in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=complex)
        e[idx] = 1.0
        for b in basis:
            e = e - b * (np.conj(b) @ e)
        # second pass for numerical orthogonality
        for b in basis:
            e = e - b * (np.conj(b) @ e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-7:
            basis.append(e / nrm)
    if len(basis) != dim:
        raise ValueError("failed to complete orthonormal basis")
    return basis


def svd(m: np.ndarray) -> SvdResult:
    """Singular value decomposition built on herm_eig of m^dag m.

    Left vectors are aligned through m v = sigma u; null directions are filled
    by orthonormal completion. Reconstruction u diag(sigma) v^dag matches the
    input to the kernel accuracy.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    w, v = herm_eig(dagger(m) @ m)
    w = np.maximum(w, 0.0)
    s = np.sqrt(w)
    cutoff = max(s[0], 1.0) * 1e-14 if s.size else 0.0
    us: list[np.ndarray] = []
    for i in range(min(rows, cols)):
        if s[i] > cutoff:
            us.append((m @ v[:, i]) / s[i])
    us = _complete_orthonormal(us, rows)
    u = np.column_stack(us)
    s = s[:cols]
    if rows < cols:
        s = s[:rows]
        v = v[:, :rows]
    return SvdResult(s, u[:, : len(s)], v[:, : len(s)])


def matrix_function(m: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V f(lambda) V^dag for Hermitian m, with f applied to the eigenvalue vector."""
    w, v = herm_eig(m)
    return (v * f(w)) @ dagger(v)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix."""
    w, v = herm_eig(m)
    if w[-1] < -1e-9:
        raise ValueError(f"matrix square root of non-PSD input (min eigenvalue {w[-1]:.3e})")
    return (v * np.sqrt(np.maximum(w, 0.0))) @ dagger(v)


def logm_support(m: np.ndarray) -> np.ndarray:
    """Matrix logarithm on the support of a PSD matrix; zero on the kernel."""
    w, v = herm_eig(m)
    if w[-1] < -1e-9:
        raise ValueError(f"matrix log of non-PSD input (min eigenvalue {w[-1]:.3e})")
    logw = np.where(w > SUPPORT_TOL, np.log(np.maximum(w, SUPPORT_TOL)), 0.0)
    return (v * logw) @ dagger(v)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of a - b for Hermitian inputs."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"trace_distance shape mismatch {a.shape} vs {b.shape}")
    w, _ = herm_eig(a - b)
    return float(0.5 * np.sum(np.abs(w)))


def relative_entropy(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> float:
    """tr a (log a - log b) in natural log; +inf outside b's support.

    Both arguments must be PSD with unit trace (callers normalise Choi states
    before comparing them).
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"relative_entropy shape mismatch {a.shape} vs {b.shape}")
    wa, va = herm_eig(a)
    wb, vb = herm_eig(b)
    if wa[-1] < -1e-9 or wb[-1] < -1e-9:
        raise ValueError("relative_entropy requires PSD inputs")
    if abs(np.sum(wa) - 1.0) > tol or abs(np.sum(wb) - 1.0) > tol:
        raise ValueError("relative_entropy requires unit-trace inputs")
    support_b = wb > SUPPORT_TOL
    kernel_proj = (vb * ~support_b) @ dagger(vb)
    if np.real(np.trace(a @ kernel_proj)) > SUPPORT_TOL:
        return math.inf
    wa_pos = np.maximum(wa, 0.0)
    ent_a = float(np.sum(np.where(wa_pos > SUPPORT_TOL, wa_pos * np.log(np.maximum(wa_pos, SUPPORT_TOL)), 0.0)))
    log_b = (vb * np.where(support_b, np.log(np.maximum(wb, SUPPORT_TOL)), 0.0)) @ dagger(vb)
    cross = float(np.real(np.trace(a @ log_b)))
    return ent_a - cross
