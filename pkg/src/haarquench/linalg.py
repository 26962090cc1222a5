"""Dense complex linear algebra for small Hermitian matrices.

All matrices in this package are dense square complex arrays of dimension at
most 16, so the routines here favor robustness and reproducibility over
asymptotics.  The eigensolver is a cyclic complex Jacobi iteration, which is
unconditionally stable for Hermitian input and has no data-dependent
branching beyond the rotation order.

Basis convention: qubit 0 is the most significant bit of the computational
basis index, so |q0 q1 q2> maps to index q0*4 + q1*2 + q2 and the first
factor of a Kronecker product is qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianEigenResult",
    "NotHermitianError",
    "NoConvergenceError",
    "NegativeEigenvalueError",
    "DimMismatchError",
    "InvalidMaskError",
    "hermitian_eigen",
    "matrix_sqrt_psd",
    "tensor",
    "partial_transpose",
    "frobenius_inner",
]

_HERMITICITY_TOL = 1e-12
_OFFDIAG_TOL = 1e-12
_MAX_SWEEPS = 500
_EIGEN_CLAMP = -1e-10


class NotHermitianError(ValueError):
    """Input matrix deviates from its conjugate transpose beyond tolerance."""


class NoConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal norm target."""


class NegativeEigenvalueError(ValueError):
    """Matrix has an eigenvalue too negative to be round-off from zero."""


class DimMismatchError(ValueError):
    """Operands have incompatible shapes."""


class InvalidMaskError(ValueError):
    """Subsystem mask addresses qubits outside the register."""


@dataclass(frozen=True)
class HermitianEigenResult:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square_complex(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return a


def _require_hermitian(a: np.ndarray) -> None:
    scale = 1.0 + np.abs(a).max(initial=0.0)
    dev = np.abs(a - a.conj().T).max(initial=0.0)
    if dev > _HERMITICITY_TOL * scale:
        raise NotHermitianError(
            f"matrix deviates from Hermitian by {dev:.3e} (scale {scale:.3e})")


def hermitian_eigen(m) -> HermitianEigenResult:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Sweeps row-cyclically over the strict upper triangle, annihilating each
    pivot with a phased Givens rotation, until the off-diagonal Frobenius
    norm falls below 1e-12 of the input norm.  Returns eigenvalues in
    descending order; eigenvector column k pairs with eigenvalue k.
    """
    a = _as_square_complex(m).copy()
    _require_hermitian(a)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    norm = np.linalg.norm(a)
    if norm == 0.0 or n == 1:
        w = np.real(np.diag(a)).copy()
        order = np.argsort(-w, kind="stable")
        return HermitianEigenResult(w[order], v[:, order])
    target = _OFFDIAG_TOL * norm
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = abs(a[p, q])
                if b <= target / (n * n):
                    continue
                phase = a[p, q] / b  # e^{i phi}
                alpha = a[p, p].real
                gamma = a[q, q].real
                tau = (alpha - gamma) / (2.0 * b)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # unitary G: columns (p,q) -> (c, s e^{-i phi}) and
                # (-s, c e^{-i phi}); updates A <- G^H A G, V <- V G
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_q
                a[:, q] = -s * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * row_p + c * phase * row_q
                a[p, p] = alpha + t * b
                a[q, q] = gamma - t * b
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p + s * np.conj(phase) * vcol_q
                v[:, q] = -s * vcol_p + c * np.conj(phase) * vcol_q
    else:
        raise NoConvergenceError(
            f"Jacobi did not reach off-diagonal norm {target:.3e} "
            f"in {_MAX_SWEEPS} sweeps")
    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return HermitianEigenResult(w[order], v[:, order])


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in [-1e-10, 0) are treated as round-off from zero and
    clamped; anything more negative raises NegativeEigenvalueError.
    """
    res = hermitian_eigen(m)
    w = res.eigenvalues
    scale = 1.0 + float(w.max(initial=0.0))
    if w.min(initial=0.0) < _EIGEN_CLAMP * scale:
        raise NegativeEigenvalueError(
            f"eigenvalue {w.min():.3e} below the round-off clamp")
    w = np.maximum(w, 0.0)
    vecs = res.eigenvectors
    return (vecs * np.sqrt(w)) @ vecs.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the first factor is the more significant register."""
    return np.kron(np.asarray(a, dtype=np.complex128),
                   np.asarray(b, dtype=np.complex128))


def partial_transpose(m, n_qubits: int, mask: int) -> np.ndarray:
    """Transpose the qubits selected by `mask` inside a 2^n x 2^n matrix.

    Bit q of `mask` selects qubit q (qubit 0 being the most significant bit
    of the basis index).  mask = 0 is the identity and the full mask is the
    ordinary transpose; transposing a mask and then its complement composes
    to the full transpose.
    """
    a = _as_square_complex(m)
    dim = 2 ** n_qubits
    if a.shape[0] != dim:
        raise DimMismatchError(
            f"matrix dim {a.shape[0]} does not match {n_qubits} qubits")
    if mask < 0 or (mask >> n_qubits) != 0:
        raise InvalidMaskError(
            f"mask {mask:#b} addresses qubits outside a {n_qubits}-qubit register")
    t = a.reshape((2,) * (2 * n_qubits))
    axes = list(range(2 * n_qubits))
    for q in range(n_qubits):
        if (mask >> q) & 1:
            axes[q], axes[n_qubits + q] = axes[n_qubits + q], axes[q]
    return np.ascontiguousarray(t.transpose(axes).reshape(dim, dim))


def frobenius_inner(a, b) -> complex:
    """Frobenius inner product Tr(a^H b), conjugate-linear in `a`."""
    aa = np.asarray(a, dtype=np.complex128)
    bb = np.asarray(b, dtype=np.complex128)
    if aa.shape != bb.shape:
        raise DimMismatchError(f"shape mismatch {aa.shape} vs {bb.shape}")
    return complex(np.vdot(aa, bb))
