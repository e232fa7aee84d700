"""Dense Hermitian linear algebra kernel.

All operators in this package are plain complex numpy matrices; this module
provides the validated operations the engines share: spectral decomposition,
matrix functions of Hermitian matrices, Kronecker products, partial traces
and the absolute trace norm.  Matrices stay dense; the sizes of interest
(8x8 up to 4096x4096) never justify sparse storage.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

# Relative Hermiticity tolerance used by every construction check.
HERMITIAN_RTOL = 1e-12


class NotHermitianError(ValueError):
    """Input matrix fails the Hermiticity construction check."""


class NoConvergenceError(RuntimeError):
    """The iterative eigensolver gave up; the input is pathological."""


class DomainError(ValueError):
    """An eigenvalue lies outside the domain of the requested scalar function."""


class HermitianEigen(NamedTuple):
    """Spectral decomposition A = V diag(w) V^dag with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def require_hermitian(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``a`` as a complex matrix, rejecting non-Hermitian input.

    The check is relative: max |A - A^dag| must not exceed rtol * max |A|.
    """
    arr = as_complex_matrix(a)
    residue = np.abs(arr - arr.conj().T).max() if arr.size else 0.0
    scale = np.abs(arr).max() if arr.size else 0.0
    if residue > rtol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: residue {residue:.3e} exceeds "
            f"{rtol:g} * max|A| = {rtol * scale:.3e}"
        )
    return arr


def herm_eig(a) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    arr = require_hermitian(a)
    arr = (arr + arr.conj().T) / 2
    try:
        w, v = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological
        raise NoConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return HermitianEigen(w, v)


def mat_func(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    *,
    positive: bool = False,
    neg_tol: float | None = None,
    floor: float = 1e-300,
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix spectrally.

    Returns V diag(f(w)) V^dag.  ``f`` must act elementwise on a real numpy
    vector (np.exp, np.log, np.sqrt, ...).  With ``positive=True`` the
    spectrum is required to be nonnegative up to a clamp tolerance:
    eigenvalues within ``neg_tol`` below zero (default 1e-12 * max|w|) are
    raised to ``floor`` before ``f`` is applied, anything more negative
    raises DomainError.  The tiny-positive default floor keeps log finite on
    spectra that are positive in exact arithmetic but graze zero in floats.
    """
    w, v = herm_eig(a)
    if positive:
        scale = float(np.abs(w).max()) if w.size else 0.0
        tol = HERMITIAN_RTOL * scale if neg_tol is None else float(neg_tol)
        lowest = float(w.min()) if w.size else 0.0
        if lowest < -tol:
            raise DomainError(
                f"eigenvalue {lowest:.6e} below the clamp tolerance {-tol:.3e}; "
                "input is not positive semidefinite"
            )
        w = np.maximum(w, floor)
    fw = np.asarray(f(w))
    out = (v * fw) @ v.conj().T
    if not np.iscomplexobj(fw):
        # real-valued f on a Hermitian argument: repair roundoff skew
        out = (out + out.conj().T) / 2
    return out


def herm_exp(a) -> np.ndarray:
    """exp(A) for Hermitian A."""
    return mat_func(a, np.exp)


def herm_log(a) -> np.ndarray:
    """log(A) for Hermitian positive-definite A (roundoff-negative clamped)."""
    return mat_func(a, np.log, positive=True)


def kron(a, b) -> np.ndarray:
    """Kronecker product: (A kron B)[i*dB+k, j*dB+l] = A[i,j] * B[k,l]."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def partial_trace(a, site_dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every tensor factor whose position is not in ``keep``.

    ``site_dims`` lists the local dimension of each factor in row-major
    Kronecker order; ``keep`` holds the (0-based) positions to retain, which
    stay in their original relative order.  Trace and Hermiticity of the
    input are preserved.
    """
    arr = as_complex_matrix(a)
    dims = [int(d) for d in site_dims]
    if any(d <= 0 for d in dims):
        raise ValueError(f"site dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if total != arr.shape[0]:
        raise ValueError(
            f"dimension mismatch: product of site dims {total} != matrix dim {arr.shape[0]}"
        )
    kept = sorted(set(int(i) for i in keep))
    if not kept:
        raise ValueError("keep set must be nonempty")
    if kept[0] < 0 or kept[-1] >= len(dims):
        raise ValueError(f"keep indices {kept} out of range for {len(dims)} sites")

    k = len(dims)
    tensor = arr.reshape(dims + dims)
    row_subs = list(range(k))
    kept_set = set(kept)
    col_subs = [k + i if i in kept_set else i for i in range(k)]
    out_subs = kept + [k + i for i in kept]
    out = np.einsum(tensor, row_subs + col_subs, out_subs)
    d = int(np.prod([dims[i] for i in kept]))
    return out.reshape(d, d)


def abs_trace_norm(a) -> float:
    """tr|A| = sum of |eigenvalues| for Hermitian A."""
    arr = require_hermitian(a)
    arr = (arr + arr.conj().T) / 2
    try:
        w = np.linalg.eigvalsh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological
        raise NoConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return float(np.abs(w).sum())
