"""Matrix primitives shared across the simulator.

Everything works over the complex field. Real-valued data is just complex
data with zero imaginary part.

DFT convention: ``dft`` is unscaled, ``idft`` scales by ``1/M``. All other
modules go through these two functions rather than calling an FFT directly.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ContractError, DimensionError, NumericalFailure


class SvdResult(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray  # columns are right singular vectors, so a = u @ diag(sigma) @ v^H


class Norms(NamedTuple):
    frobenius: float
    spectral: float
    nuclear: float
    l1: float
    linf: float


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix has non-finite entries")
    return a


def svd(a) -> SvdResult:
    """Thin SVD with singular values sorted nonincreasing."""
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ContractError("svd input has non-finite entries")
    try:
        if a.shape[0] > a.shape[1]:
            # LAPACK is measurably faster on the wide orientation
            v, s, uh = np.linalg.svd(a.conj().T, full_matrices=False)
            return SvdResult(uh.conj().T, s, v)
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    return SvdResult(u, s, vh.conj().T)


def eig_hermitian(a, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``a = q @ diag(gamma) @ q^H`` of a Hermitian matrix.

    Eigenvalues come back ascending. Raises ContractError when ``a`` is not
    Hermitian to ``tol`` (relative to its largest entry).
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"eig_hermitian needs a square matrix, got {a.shape}")
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ContractError("matrix is not Hermitian")
    try:
        gamma, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return q, gamma


def dft(x, axis: int = 0) -> np.ndarray:
    """Unscaled forward DFT along ``axis`` (columns by default)."""
    return np.fft.fft(np.asarray(x, dtype=complex), axis=axis)


def idft(x, axis: int = 0) -> np.ndarray:
    """Inverse DFT along ``axis`` with the 1/M factor."""
    return np.fft.ifft(np.asarray(x, dtype=complex), axis=axis)


def pad(h, m: int) -> np.ndarray:
    h = np.asarray(h, dtype=complex).ravel()
    if h.size > m:
        raise DimensionError(f"{h.size} taps do not fit in length {m}")
    out = np.zeros(m, dtype=complex)
    out[: h.size] = h
    return out


def circulant(h, m: int) -> np.ndarray:
    """m x m circulant matrix whose first column is ``h`` zero-padded to m.

    >>> circulant([0, 1], 2).real
    array([[0., 1.],
           [1., 0.]])
    """
    col = pad(h, m)
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return col[idx]


def circulant_eigenvalues(h, m: int) -> np.ndarray:
    return dft(pad(h, m))


def soft_threshold(a, mu: float):
    """Magnitude shrinkage ``(a/|a|) * max(|a| - mu, 0)``, elementwise.

    For real input this is ``sign(a) * max(|a| - mu, 0)``. Complex entries
    keep their phase.
    """
    if mu < 0:
        raise ContractError(f"threshold must be nonnegative, got {mu}")
    a = np.asarray(a)
    mag = np.abs(a)
    shrunk = np.maximum(mag - mu, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0, shrunk / np.where(mag > 0, mag, 1.0), 0.0)
    out = a * scale
    if out.ndim == 0:
        return out.item()
    return out


def norms(a) -> Norms:
    a = np.asarray(a)
    if a.size == 0 or not np.any(a):
        return Norms(0.0, 0.0, 0.0, 0.0, 0.0)
    s = np.linalg.svd(a, compute_uv=False)
    mag = np.abs(a)
    return Norms(
        frobenius=float(np.linalg.norm(a, "fro")),
        spectral=float(s[0]),
        nuclear=float(s.sum()),
        l1=float(mag.sum()),
        linf=float(mag.max()),
    )


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.shape[0] > a.shape[1]:
        a = a.conj().T
    return float(np.linalg.svd(a, compute_uv=False)[0])


def numerical_rank(a, rtol: float = 1e-8) -> int:
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
