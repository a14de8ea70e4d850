"""User bits, Walsh codes, per-bit code schedules, spreading and despreading."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError, ParameterError


def walsh(m: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of order ``m`` with int entries +1/-1.

    >>> walsh(2)
    array([[ 1,  1],
           [ 1, -1]])
    """
    if m < 2 or m & (m - 1):
        raise ParameterError(f"Walsh order must be a power of two >= 2, got {m}")
    w = np.ones((1, 1), dtype=np.int64)
    while w.shape[0] < m:
        w = np.block([[w, w], [w, -w]])
    return w


def gen_bits(k: int, n: int, seed=None) -> np.ndarray:
    """K x N matrix of i.i.d. equiprobable antipodal bits (int8 +1/-1)."""
    if k < 1 or n < 1:
        raise ParameterError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    return (2 * rng.integers(0, 2, size=(k, n)) - 1).astype(np.int8)


@dataclass(frozen=True)
class CodeSchedule:
    """Per-bit spreading matrices drawn from the columns of a Walsh matrix.

    ``column_indices[n]`` holds the K Walsh column indices assigned to the
    users for bit ``n``; ``matrices()[n]`` is the corresponding M x K matrix.
    """

    walsh: np.ndarray
    column_indices: np.ndarray  # shape (N, K)

    @property
    def m(self) -> int:
        return self.walsh.shape[0]

    @property
    def k(self) -> int:
        return self.column_indices.shape[1]

    @property
    def n(self) -> int:
        return self.column_indices.shape[0]

    def matrix(self, n: int) -> np.ndarray:
        return self.walsh[:, self.column_indices[n]]

    def matrices(self) -> np.ndarray:
        """Stack of shape (N, M, K)."""
        return np.transpose(self.walsh[:, self.column_indices], (1, 0, 2))


def gen_code_schedule(w: np.ndarray, k: int, n: int, seed=None) -> CodeSchedule:
    m = w.shape[0]
    if k > m:
        raise CapacityError(f"{k} users exceed spreading gain {m}")
    if k < 1 or n < 1:
        raise ParameterError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    # independent draw without replacement for every bit
    idx = np.argsort(rng.random((n, m)), axis=1)[:, :k]
    return CodeSchedule(walsh=w, column_indices=idx)


def _check(k: int, n: int, codes: CodeSchedule) -> None:
    if (k, n) != (codes.k, codes.n):
        raise DimensionError(
            f"data is {k}x{n} but code schedule is for {codes.k} users x {codes.n} bits"
        )


def spread(x, codes: CodeSchedule) -> np.ndarray:
    """Column n of the result is ``C^(n) @ x[:, n]``; returns an M x N matrix."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise DimensionError(f"bits must be 2-D, got shape {x.shape}")
    _check(*x.shape, codes)
    # S[m, n] = sum_k W[m, idx[n, k]] * x[k, n]
    chips = codes.walsh[:, codes.column_indices]  # (M, N, K)
    return np.einsum("mnk,kn->mn", chips, x)


def despread(s_hat, codes: CodeSchedule) -> np.ndarray:
    """Column n of the result is ``C^(n)^T @ s_hat[:, n] / M``; returns K x N."""
    s_hat = np.asarray(s_hat)
    m, n = s_hat.shape
    if m != codes.m or n != codes.n:
        raise DimensionError(
            f"signal is {m}x{n} but code schedule expects {codes.m}x{codes.n}"
        )
    chips = codes.walsh[:, codes.column_indices]
    return np.einsum("mnk,mn->kn", chips, s_hat) / m
