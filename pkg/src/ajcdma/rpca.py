"""Robust PCA by the inexact augmented Lagrange multiplier method.

Splits an observation ``q`` into ``low_rank + sparse`` by minimizing
``||L||_* + lam * ||R||_1`` subject to ``q = L + R``. In the receiver ``q`` is
the equalized block mapped into the Walsh domain: the jammer is low-rank
there and the spread user signal is sparse (K nonzeros per column).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .numerics import soft_threshold, spectral_norm, svd


@dataclass(frozen=True)
class RpcaParams:
    """Solver settings. ``lam=None`` means 1/sqrt(M) for an M-row input."""

    lam: float | None = None
    mu0_factor: float = 1.25
    mu_growth: float = 1.5
    mu_cap_factor: float = 1e7
    tol: float = 1e-7
    max_iter: int = 500

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise ParameterError("lambda must be positive")
        if self.mu_growth <= 1:
            raise ParameterError("mu growth factor must exceed 1")
        if self.tol <= 0:
            raise ParameterError("tolerance must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")

    def weight(self, m: int) -> float:
        return self.lam if self.lam is not None else 1.0 / math.sqrt(m)


@dataclass
class DecompositionResult:
    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False


class IalmState(NamedTuple):
    low_rank: np.ndarray
    sparse: np.ndarray
    multiplier: np.ndarray


def svt_step(a, mu_inv: float) -> np.ndarray:
    """Singular value thresholding: prox of ``mu_inv * ||.||_*`` at ``a``."""
    if mu_inv < 0:
        raise ParameterError("threshold must be nonnegative")
    if mu_inv == 0:
        return np.array(a, copy=True)
    u, s, v = svd(a)
    s = np.maximum(s - mu_inv, 0.0)
    keep = s > 0
    return (u[:, keep] * s[keep]) @ v[:, keep].conj().T


def ialm_step(q, sparse, multiplier, mu: float, lam: float) -> IalmState:
    """One pass of the alternating updates: SVT for L, shrinkage for R, then
    the multiplier ascent step. ``mu`` is the penalty for this iteration."""
    mu_inv = 1.0 / mu
    low_rank = svt_step(q - sparse + mu_inv * multiplier, mu_inv)
    sparse = soft_threshold(q - low_rank + mu_inv * multiplier, lam * mu_inv)
    multiplier = multiplier + mu * (q - low_rank - sparse)
    return IalmState(low_rank, sparse, multiplier)


def rpca_ialm(q, params: RpcaParams | None = None) -> DecompositionResult:
    params = params or RpcaParams()
    q = np.asarray(q)
    q = q.astype(complex) if np.iscomplexobj(q) else q.astype(float)
    q_norm = np.linalg.norm(q)
    if q_norm == 0:
        z = np.zeros_like(q)
        return DecompositionResult(z, z.copy(), 0, [], True)

    lam = params.weight(q.shape[0])
    two_norm = spectral_norm(q)
    multiplier = q / max(two_norm, np.max(np.abs(q)) / lam)
    sparse = np.zeros_like(q)
    low_rank = np.zeros_like(q)
    mu = params.mu0_factor / two_norm
    mu_cap = params.mu_cap_factor * mu

    history: list[float] = []
    converged = False
    k = 0
    while k < params.max_iter:
        low_rank, sparse, multiplier = ialm_step(q, sparse, multiplier, mu, lam)
        k += 1
        res = np.linalg.norm(q - low_rank - sparse) / q_norm
        history.append(float(res))
        if res < params.tol:
            converged = True
            break
        mu = min(params.mu_growth * mu, mu_cap)

    return DecompositionResult(low_rank, sparse, k, history, converged)


def objective(low_rank, sparse, lam: float) -> float:
    return float(np.linalg.svd(low_rank, compute_uv=False).sum() + lam * np.abs(sparse).sum())
