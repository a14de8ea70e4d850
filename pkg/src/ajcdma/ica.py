"""FastICA with a tanh contrast and deflationary extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .numerics import eig_hermitian

WHITEN_RCOND = 1e-10
MAX_RESTARTS = 5


@dataclass(frozen=True)
class IcaParams:
    n_components: int | None = None  # None: as many as input rows
    tol: float = 1e-6
    max_iter: int = 200
    seed: object = None

    def __post_init__(self):
        if self.n_components is not None and self.n_components < 1:
            raise ParameterError("n_components must be at least 1")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")


@dataclass
class SeparationResult:
    sources: np.ndarray  # K x N
    unmixing: np.ndarray  # K x K, rows act on whitened data
    whitening: np.ndarray  # K x K
    iterations_per_component: list[int] = field(default_factory=list)
    converged: bool = True


def take_real(x) -> np.ndarray:
    return np.real(np.asarray(x)).astype(float)


def center(x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape[1] < 2:
        raise ParameterError("centering needs at least two samples")
    means = x.mean(axis=1)
    return x - means[:, None], means


def whiten(x) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric (ZCA) whitening ``Q diag(gamma)^-1/2 Q^T`` of centered rows.

    Raises DegenerateInputError when the sample covariance is singular, i.e.
    there are fewer effective sources than rows.
    """
    x = np.asarray(x, dtype=float)
    cov = np.atleast_2d(np.cov(x))
    q, gamma = eig_hermitian(cov)
    if gamma[-1] <= 0 or gamma[0] <= WHITEN_RCOND * gamma[-1]:
        raise DegenerateInputError(
            f"covariance is rank deficient (eigenvalues {gamma[0]:.3e} .. {gamma[-1]:.3e})"
        )
    transform = (q / np.sqrt(gamma)) @ q.T
    return transform @ x, transform


def _one_unit(z, w, basis, tol, max_iter):
    """Fixed-point iteration for one weight vector, deflated against ``basis``."""
    n = z.shape[1]
    for it in range(1, max_iter + 1):
        wx = w @ z
        gwx = np.tanh(wx)
        w_new = z @ gwx / n - np.mean(1.0 - gwx**2) * w
        if basis.shape[0]:
            w_new -= basis.T @ (basis @ w_new)
        norm = np.linalg.norm(w_new)
        if norm == 0:
            return w, it, False
        w_new /= norm
        done = abs(w_new @ w) > 1.0 - tol
        w = w_new
        if done:
            return w, it, True
    return w, max_iter, False


def fast_ica(x, params: IcaParams | None = None) -> SeparationResult:
    """Center, whiten and extract components one at a time.

    Each component is restarted from a fresh random vector up to MAX_RESTARTS
    times if it fails to converge; if every attempt fails the last iterate is
    kept and ``converged`` is False.
    """
    params = params or IcaParams()
    x = take_real(x)
    k_rows = x.shape[0]
    n_comp = params.n_components or k_rows
    if n_comp > k_rows:
        raise ParameterError(f"{n_comp} components requested from {k_rows} rows")

    xc, _ = center(x)
    z, transform = whiten(xc)
    rng = np.random.default_rng(params.seed)

    weights = np.zeros((0, k_rows))
    iters: list[int] = []
    all_ok = True
    for _ in range(n_comp):
        total = 0
        for _attempt in range(MAX_RESTARTS):
            w = rng.standard_normal(k_rows)
            if weights.shape[0]:
                w -= weights.T @ (weights @ w)
            w /= np.linalg.norm(w)
            w, used, ok = _one_unit(z, w, weights, params.tol, params.max_iter)
            total += used
            if ok:
                break
        all_ok &= ok
        iters.append(total)
        weights = np.vstack([weights, w])

    return SeparationResult(
        sources=weights @ z,
        unmixing=weights,
        whitening=transform,
        iterations_per_component=iters,
        converged=bool(all_ok),
    )
