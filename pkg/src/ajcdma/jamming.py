"""Rank-controlled multi-tone frequency-hopping (MT-FH) jammer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalFailure, ParameterError
from .numerics import idft

MAX_REDRAWS = 100


@dataclass(frozen=True)
class JammingSpec:
    """Jammer parameters.

    ``m`` tones (one per chip of a bit), ``n_bits`` bit durations and
    ``rank_r`` hop segments. ``tone_prob`` is the chance that any given tone
    is occupied. ``sjr_db`` is carried for the caller; the jamming power is
    always fixed afterwards with :func:`scale_to_sjr`.
    """

    m: int
    n_bits: int
    rank_r: int = 1
    tone_prob: float = 0.1
    sjr_db: float = 0.0
    seed: object = None

    def __post_init__(self):
        if self.m < 1 or self.n_bits < 1:
            raise ParameterError("m and n_bits must be positive")
        if not 1 <= self.rank_r <= self.n_bits:
            raise ParameterError(f"rank must lie in [1, {self.n_bits}], got {self.rank_r}")
        if not 0.0 < self.tone_prob <= 1.0:
            raise ParameterError(f"tone probability must lie in (0, 1], got {self.tone_prob}")


@dataclass(frozen=True)
class JammingMatrix:
    values: np.ndarray  # M x N complex
    freq_vectors: np.ndarray  # M x r spectra, one per hop segment
    segments: np.ndarray  # length N, segment index of every bit

    def scaled(self, alpha: float) -> "JammingMatrix":
        return JammingMatrix(self.values * alpha, self.freq_vectors * alpha, self.segments)


def hop_segments(n_bits: int, rank_r: int) -> np.ndarray:
    """Segment index of each bit for ``rank_r`` contiguous hops of length ceil(N/r).

    Ceil-length blocks can leave fewer than ``rank_r`` nonempty segments
    (e.g. N=10, r=4 gives lengths 3,3,3,1 but N=10, r=6 gives 2,2,2,2,2);
    in that case the remaining bits are split so every segment is nonempty.
    """
    seg_len = math.ceil(n_bits / rank_r)
    seg = np.arange(n_bits) // seg_len
    if seg[-1] == rank_r - 1:
        return seg
    # fall back to near-equal contiguous blocks so that exactly rank_r hops exist
    bounds = np.linspace(0, n_bits, rank_r + 1).round().astype(int)
    return np.searchsorted(bounds, np.arange(n_bits), side="right") - 1


def _draw_spectrum(rng: np.random.Generator, m: int, p: float, power: float) -> np.ndarray:
    amp = math.sqrt(power / (m * p))
    for _ in range(MAX_REDRAWS):
        occupied = rng.random(m) < p
        if occupied.any():
            z = rng.standard_normal(m)
            return np.where(occupied, z * amp, 0.0).astype(complex)
    raise NumericalFailure(f"no occupied tone after {MAX_REDRAWS} draws (p={p}, M={m})")


def gen_jamming(spec: JammingSpec, power: float = 1.0) -> JammingMatrix:
    """Draw ``rank_r`` sparse Gaussian spectra and hold each one for a hop segment.

    Each bit column is the inverse DFT of its segment's spectrum, so the
    result has rank at most ``rank_r``.
    """
    rng = np.random.default_rng(spec.seed)
    freq = np.column_stack(
        [_draw_spectrum(rng, spec.m, spec.tone_prob, power) for _ in range(spec.rank_r)]
    )
    segments = hop_segments(spec.n_bits, spec.rank_r)
    time_cols = idft(freq, axis=0)
    return JammingMatrix(values=time_cols[:, segments], freq_vectors=freq, segments=segments)


def sjr_db(s, j) -> float:
    return 20.0 * math.log10(np.linalg.norm(s) / np.linalg.norm(j))


def scale_to_sjr(s, j: JammingMatrix, target_db: float) -> JammingMatrix:
    """Rescale ``j`` so that 20 log10(||S||_F / ||J||_F) equals ``target_db``."""
    jn = np.linalg.norm(j.values)
    if jn == 0:
        raise DegenerateInputError("cannot scale an all-zero jamming matrix")
    alpha = np.linalg.norm(s) / jn * 10.0 ** (-target_db / 20.0)
    return j.scaled(alpha)
