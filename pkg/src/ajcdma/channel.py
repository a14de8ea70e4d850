"""Uplink relay, circulant frequency-selective downlink, AWGN and equalization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, ParameterError, SingularChannelError
from .numerics import circulant, dft, idft, pad

RICE_FACTOR = 10.0
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class ChannelProfile:
    name: str
    delays: tuple[int, ...]
    gains_db: tuple[float, ...]
    has_los: bool = False

    def __post_init__(self):
        delays = tuple(int(d) for d in self.delays)
        gains = tuple(float(g) for g in self.gains_db)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains_db", gains)
        if not delays:
            raise ParameterError("a channel profile needs at least one path")
        if len(delays) != len(gains):
            raise ParameterError("delays and gains_db must have the same length")
        if delays[0] != 0:
            raise ParameterError("first path delay must be 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ParameterError("path delays must be strictly increasing")

    @property
    def num_paths(self) -> int:
        return len(self.delays)

    @property
    def span(self) -> int:
        return self.delays[-1] + 1

    @classmethod
    def from_mapping(cls, data: dict) -> "ChannelProfile":
        return cls(
            name=str(data.get("name", "custom")),
            delays=tuple(data["delays"]),
            gains_db=tuple(data["gains_db"]),
            has_los=bool(data.get("has_los", False)),
        )

    @classmethod
    def from_file(cls, path) -> "ChannelProfile":
        from .config import load_toml

        data = load_toml(path)
        data = data.get("channel", data)
        data.setdefault("name", Path(path).stem)
        return cls.from_mapping(data)


_URBAN = dict(delays=(0, 2, 4, 9, 13), gains_db=(0.0, -6.0, -9.0, -12.0, -15.0))
_RURAL = dict(delays=(0, 3, 8), gains_db=(0.0, -8.0, -14.0))

PROFILES: dict[str, ChannelProfile] = {
    "flat": ChannelProfile("flat", (0,), (0.0,), has_los=False),
    "urban-los": ChannelProfile("urban-los", has_los=True, **_URBAN),
    "urban-nlos": ChannelProfile("urban-nlos", has_los=False, **_URBAN),
    "rural-los": ChannelProfile("rural-los", has_los=True, **_RURAL),
    "rural-nlos": ChannelProfile("rural-nlos", has_los=False, **_RURAL),
}


def get_profile(name_or_path) -> ChannelProfile:
    """Look up a built-in profile by name, or load one from a TOML file."""
    if isinstance(name_or_path, ChannelProfile):
        return name_or_path
    key = str(name_or_path)
    if key in PROFILES:
        return PROFILES[key]
    if Path(key).is_file():
        return ChannelProfile.from_file(key)
    raise ParameterError(f"unknown channel profile {key!r} (built-ins: {sorted(PROFILES)})")


@dataclass(frozen=True)
class ChannelRealization:
    """One downlink draw. ``impulse`` is the delay-domain response (taps placed
    at their delays), ``matrix`` the corresponding M x M circulant."""

    taps: np.ndarray
    impulse: np.ndarray
    m: int
    profile: ChannelProfile | None = None
    _freq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_freq", dft(pad(self.impulse, self.m)))

    @property
    def matrix(self) -> np.ndarray:
        return circulant(self.impulse, self.m)

    @property
    def freq_response(self) -> np.ndarray:
        return self._freq


def flat_channel(m: int, gain: complex = 1.0) -> ChannelRealization:
    return ChannelRealization(np.array([gain], dtype=complex), np.array([gain], dtype=complex), m)


def _cgauss(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def sample_channel(profile: ChannelProfile, m: int, seed=None) -> ChannelRealization:
    """Draw complex Gaussian taps with the profile's mean powers, normalized to unit energy.

    With ``has_los`` the first tap is Rician with factor RICE_FACTOR; all other
    taps (and every tap of an nLOS profile) are Rayleigh.
    """
    if profile.span > m:
        raise DimensionError(f"profile spans {profile.span} chips but M = {m}")
    rng = np.random.default_rng(seed)
    amp = np.sqrt(10.0 ** (np.asarray(profile.gains_db) / 10.0))
    g = _cgauss(rng, profile.num_paths)
    if profile.has_los:
        k = RICE_FACTOR
        g[0] = math.sqrt(k / (k + 1)) + math.sqrt(1 / (k + 1)) * g[0]
    taps = amp * g
    taps = taps / np.linalg.norm(taps)
    impulse = np.zeros(profile.span, dtype=complex)
    impulse[list(profile.delays)] = taps
    return ChannelRealization(taps=taps, impulse=impulse, m=m, profile=profile)


def apply_uplink(s_plus_j):
    """Transponder plus uplink channel, modelled as the identity.

    The relay gain is assumed to cancel the LOS-dominated uplink exactly.
    Kept as its own stage so a different model can be hooked in.
    """
    return s_plus_j


def noise_like(s, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise rescaled so 20 log10(||S||/||V||) == snr_db."""
    s = np.asarray(s)
    v = _cgauss(rng, s.shape)
    if math.isinf(snr_db) and snr_db > 0:
        return np.zeros(s.shape, dtype=complex)
    target = np.linalg.norm(s) * 10.0 ** (-snr_db / 20.0)
    return v * (target / np.linalg.norm(v))


def apply_downlink(x, ch: ChannelRealization) -> np.ndarray:
    """``H_down @ x`` computed column-wise in the DFT domain."""
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != ch.m:
        raise DimensionError(f"signal has {x.shape[0]} rows, channel expects {ch.m}")
    return idft(ch.freq_response[:, None] * dft(x))


def received(
    s,
    j,
    ch: ChannelRealization,
    snr_db: float,
    seed=None,
    uplink: Callable = apply_uplink,
) -> np.ndarray:
    """Y = H_down (uplink(S + J)) + V with V at the requested SNR.

    ``snr_db = inf`` disables noise. ``j`` may be None, a JammingMatrix or an array.
    """
    s = np.asarray(s, dtype=complex)
    jv = np.zeros_like(s) if j is None else np.asarray(getattr(j, "values", j), dtype=complex)
    if jv.shape != s.shape:
        raise DimensionError(f"signal {s.shape} and jamming {jv.shape} differ in shape")
    rng = np.random.default_rng(seed)
    y = apply_downlink(uplink(s + jv), ch)
    return y + noise_like(s, snr_db, rng)


def check_invertible(ch: ChannelRealization) -> None:
    mag = np.abs(ch.freq_response)
    if mag.min() < SINGULAR_RTOL * mag.max():
        raise SingularChannelError(
            f"downlink has a spectral null (min |H| / max |H| = {mag.min() / mag.max():.3e})"
        )


def equalize(y, ch: ChannelRealization) -> np.ndarray:
    """Zero-forcing inverse of the circulant downlink: D = H_down^-1 Y."""
    y = np.asarray(y, dtype=complex)
    if y.shape[0] != ch.m:
        raise DimensionError(f"signal has {y.shape[0]} rows, channel expects {ch.m}")
    check_invertible(ch)
    return idft(dft(y) / ch.freq_response[:, None])


def profile_names() -> Sequence[str]:
    return tuple(PROFILES)
