"""Experiment configuration files.

A config is a flat TOML document::

    k_users = 3
    m_code_len = 64
    n_bits = 200
    snr_db_list = [10.0]
    sjr_db_list = [-25, -20, -15, -10, -5, 0]
    rank_list = [1, "N/10", "N"]
    tone_prob = 0.1
    channel_profile = "rural-nlos"     # built-in name or path to a profile file
    receivers = ["type1", "type2"]
    trials = 50
    master_seed = 2024
    output_path = "results.csv"
    workers = 1                        # optional, threads
    timing = true                      # optional; false writes 0 runtimes

    [rpca]                             # optional solver overrides
    tol = 1e-7

    [ica]
    tol = 1e-6

``inf`` is accepted for SNR (noise off) and SJR (jamming off). Rank entries
may be integers or the strings ``"N"`` / ``"N/<d>"``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ParameterError
from .ica import IcaParams
from .receiver import ReceiverConfig, ReceiverKind
from .rpca import RpcaParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def load_toml(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParameterError(f"{path}: {exc}") from exc


def parse_rank(value, n_bits: int) -> int:
    if isinstance(value, str):
        text = value.replace(" ", "").upper()
        if text == "N":
            return n_bits
        if text.startswith("N/"):
            return max(1, n_bits // int(text[2:]))
        return int(text)
    return int(value)


@dataclass(frozen=True)
class ExperimentConfig:
    k_users: int = 3
    m_code_len: int = 64
    n_bits: int = 200
    snr_db_list: tuple[float, ...] = (10.0,)
    sjr_db_list: tuple[float, ...] = (-20.0,)
    rank_list: tuple[int, ...] = (1,)
    tone_prob: float = 0.1
    channel_profile: str = "flat"
    receivers: tuple[ReceiverConfig, ...] = field(
        default_factory=lambda: (ReceiverConfig("type1"), ReceiverConfig("type2"))
    )
    trials: int = 10
    master_seed: int = 0
    output_path: str | None = None
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("snr_db_list", tuple(float(v) for v in self.snr_db_list))
        set_("sjr_db_list", tuple(float(v) for v in self.sjr_db_list))
        set_("rank_list", tuple(parse_rank(r, self.n_bits) for r in self.rank_list))
        set_("receivers", tuple(self.receivers))
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if not (self.snr_db_list and self.sjr_db_list and self.rank_list and self.receivers):
            raise ParameterError("sweep lists and receivers must be nonempty")
        if self.k_users > self.m_code_len:
            raise ParameterError(f"k_users={self.k_users} exceeds m_code_len={self.m_code_len}")
        if any(not 1 <= r <= self.n_bits for r in self.rank_list):
            raise ParameterError(f"every rank must lie in [1, {self.n_bits}]")
        if any(math.isnan(v) for v in self.snr_db_list + self.sjr_db_list):
            raise ParameterError("SNR/SJR values must not be NaN")
        names = [rc.name for rc in self.receivers]
        if len(set(names)) != len(names):
            raise ParameterError(f"receiver kinds must be unique, got {names}")
        if self.workers < 1:
            raise ParameterError("workers must be at least 1")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    @classmethod
    def from_mapping(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        rpca_kw = data.pop("rpca", {}) or {}
        ica_kw = data.pop("ica", {}) or {}
        if "lambda" in rpca_kw:
            rpca_kw["lam"] = rpca_kw.pop("lambda")
        kinds = data.pop("receivers", ["type1", "type2"])
        receivers = []
        for kind in kinds:
            kind = ReceiverKind.parse(kind)
            rp = RpcaParams(**rpca_kw) if kind is ReceiverKind.TYPE2 else None
            receivers.append(ReceiverConfig(kind, rpca=rp, ica=IcaParams(**ica_kw)))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        profile = data.get("channel_profile")
        if base_dir is not None and profile and (base_dir / str(profile)).is_file():
            data["channel_profile"] = str(base_dir / str(profile))
        return cls(receivers=tuple(receivers), **data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_mapping(load_toml(path), base_dir=path.parent)
