"""The two receiver chains and BER scoring.

Type1: equalize -> despread -> FastICA.
Type2: equalize -> Robust PCA in the Walsh domain -> despread -> FastICA.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, equalize
from .errors import DimensionError, ParameterError
from .ica import IcaParams, fast_ica, take_real
from .rpca import RpcaParams, rpca_ialm
from .waveform import CodeSchedule, despread


class ReceiverKind(str, enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"

    @classmethod
    def parse(cls, value) -> "ReceiverKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        key = key.replace("receiver", "")
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown receiver kind {value!r}") from None


@dataclass(frozen=True)
class ReceiverConfig:
    kind: ReceiverKind = ReceiverKind.TYPE2
    rpca: RpcaParams | None = None
    ica: IcaParams = field(default_factory=IcaParams)

    def __post_init__(self):
        kind = ReceiverKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ReceiverKind.TYPE2 and self.rpca is None:
            object.__setattr__(self, "rpca", RpcaParams())
        if kind is ReceiverKind.TYPE1 and self.rpca is not None:
            raise ParameterError("a Type1 receiver takes no Robust PCA parameters")

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass
class Diagnostics:
    rpca_iterations: int = 0
    rpca_converged: bool = True
    ica_converged: bool = True
    rpca_feasibility: float = 0.0


@dataclass
class TrialOutcome:
    ber: float
    bit_errors: int
    n_bits_total: int
    rpca_iterations: int = 0
    runtime_seconds: float = 0.0
    converged_flags: dict = field(default_factory=dict)


def _ica(x_tilde, cfg: ReceiverConfig, k: int):
    params = cfg.ica
    if params.n_components is None:
        params = IcaParams(k, params.tol, params.max_iter, params.seed)
    return fast_ica(take_real(x_tilde), params)


def to_walsh(d, w) -> np.ndarray:
    return w.T @ d


def from_walsh(r, w) -> np.ndarray:
    """Inverse of :func:`to_walsh`, using W^T W = M I."""
    return (w @ r) / w.shape[0]


def type2_detail(y, ch: ChannelRealization, codes: CodeSchedule, w, cfg: ReceiverConfig,
                 use_rpca: bool = True):
    d = equalize(y, ch)
    q = to_walsh(d, w)
    diag = Diagnostics()
    if use_rpca:
        dec = rpca_ialm(q, cfg.rpca)
        r = dec.sparse
        diag.rpca_iterations = dec.iterations
        diag.rpca_converged = dec.converged
        qn = np.linalg.norm(q)
        diag.rpca_feasibility = float(np.linalg.norm(dec.low_rank + dec.sparse - q) / qn) if qn else 0.0
    else:
        r = q
    s_hat = from_walsh(r, w)
    sep = _ica(despread(s_hat, codes), cfg, codes.k)
    diag.ica_converged = sep.converged
    return sep.sources, diag


def type1_detail(y, ch: ChannelRealization, codes: CodeSchedule, w, cfg: ReceiverConfig):
    d = equalize(y, ch)
    sep = _ica(despread(d, codes), cfg, codes.k)
    return sep.sources, Diagnostics(ica_converged=sep.converged)


def run_type2(y, ch, codes, w, cfg: ReceiverConfig) -> np.ndarray:
    if cfg.kind is not ReceiverKind.TYPE2:
        raise ParameterError("run_type2 needs a Type2 configuration")
    return type2_detail(y, ch, codes, w, cfg)[0]


def run_type1(y, ch, codes, w, cfg: ReceiverConfig) -> np.ndarray:
    if cfg.kind is not ReceiverKind.TYPE1:
        raise ParameterError("run_type1 needs a Type1 configuration")
    return type1_detail(y, ch, codes, w, cfg)[0]


def run_receiver(y, ch, codes, w, cfg: ReceiverConfig):
    """Dispatch on ``cfg.kind``; returns ``(x_hat, Diagnostics)``."""
    if cfg.kind is ReceiverKind.TYPE2:
        return type2_detail(y, ch, codes, w, cfg)
    return type1_detail(y, ch, codes, w, cfg)


def greedy_assignment(corr) -> np.ndarray:
    """Match estimated rows to true rows by repeatedly taking the largest
    remaining |correlation|. Returns ``perm`` with ``perm[i]`` = true row of
    estimate ``i``. Ties go to the lowest flat index (lower estimated row,
    then lower true row)."""
    c = np.abs(np.asarray(corr, dtype=float)).copy()
    k = c.shape[0]
    perm = np.full(k, -1)
    for _ in range(k):
        i, j = np.unravel_index(np.argmax(c), c.shape)
        perm[i] = j
        c[i, :] = -np.inf
        c[:, j] = -np.inf
    return perm


def _corr(a, b) -> np.ndarray:
    a = a - a.mean(axis=1, keepdims=True)
    b = b - b.mean(axis=1, keepdims=True)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    return (a @ b.T) / np.outer(na, nb)


def resolve_ambiguity(x_hat, x_true) -> np.ndarray:
    """Genie-aided fix of ICA's sign and permutation ambiguity.

    Returns hard decisions (+1/-1) with rows in the order of ``x_true``.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape:
        raise DimensionError(f"estimate {x_hat.shape} and truth {x_true.shape} differ")
    corr = _corr(x_hat, x_true)
    perm = greedy_assignment(corr)
    out = np.empty(x_true.shape, dtype=np.int8)
    for i, j in enumerate(perm):
        sign = -1.0 if corr[i, j] < 0 else 1.0
        out[j] = np.where(sign * x_hat[i] >= 0, 1, -1)
    return out


def ber(resolved, x_true) -> TrialOutcome:
    resolved = np.asarray(resolved)
    x_true = np.asarray(x_true)
    if resolved.shape != x_true.shape:
        raise DimensionError(f"decisions {resolved.shape} and truth {x_true.shape} differ")
    errors = int(np.count_nonzero(resolved != x_true))
    return TrialOutcome(ber=errors / x_true.size, bit_errors=errors, n_bits_total=x_true.size)
