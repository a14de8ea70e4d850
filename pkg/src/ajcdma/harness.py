"""Monte Carlo driver: sweeps, seeding, aggregation and CSV output."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import flat_channel, get_profile, received, sample_channel, check_invertible
from .config import ExperimentConfig
from .errors import AjcdmaError, SingularChannelError
from .ica import IcaParams
from .jamming import JammingSpec, gen_jamming, scale_to_sjr
from .receiver import ReceiverConfig, ber, resolve_ambiguity, run_receiver
from .waveform import gen_bits, gen_code_schedule, spread, walsh

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "snr_db", "sjr_db", "rank", "receiver", "k", "m", "n", "trials",
    "ber_mean", "ber_stderr", "runtime_mean_s", "rpca_iter_mean",
)
THREADS_ENV = "AJCDMA_THREADS"
MAX_CHANNEL_DRAWS = 100

# stream ids for the per-trial seed tree
_BITS, _CODES, _JAM, _CHAN, _NOISE, _ICA = range(6)


@dataclass
class ResultRow:
    snr_db: float
    sjr_db: float
    rank: int
    receiver: str
    k: int
    m: int
    n: int
    trials: int
    ber_mean: float
    ber_stderr: float
    runtime_mean_s: float
    rpca_iter_mean: float
    # not part of the CSV
    trial_bers: list[float] = field(default_factory=list, repr=False)
    failures: int = 0

    def csv_fields(self) -> list[str]:
        return [
            _fmt(self.snr_db), _fmt(self.sjr_db), str(self.rank), self.receiver,
            str(self.k), str(self.m), str(self.n), str(self.trials),
            _fmt(self.ber_mean), _fmt(self.ber_stderr),
            _fmt(self.runtime_mean_s), _fmt(self.rpca_iter_mean),
        ]


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return f"{x:.16e}"


def point_key(snr_db: float, sjr_db: float, rank: int) -> int:
    """Stable 64-bit key for a sweep point, independent of its position in the sweep."""
    digest = hashlib.blake2b(f"{snr_db!r}|{sjr_db!r}|{rank}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def trial_seeds(master_seed: int, key: int, trial: int) -> list[np.random.SeedSequence]:
    root = np.random.SeedSequence([int(master_seed) & (2**64 - 1), key, int(trial)])
    return root.spawn(6)


def measure_runtime(fn: Callable, *args, **kwargs):
    """Call ``fn`` and return ``(result, elapsed_seconds)`` on the monotonic clock."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@dataclass
class TrialData:
    bits: np.ndarray
    codes: object
    walsh: np.ndarray
    signal: np.ndarray
    jamming: np.ndarray
    channel: object
    received: np.ndarray
    channel_redraws: int = 0


def draw_channel(profile, m: int, seed: np.random.SeedSequence):
    """Sample an invertible downlink, redrawing on spectral nulls."""
    if profile.name == "flat" and profile.num_paths == 1 and not profile.has_los:
        return flat_channel(m), 0
    for attempt, child in enumerate(seed.spawn(MAX_CHANNEL_DRAWS)):
        ch = sample_channel(profile, m, child)
        try:
            check_invertible(ch)
            return ch, attempt
        except SingularChannelError:
            continue
    raise SingularChannelError(f"no invertible channel in {MAX_CHANNEL_DRAWS} draws")


def make_trial(cfg: ExperimentConfig, snr_db: float, sjr_db: float, rank: int,
               seeds, w=None) -> TrialData:
    k, m, n = cfg.k_users, cfg.m_code_len, cfg.n_bits
    w = walsh(m) if w is None else w
    x = gen_bits(k, n, seeds[_BITS])
    codes = gen_code_schedule(w, k, n, seeds[_CODES])
    s = spread(x, codes).astype(complex)
    jam = gen_jamming(JammingSpec(m, n, rank, cfg.tone_prob, sjr_db, seeds[_JAM]))
    if math.isinf(sjr_db) and sjr_db > 0:
        j = np.zeros_like(s)
    else:
        j = scale_to_sjr(s, jam, sjr_db).values
    ch, redraws = draw_channel(get_profile(cfg.channel_profile), m, seeds[_CHAN])
    y = received(s, j, ch, snr_db, seeds[_NOISE])
    return TrialData(x, codes, w, s, j, ch, y, redraws)


@dataclass
class TrialResult:
    ber: dict
    runtime: dict
    rpca_iterations: dict
    channel_redraws: int = 0
    error: str | None = None


def run_trial(cfg: ExperimentConfig, snr_db, sjr_db, rank, trial: int, w=None) -> TrialResult:
    seeds = trial_seeds(cfg.master_seed, point_key(snr_db, sjr_db, rank), trial)
    try:
        data = make_trial(cfg, snr_db, sjr_db, rank, seeds, w)
        bers, times, iters = {}, {}, {}
        for rc in cfg.receivers:
            rc = _with_ica_seed(rc, seeds[_ICA])
            (x_hat, diag), dt = measure_runtime(
                run_receiver, data.received, data.channel, data.codes, data.walsh, rc
            )
            bers[rc.name] = ber(resolve_ambiguity(x_hat, data.bits), data.bits).ber
            times[rc.name] = dt if cfg.timing else 0.0
            iters[rc.name] = diag.rpca_iterations
        return TrialResult(bers, times, iters, data.channel_redraws)
    except AjcdmaError as exc:
        log.warning("trial %d at snr=%s sjr=%s rank=%s aborted: %s", trial, snr_db, sjr_db, rank, exc)
        return TrialResult({}, {}, {}, error=str(exc))


def _with_ica_seed(rc: ReceiverConfig, seed) -> ReceiverConfig:
    ica = rc.ica
    if ica.seed is None:
        ica = IcaParams(ica.n_components, ica.tol, ica.max_iter, seed)
    return ReceiverConfig(rc.kind, rpca=rc.rpca, ica=ica)


def _resolve_workers(cfg: ExperimentConfig, workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return cfg.workers


def sweep_points(cfg: ExperimentConfig):
    return list(product(cfg.snr_db_list, cfg.sjr_db_list, cfg.rank_list))


def run_experiment(cfg: ExperimentConfig, workers: int | None = None,
                   write: bool = True) -> list[ResultRow]:
    """Run the full sweep and aggregate one row per (point, receiver).

    Every trial owns its seeds, so the output does not depend on ``workers``.
    """
    points = sweep_points(cfg)
    w = walsh(cfg.m_code_len)
    tasks = [(p, t) for p in points for t in range(cfg.trials)]
    n_workers = _resolve_workers(cfg, workers)

    def work(task):
        (snr, sjr, rank), t = task
        return run_trial(cfg, snr, sjr, rank, t, w)

    if n_workers == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(work, tasks))

    redraws = sum(r.channel_redraws for r in results)
    if redraws:
        log.info("resampled %d singular channel draws", redraws)

    rows: list[ResultRow] = []
    for i, (snr, sjr, rank) in enumerate(points):
        chunk = results[i * cfg.trials:(i + 1) * cfg.trials]
        ok = [r for r in chunk if r.error is None]
        failures = len(chunk) - len(ok)
        for rc in cfg.receivers:
            rows.append(aggregate(cfg, snr, sjr, rank, rc.name, ok, failures))
    if write and cfg.output_path:
        emit_csv(rows, cfg.output_path)
    return rows


def aggregate(cfg, snr, sjr, rank, name, ok: list[TrialResult], failures: int) -> ResultRow:
    bers = [r.ber[name] for r in ok]
    n_ok = len(bers)
    if n_ok:
        arr = np.asarray(bers)
        # equal-sized trials, so pooled bit errors / pooled bits == mean per-trial BER
        mean = float(arr.mean())
        stderr = float(arr.std(ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
        runtime = float(np.mean([r.runtime[name] for r in ok]))
        iters = float(np.mean([r.rpca_iterations[name] for r in ok]))
    else:
        mean = stderr = runtime = iters = float("nan")
    return ResultRow(snr, sjr, rank, name, cfg.k_users, cfg.m_code_len, cfg.n_bits,
                     n_ok, mean, stderr, runtime, iters, bers, failures)


def emit_csv(rows: list[ResultRow], path) -> None:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow(row.csv_fields())
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_csv(path) -> list[ResultRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            ResultRow(
                float(r["snr_db"]), float(r["sjr_db"]), int(r["rank"]), r["receiver"],
                int(r["k"]), int(r["m"]), int(r["n"]), int(r["trials"]),
                float(r["ber_mean"]), float(r["ber_stderr"]),
                float(r["runtime_mean_s"]), float(r["rpca_iter_mean"]),
            )
            for r in reader
        ]
