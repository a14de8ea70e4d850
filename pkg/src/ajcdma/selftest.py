"""Fast built-in property checks, run by ``ajcdma selftest``.

Each check returns ``(passed, detail)``. These are small-size versions of the
test suite's identities so an installed copy can be sanity-checked without
the repository's tests directory.
"""

from __future__ import annotations

import numpy as np

from .channel import equalize, sample_channel, apply_downlink, PROFILES
from .ica import IcaParams, fast_ica, whiten, center
from .numerics import circulant, circulant_eigenvalues, dft, idft
from .rpca import rpca_ialm
from .waveform import despread, gen_bits, gen_code_schedule, spread, walsh


def check_walsh():
    for p in range(1, 11):
        w = walsh(2**p)
        if not np.array_equal(w.T @ w, (2**p) * np.eye(2**p, dtype=np.int64)):
            return False, f"W^T W != M I at M={2**p}"
    return True, "W^T W = M I for M = 2..1024"


def check_spread_roundtrip():
    rng = np.random.default_rng(1)
    for _ in range(20):
        m = 2 ** int(rng.integers(1, 8))
        k = int(rng.integers(1, m + 1))
        n = int(rng.integers(1, 40))
        w = walsh(m)
        x = gen_bits(k, n, rng)
        c = gen_code_schedule(w, k, n, rng)
        if not np.array_equal(despread(spread(x, c), c), x):
            return False, f"roundtrip failed at K={k} M={m} N={n}"
    return True, "despread(spread(X)) == X on 20 random shapes"


def check_dft_and_circulant():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    rt = np.max(np.abs(idft(dft(x)) - x))
    h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    c = circulant(h, 32)
    f = dft(np.eye(32))
    diag = f @ c @ np.linalg.inv(f)
    off = np.max(np.abs(diag - np.diag(np.diag(diag))))
    eig_err = np.max(np.abs(np.diag(diag) - circulant_eigenvalues(h, 32)))
    ok = rt < 1e-12 and off < 1e-10 and eig_err < 1e-10
    return ok, f"idft(dft) err {rt:.1e}, off-diagonal {off:.1e}, eigenvalue err {eig_err:.1e}"


def check_equalize():
    rng = np.random.default_rng(3)
    ch = sample_channel(PROFILES["urban-nlos"], 64, rng)
    s = rng.standard_normal((64, 20)) + 0j
    err = np.linalg.norm(equalize(apply_downlink(s, ch), ch) - s) / np.linalg.norm(s)
    return err < 1e-8, f"relative error {err:.1e}"


def check_rpca():
    rng = np.random.default_rng(4)
    a, b = rng.standard_normal(60), rng.standard_normal(60)
    low = 5 * np.outer(a / np.linalg.norm(a), b / np.linalg.norm(b))
    sparse = np.where(rng.random((60, 60)) < 0.05, rng.choice([-10.0, 10.0], (60, 60)), 0.0)
    res = rpca_ialm(low + sparse)
    err = np.linalg.norm(res.low_rank - low) / np.linalg.norm(low)
    return res.converged and err < 1e-4, f"{res.iterations} iterations, low-rank error {err:.1e}"


def check_ica():
    rng = np.random.default_rng(5)
    src = gen_bits(3, 1000, rng).astype(float)
    mix = rng.standard_normal((3, 3)) @ src
    z, _ = whiten(center(mix)[0])
    cov_err = np.max(np.abs(np.cov(z) - np.eye(3)))
    res = fast_ica(mix, IcaParams(seed=6))
    corr = np.abs(np.corrcoef(res.sources, src)[:3, 3:])
    worst = corr.max(axis=1).min()
    return cov_err < 1e-8 and worst > 0.99, f"whitened cov err {cov_err:.1e}, worst |corr| {worst:.4f}"


CHECKS = {
    "walsh orthogonality": check_walsh,
    "spread/despread roundtrip": check_spread_roundtrip,
    "dft and circulant algebra": check_dft_and_circulant,
    "circulant equalization": check_equalize,
    "rpca exact recovery": check_rpca,
    "fastica separation": check_ica,
}


def run_all(echo=print) -> bool:
    all_ok = True
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"raised {exc!r}"
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        all_ok &= ok
    return all_ok
