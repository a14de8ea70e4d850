import math
import time

import numpy as np
import pytest

import ajcdma.harness as harness
from ajcdma.channel import ChannelRealization, PROFILES
from ajcdma.config import ExperimentConfig
from ajcdma.errors import NumericalFailure, ParameterError
from ajcdma.harness import (
    CSV_COLUMNS,
    ResultRow,
    draw_channel,
    emit_csv,
    measure_runtime,
    read_csv,
    run_experiment,
)
from ajcdma.receiver import run_receiver


def small_cfg(**kw):
    base = dict(k_users=3, m_code_len=32, n_bits=60, snr_db_list=[10.0], sjr_db_list=[-15.0],
                rank_list=[1, 6], trials=3, master_seed=11, timing=False)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_rank_expressions(self):
        cfg = small_cfg(n_bits=200, rank_list=[1, "N/10", "N"])
        assert cfg.rank_list == (1, 20, 200)

    @pytest.mark.parametrize("kw", [dict(trials=0), dict(k_users=40), dict(rank_list=[61]),
                                    dict(sjr_db_list=[]), dict(workers=0)])
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            small_cfg(**kw)

    def test_from_file(self, tmp_path):
        prof = tmp_path / "prof.toml"
        prof.write_text("delays = [0, 2]\ngains_db = [0.0, -6.0]\n")
        f = tmp_path / "exp.toml"
        f.write_text(
            'k_users = 2\nm_code_len = 16\nn_bits = 40\nsnr_db_list = [inf]\n'
            'sjr_db_list = [-10, 0]\nrank_list = [1, "N/4"]\nchannel_profile = "prof.toml"\n'
            'receivers = ["type2"]\ntrials = 2\nmaster_seed = 3\n'
            '[rpca]\nlambda = 0.3\ntol = 1e-6\n[ica]\ntol = 1e-5\n'
        )
        cfg = ExperimentConfig.from_file(f)
        assert cfg.snr_db_list == (math.inf,)
        assert cfg.rank_list == (1, 10)
        assert cfg.receivers[0].rpca.lam == 0.3 and cfg.receivers[0].ica.tol == 1e-5
        assert cfg.channel_profile == str(tmp_path / "prof.toml")
        rows = run_experiment(cfg, write=False)
        assert len(rows) == 4

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "bad.toml"
        f.write_text("k_users = 2\ncolour = 'red'\n")
        with pytest.raises(ParameterError, match="colour"):
            ExperimentConfig.from_file(f)


class TestRunExperiment:
    def test_clean_link_zero_ber(self):
        cfg = small_cfg(snr_db_list=[math.inf], sjr_db_list=[math.inf], rank_list=[1], trials=1)
        rows = run_experiment(cfg)
        assert [r.receiver for r in rows] == ["type1", "type2"]
        assert all(r.ber_mean == 0 and r.trials == 1 for r in rows)

    def test_row_layout(self):
        cfg = small_cfg(snr_db_list=[5.0, 10.0], sjr_db_list=[-10.0], rank_list=[1, 6])
        rows = run_experiment(cfg, write=False)
        assert len(rows) == 2 * 1 * 2 * 2
        assert all(0 <= r.ber_mean <= 1 for r in rows)
        assert all(r.rpca_iter_mean > 0 for r in rows if r.receiver == "type2")
        assert all(r.rpca_iter_mean == 0 for r in rows if r.receiver == "type1")

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(small_cfg(output_path=str(a)))
        run_experiment(small_cfg(output_path=str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_invariance(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(small_cfg(output_path=str(a)), workers=1)
        run_experiment(small_cfg(output_path=str(b)), workers=4)
        assert a.read_bytes() == b.read_bytes()

    def test_env_thread_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv(harness.THREADS_ENV, "3")
        assert harness._resolve_workers(small_cfg(), None) == 3
        assert harness._resolve_workers(small_cfg(), 2) == 2

    def test_adding_points_keeps_existing_trials(self):
        one = run_experiment(small_cfg(sjr_db_list=[-15.0]), write=False)
        more = run_experiment(small_cfg(sjr_db_list=[-25.0, -15.0, -5.0]), write=False)
        keep = [r for r in more if r.sjr_db == -15.0]
        assert [r.trial_bers for r in one] == [r.trial_bers for r in keep]

    def test_single_trial_reproducible_in_isolation(self):
        cfg = small_cfg(trials=4)
        rows = run_experiment(cfg, write=False)
        alone = harness.run_trial(cfg, 10.0, -15.0, 6, 2)
        row = next(r for r in rows if r.rank == 6 and r.receiver == "type2")
        assert row.trial_bers[2] == alone.ber["type2"]

    def test_aggregation_matches_trials(self):
        rows = run_experiment(small_cfg(trials=5, snr_db_list=[5.0]), write=False)
        for r in rows:
            t = np.asarray(r.trial_bers)
            assert abs(r.ber_mean - t.mean()) < 1e-12
            assert abs(r.ber_stderr - t.std(ddof=1) / math.sqrt(len(t))) < 1e-12

    def test_failed_trials_reported(self, monkeypatch):
        calls = {"n": 0}

        def flaky(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 3:
                raise NumericalFailure("SVD did not converge")
            return run_receiver(*args, **kw)

        monkeypatch.setattr(harness, "run_receiver", flaky)
        rows = run_experiment(small_cfg(rank_list=[1], trials=3), write=False)
        assert all(r.failures == 1 and r.trials == 2 for r in rows)

    def test_timing_recorded(self):
        rows = run_experiment(small_cfg(trials=1, timing=True), write=False)
        assert all(r.runtime_mean_s > 0 for r in rows)


class TestChannelRedraw:
    def test_singular_draws_are_resampled(self, monkeypatch):
        real = harness.sample_channel
        calls = {"n": 0}

        def sometimes_null(profile, m, seed):
            calls["n"] += 1
            if calls["n"] <= 2:
                return ChannelRealization(np.array([1, 1], complex), np.array([1, 1], complex), m)
            return real(profile, m, seed)

        monkeypatch.setattr(harness, "sample_channel", sometimes_null)
        ch, redraws = draw_channel(PROFILES["rural-nlos"], 16, np.random.SeedSequence(0))
        assert redraws == 2
        assert np.abs(ch.freq_response).min() > 0


class TestCsv:
    def test_empty(self, tmp_path):
        p = tmp_path / "e.csv"
        emit_csv([], p)
        assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_schema_width(self, tmp_path):
        p = tmp_path / "r.csv"
        emit_csv(run_experiment(small_cfg(trials=1), write=False), p)
        lines = p.read_text().splitlines()
        assert len(CSV_COLUMNS) == 12
        assert all(len(line.split(",")) == 12 for line in lines)

    def test_roundtrip(self, tmp_path):
        rows = [
            ResultRow(10.0, -20.0, 1, "type2", 3, 64, 200, 50, 1 / 3, 0.1 / 7, 0.0123456789, 24.2),
            ResultRow(math.inf, math.inf, 200, "type1", 3, 64, 200, 1, 0.0, 0.0, 0.0, 0.0),
        ]
        p = tmp_path / "r.csv"
        emit_csv(rows, p)
        back = read_csv(p)
        fields = CSV_COLUMNS
        for a, b in zip(rows, back):
            assert [getattr(a, f) for f in fields] == [getattr(b, f) for f in fields]

    def test_scientific_notation(self, tmp_path):
        p = tmp_path / "r.csv"
        emit_csv([ResultRow(10.0, -5.0, 2, "type1", 3, 8, 4, 1, 0.25, 0.0, 0.0, 0.0)], p)
        line = p.read_text().splitlines()[1]
        assert line.startswith("1.0000000000000000e+01,-5.0000000000000000e+00,2,type1,")

    def test_unwritable(self, tmp_path):
        target = tmp_path / "file"
        target.write_text("")
        with pytest.raises(OSError, match="cannot write"):
            emit_csv([], target / "sub" / "x.csv")


class TestRuntime:
    def test_nonnegative(self):
        out, dt = measure_runtime(sum, [1, 2, 3])
        assert out == 6 and dt >= 0

    def test_measures_sleep(self):
        _, dt = measure_runtime(time.sleep, 0.02)
        assert dt >= 0.019

    def _paired_times(self, m, k, n, trials=5):
        cfg = ExperimentConfig(k_users=k, m_code_len=m, n_bits=n, snr_db_list=[5.0],
                               sjr_db_list=[-10.0], rank_list=[max(1, n // 10)],
                               channel_profile="rural-nlos", trials=trials, master_seed=1)
        rows = run_experiment(cfg, write=False)
        return {r.receiver: r.runtime_mean_s for r in rows}

    def test_type2_slower_than_type1(self):
        t = self._paired_times(64, 3, 100)
        assert t["type2"] >= t["type1"]

    @pytest.mark.slow
    def test_scaling_in_m(self):
        ms = [32, 64, 128, 256]
        t1, t2 = [], []
        for m in ms:
            t = self._paired_times(m, 3, 100)
            t1.append(t["type1"])
            t2.append(t["type2"])
        slope1 = np.polyfit(np.log(ms), np.log(t1), 1)[0]
        slope2 = np.polyfit(np.log(ms), np.log(t2), 1)[0]
        assert slope2 > slope1


@pytest.mark.slow
def test_desk_scale_sweep_budget():
    cfg = ExperimentConfig(k_users=3, m_code_len=64, n_bits=200, snr_db_list=[10.0],
                           sjr_db_list=[-25, -20, -15, -10, -5, 0], rank_list=[1, 20, 200],
                           trials=50, master_seed=5)
    t0 = time.perf_counter()
    rows = run_experiment(cfg, write=False)
    elapsed = time.perf_counter() - t0
    assert len(rows) == 6 * 3 * 2
    assert all(r.failures == 0 for r in rows)
    assert elapsed < 600
