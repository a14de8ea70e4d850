import math

import numpy as np
import pytest

from ajcdma.errors import ParameterError
from ajcdma.rpca import RpcaParams, ialm_step, objective, rpca_ialm, svt_step

from oracles import rank1_plus_sparse, reference_step


class TestParams:
    @pytest.mark.parametrize("kw", [dict(lam=0.0), dict(mu_growth=1.0), dict(tol=0), dict(max_iter=0)])
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            RpcaParams(**kw)

    def test_default_weight(self):
        assert RpcaParams().weight(64) == 1 / 8
        assert RpcaParams(lam=0.3).weight(64) == 0.3


class TestSvtStep:
    def test_zero_threshold(self):
        a = np.random.default_rng(0).standard_normal((5, 4))
        np.testing.assert_array_equal(svt_step(a, 0.0), a)

    def test_diagonal(self):
        np.testing.assert_allclose(svt_step(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-14)

    @pytest.mark.parametrize("seed", range(3))
    def test_is_prox_of_nuclear_norm(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        tau = 1.3

        def obj(x):
            return tau * np.linalg.svd(x, compute_uv=False).sum() + 0.5 * np.linalg.norm(x - a) ** 2

        x = svt_step(a, tau)
        best = obj(x)
        for scale in (1e-1, 1e-2, 1e-3):
            for _ in range(500 // 3 + 1):
                d = rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
                assert best <= obj(x + scale * d) + 1e-12


class TestSingleStep:
    @pytest.mark.parametrize("seed", range(4))
    def test_matches_reference(self, seed):
        rng = np.random.default_rng(seed)
        low, sparse = rank1_plus_sparse(seed, 30, 20)
        q = low + sparse + 0.01 * rng.standard_normal(low.shape)
        r_k = rng.standard_normal(q.shape) * (rng.random(q.shape) < 0.1)
        lam_k = rng.standard_normal(q.shape) * 0.05
        mu_k = 1.25 / np.linalg.norm(q, 2) * 1.5 ** seed
        lam = 1 / math.sqrt(q.shape[0])
        got = ialm_step(q, r_k, lam_k, mu_k, lam)
        want = reference_step(q, r_k, lam_k, mu_k, lam)
        for g, w in zip(got, want):
            assert np.max(np.abs(g - w)) < 1e-12


class TestRpca:
    def test_zero_input(self):
        res = rpca_ialm(np.zeros((4, 3)))
        assert res.converged and res.iterations == 0
        assert not res.low_rank.any() and not res.sparse.any()

    @pytest.mark.parametrize("seed", range(5))
    def test_exact_recovery(self, seed):
        low, sparse = rank1_plus_sparse(seed)
        res = rpca_ialm(low + sparse)
        assert res.converged
        assert np.linalg.norm(res.low_rank - low) / np.linalg.norm(low) < 1e-5
        assert np.linalg.norm(res.sparse - sparse) / np.linalg.norm(sparse) < 1e-5

    def test_purely_sparse(self):
        _, sparse = rank1_plus_sparse(7)
        res = rpca_ialm(sparse)
        assert np.linalg.norm(res.low_rank) < 1e-5 * np.linalg.norm(sparse)
        np.testing.assert_allclose(res.sparse, sparse, atol=1e-5)

    def test_complex_recovery(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal(80) + 1j * rng.standard_normal(80)
        b = rng.standard_normal(60) + 1j * rng.standard_normal(60)
        low = 5 * np.outer(a / np.linalg.norm(a), b.conj() / np.linalg.norm(b))
        sparse = np.where(rng.random((80, 60)) < 0.05, 10 * np.exp(2j * np.pi * rng.random((80, 60))), 0)
        res = rpca_ialm(low + sparse)
        assert res.converged
        assert np.linalg.norm(res.low_rank - low) / np.linalg.norm(low) < 1e-5

    def test_feasibility_when_converged(self):
        low, sparse = rank1_plus_sparse(3, 50, 70)
        q = low + sparse
        res = rpca_ialm(q, RpcaParams(tol=1e-9))
        assert np.linalg.norm(q - res.low_rank - res.sparse) / np.linalg.norm(q) < 1e-9
        assert res.residual_history[-1] < 1e-9

    def test_max_iter_reports_nonconvergence(self):
        low, sparse = rank1_plus_sparse(3, 40, 40)
        res = rpca_ialm(low + sparse, RpcaParams(max_iter=3))
        assert res.iterations == 3 and not res.converged

    @pytest.mark.parametrize("seed", range(10))
    def test_residual_monotone_after_warmup(self, seed):
        rng = np.random.default_rng(seed)
        low, sparse = rank1_plus_sparse(seed, 60, 60)
        q = low + sparse + 0.05 * rng.standard_normal(low.shape)
        hist = np.asarray(rpca_ialm(q).residual_history)
        assert np.all(np.diff(hist[5:]) <= 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_iterates_bounded(self, seed, monkeypatch):
        import ajcdma.rpca as mod

        low, sparse = rank1_plus_sparse(seed, 60, 60)
        q = low + sparse
        qn = np.linalg.norm(q)
        seen = []
        orig = mod.ialm_step

        def spy(*args, **kw):
            out = orig(*args, **kw)
            seen.append(np.linalg.norm(out.low_rank) + np.linalg.norm(out.sparse))
            return out

        monkeypatch.setattr(mod, "ialm_step", spy)
        mod.rpca_ialm(q)
        assert seen and max(seen) <= 10 * qn

    @pytest.mark.parametrize("seed", range(5))
    def test_objective_certificate(self, seed):
        low, sparse = rank1_plus_sparse(seed)
        lam = 1 / math.sqrt(100)
        res = rpca_ialm(low + sparse)
        truth = objective(low, sparse, lam)
        assert objective(res.low_rank, res.sparse, lam) <= truth * (1 + 1e-3)
