"""
Sparse Bernoulli-Gaussian noise: distribution, determinism and parameters.

Known values:
- E|g|^2 = 1, |g|^2 ~ Exp(1), Pr(|g| <= 1) = 1 - 1/e
- K = 2 log(n) / log(n rho): 2 at rho = 1, 4 at n = 2^16, rho = 2^-8
- E nnz = n^2 rho
- seed 0 vectors as published in docs/PRNG.md
"""
import math

import numpy as np
import pytest
import scipy.sparse
import scipy.stats

from ShatterLab.errors import DomainError
from ShatterLab.noise_agent import (
    STREAM_NOISE,
    STREAM_PROBE,
    NoiseSpec,
    Noise_Agent,
    complex_gaussian_vector,
    derive_rng,
)
from ShatterLab.parallel import parallel_map


class TestComplexGaussian:
    draws = complex_gaussian_vector(derive_rng(0, 99), 10 ** 6)

    def test_scalar_sample(self):
        assert isinstance(Noise_Agent.sample_complex_gaussian(derive_rng(1)), complex)

    def test_mean(self):
        assert abs(self.draws.mean()) < 0.01

    def test_second_moment(self):
        assert np.mean(np.abs(self.draws) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_unit_disk_probability(self):
        assert np.mean(np.abs(self.draws) <= 1) == pytest.approx(1 - math.exp(-1), abs=0.005)


class TestDeriveRng:
    def test_same_keys_same_stream(self):
        np.testing.assert_array_equal(derive_rng(5, 1, 2).random(8), derive_rng(5, 1, 2).random(8))

    def test_streams_are_separated(self):
        assert not np.array_equal(derive_rng(5, 0, STREAM_NOISE).random(8), derive_rng(5, 0, STREAM_PROBE).random(8))

    def test_negative_key_rejected(self):
        with pytest.raises(DomainError):
            derive_rng(1, -1)

    def test_uniform_vector(self):
        np.testing.assert_array_equal(
            derive_rng(0, 0, 0, 0).random(4),
            [0.014067035665647709, 0.25776724562461772, 0.47156538101528966, 0.091419671107368705],
        )

    def test_normal_vector(self):
        np.testing.assert_array_equal(
            derive_rng(0, 0, STREAM_PROBE).standard_normal(4),
            [0.91220564799765835, -0.040930018306660654, -1.5249963732373299, 1.489234098049967],
        )

    def test_complex_vector(self):
        np.testing.assert_allclose(
            complex_gaussian_vector(derive_rng(0, 0, STREAM_PROBE), 2),
            [0.64502679953581299 - 0.02894189349872928j, -1.0783352768010073 + 1.0530475295053636j],
            rtol=1e-15,
        )


class TestNoiseSpec:
    @pytest.mark.parametrize("rho", [0.0, -0.1, 1.5])
    def test_rho_bounds(self, rho):
        with pytest.raises(DomainError, match="rho"):
            NoiseSpec(n=4, rho=rho)

    def test_zero_scale_rejected(self):
        with pytest.raises(DomainError, match="scale"):
            NoiseSpec(n=4, rho=0.5, scale=0.0)

    def test_seed_must_fit_64_bits(self):
        with pytest.raises(DomainError):
            NoiseSpec(n=4, rho=0.5, seed=2 ** 64)


class TestSampleSparseNoise:
    def test_full_density(self):
        N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=7, rho=1.0, seed=3))
        assert N.nnz == 49

    def test_deterministic(self):
        spec = NoiseSpec(n=20, rho=0.3, seed=42, trial=5)
        a = Noise_Agent.sample_sparse_noise(spec)
        b = Noise_Agent.sample_sparse_noise(spec)
        np.testing.assert_array_equal(a.indptr, b.indptr)
        np.testing.assert_array_equal(a.indices, b.indices)
        np.testing.assert_array_equal(a.data, b.data)

    def test_trials_differ(self):
        a = Noise_Agent.sample_sparse_noise(NoiseSpec(n=20, rho=0.3, seed=42, trial=0))
        b = Noise_Agent.sample_sparse_noise(NoiseSpec(n=20, rho=0.3, seed=42, trial=1))
        assert not (a.nnz == b.nnz and np.array_equal(a.data, b.data))

    def test_independent_of_thread_count(self):
        specs = [NoiseSpec(n=16, rho=0.4, seed=9, trial=t) for t in range(12)]
        serial = [Noise_Agent.sample_sparse_noise(s).toarray() for s in specs]
        threaded = parallel_map(lambda s: Noise_Agent.sample_sparse_noise(s).toarray(), specs, workers=4)
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a, b)

    def test_sorted_csr(self):
        N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=30, rho=0.2, seed=1))
        assert N.has_sorted_indices
        for row in range(30):
            cols = N.indices[N.indptr[row]:N.indptr[row + 1]]
            assert np.all(np.diff(cols) > 0)

    def test_mean_nnz(self):
        n, rho, trials = 100, 0.1, 200
        counts = [Noise_Agent.sample_sparse_noise(NoiseSpec(n=n, rho=rho, seed=7, trial=t)).nnz for t in range(trials)]
        bound = 3 * math.sqrt(n * n * rho * (1 - rho) / trials)
        assert abs(np.mean(counts) - Noise_Agent.expected_nnz(n, rho)) <= bound

    @pytest.mark.slow
    def test_mean_nnz_1000_trials(self):
        n, rho, trials = 100, 0.1, 1000
        counts = [Noise_Agent.sample_sparse_noise(NoiseSpec(n=n, rho=rho, seed=8, trial=t)).nnz for t in range(trials)]
        assert abs(np.mean(counts) - 1000) <= 3 * math.sqrt(n * n * rho * (1 - rho) / trials)

    @pytest.mark.slow
    def test_nnz_variance_is_binomial(self):
        n, rho, trials = 32, 0.3, 10 ** 4
        counts = [Noise_Agent.sample_sparse_noise(NoiseSpec(n=n, rho=rho, seed=10, trial=t)).nnz for t in range(trials)]
        expected = n * n * rho * (1 - rho)
        assert abs(np.var(counts, ddof=1) - expected) <= 0.1 * expected

    def test_entries_are_exponential(self):
        scale = 2.0
        N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=400, rho=0.7, scale=scale, seed=11))
        values = np.abs(N.data) ** 2 / scale ** 2
        assert values.size >= 10 ** 5
        assert scipy.stats.kstest(values, "expon").pvalue > 0.01

    def test_distinct_entries_uncorrelated(self):
        trials = 10 ** 4
        samples = np.array([
            Noise_Agent.sample_sparse_noise(NoiseSpec(n=2, rho=1.0, seed=12, trial=t)).toarray().ravel()
            for t in range(trials)
        ])
        corr = np.corrcoef(samples.real.T)
        off_diagonal = corr[~np.eye(4, dtype=bool)]
        assert np.max(np.abs(off_diagonal)) <= 4 / math.sqrt(trials)


class TestPerturb:
    def test_dense_second_moment(self):
        values = np.concatenate([
            Noise_Agent.perturb(np.zeros((100, 100)), NoiseSpec(n=100, rho=1.0, seed=13, trial=t)).ravel()
            for t in range(10)
        ])
        assert np.mean(np.abs(values) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_identity_off_support_unchanged(self):
        n = 12
        spec = NoiseSpec(n=n, rho=0.5, seed=14)
        A = Noise_Agent.perturb(np.eye(n), spec)
        support = Noise_Agent.sample_sparse_noise(spec).toarray() != 0
        np.testing.assert_array_equal(A[~support], np.eye(n)[~support])

    def test_sparse_stays_sparse(self):
        M = scipy.sparse.identity(10, format="csr", dtype=complex)
        A = Noise_Agent.perturb(M, NoiseSpec(n=10, rho=0.2, seed=15))
        assert scipy.sparse.isspmatrix_csr(A)
        N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=10, rho=0.2, seed=15))
        np.testing.assert_array_equal(A.toarray(), np.eye(10) + N.toarray())

    def test_scale_multiplies_noise(self):
        base = Noise_Agent.sample_sparse_noise(NoiseSpec(n=6, rho=0.5, seed=16))
        scaled = Noise_Agent.sample_sparse_noise(NoiseSpec(n=6, rho=0.5, scale=1e-3, seed=16))
        np.testing.assert_allclose(scaled.toarray(), 1e-3 * base.toarray(), rtol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            Noise_Agent.perturb(np.eye(3), NoiseSpec(n=4, rho=0.5))


class TestParameters:
    def test_k_dense(self):
        assert Noise_Agent.k_param(256, 1.0).value == pytest.approx(2.0)

    def test_k_sparse(self):
        assert Noise_Agent.k_param(2 ** 16, 2 ** -8).value == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [4, 50, 1000])
    def test_k_is_two_at_full_density(self, n):
        assert Noise_Agent.k_param(n, 1.0).value == pytest.approx(2.0)

    def test_k_needs_n_rho_above_one(self):
        with pytest.raises(DomainError):
            Noise_Agent.k_param(10, 0.1)

    def test_expected_nnz(self):
        assert Noise_Agent.expected_nnz(10, 0.5) == 50
        assert Noise_Agent.expected_nnz(9, 1.0) == 81
        n = math.exp(4)
        assert Noise_Agent.expected_nnz(n, math.log(n) ** 2 / n) == pytest.approx(16 * n)

    def test_untouched_rows_and_columns(self):
        N = scipy.sparse.csr_matrix(np.array([[1, 0, 0], [0, 0, 0], [2, 0, 0]], dtype=complex))
        np.testing.assert_array_equal(Noise_Agent.untouched_rows(N), [1])
        np.testing.assert_array_equal(Noise_Agent.untouched_columns(N), [1, 2])

    def test_sparsity_chi(self):
        assert Noise_Agent.sparsity_chi(100) == pytest.approx(2 * math.log(100) / math.log(math.log(100)))
        with pytest.raises(DomainError):
            Noise_Agent.sparsity_chi(2)

    def test_sparsity_laws(self):
        assert Noise_Agent.sparsity_law(64, "dense") == 1.0
        assert Noise_Agent.sparsity_law(100, "power", 0.5) == pytest.approx(0.1)
        assert Noise_Agent.sparsity_law(128, "log2") == pytest.approx(math.log(128) ** 2 / 128)
        assert Noise_Agent.sparsity_law(256, "coupon", 3.0) == pytest.approx(3 * math.log(256) / 256)
        assert Noise_Agent.sparsity_law(8, "log2") == pytest.approx(math.log(8) ** 2 / 8)
        assert Noise_Agent.sparsity_law(8, "coupon", 10.0) == 1.0
        with pytest.raises(DomainError):
            Noise_Agent.sparsity_law(64, "cubic")
