import numpy as np
import pytest

from oracles import dense_logpdf
from synth import random_spd

from repmetric.errors import ValidationError
from repmetric.kernel import KernelMatrix, predictive_covariance
from repmetric.mvn import GaussianModel, log_density, sample

LOG_2PI = np.log(2 * np.pi)


class TestSampling:
    def test_identity_covariance_statistics(self):
        model = GaussianModel.from_covariance(np.eye(3))
        N = 100_000
        block = sample(model, N, seed=123)
        emp = block.Y.T @ block.Y / N
        # per-entry sampling SE of the empirical covariance
        se = np.sqrt((np.ones((3, 3)) + np.eye(3)) / N)
        assert np.all(np.abs(emp - np.eye(3)) < 5 * se)

    def test_general_covariance_statistics(self):
        rng = np.random.default_rng(0)
        C = random_spd(rng, 4)
        model = GaussianModel.from_covariance(C)
        N = 100_000
        block = sample(model, N, seed=99)
        emp = block.Y.T @ block.Y / N
        d = np.diag(C)
        se = np.sqrt((np.outer(d, d) + C**2) / N)
        assert np.all(np.abs(emp - C) < 5 * se)

    def test_deterministic(self):
        model = GaussianModel.from_covariance([[2.0, 0.3], [0.3, 1.0]])
        b1 = sample(model, 50, seed=7)
        b2 = sample(model, 50, seed=7)
        assert np.array_equal(b1.Y, b2.Y)
        assert np.array_equal(b1.Z, b2.Z)

    def test_streams_differ(self):
        model = GaussianModel.from_covariance(np.eye(2))
        b0 = sample(model, 50, seed=7, stream=0)
        b1 = sample(model, 50, seed=7, stream=1)
        assert not np.array_equal(b0.Z, b1.Z)

    def test_scalar_unit_factor_passthrough(self):
        model = GaussianModel.from_covariance([[1.0]])
        block = sample(model, 1, seed=5)
        assert np.array_equal(block.Y, block.Z)

    def test_draw_count_validated(self):
        model = GaussianModel.from_covariance([[1.0]])
        with pytest.raises(ValidationError):
            sample(model, 0, seed=1)


class TestLogDensity:
    def test_standard_normal_at_mode(self):
        model = GaussianModel.from_covariance([[1.0]])
        lp = log_density(model, [[0.0]])
        assert lp[0] == pytest.approx(-0.5 * LOG_2PI, abs=1e-12)

    def test_closed_form_2d(self):
        model = GaussianModel.from_covariance(np.eye(2))
        lp = log_density(model, [[1.0, 1.0]])
        assert lp[0] == pytest.approx(-LOG_2PI - 1.0, abs=1e-12)

    def test_matches_dense_inverse_oracle(self):
        rng = np.random.default_rng(1)
        C = random_spd(rng, 5)
        model = GaussianModel.from_covariance(C)
        pts = rng.standard_normal((20, 5)) * 3
        got = log_density(model, pts)
        want = dense_logpdf(C, pts)
        assert np.abs(got - want).max() < 1e-8

    def test_dimension_checked(self):
        model = GaussianModel.from_covariance(np.eye(3))
        with pytest.raises(ValidationError):
            log_density(model, [[1.0, 2.0]])

    def test_integrates_to_one_1d(self):
        model = GaussianModel.from_covariance([[2.5]])
        xs = np.linspace(-15, 15, 20_001)[:, None]
        total = np.trapezoid(np.exp(log_density(model, xs)), xs[:, 0])
        assert abs(total - 1.0) < 1e-4

    def test_integrates_to_one_2d(self):
        C = np.array([[1.5, 0.4], [0.4, 0.8]])
        model = GaussianModel.from_covariance(C)
        xs = np.linspace(-10, 10, 501)
        XX, YY = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([XX.ravel(), YY.ravel()], axis=1)
        dens = np.exp(log_density(model, pts)).reshape(501, 501)
        total = np.trapezoid(np.trapezoid(dens, xs, axis=1), xs)
        assert abs(total - 1.0) < 1e-4

    def test_entropy_consistency(self):
        # mean log density of own samples matches the analytic value
        rng = np.random.default_rng(2)
        C = random_spd(rng, 3)
        model = GaussianModel.from_covariance(C)
        N = 100_000
        block = sample(model, N, seed=11)
        lp = log_density(model, block.Y)
        analytic = -0.5 * (model.dim * (LOG_2PI + 1.0) + model.log_det)
        se = lp.std(ddof=1) / np.sqrt(N)
        assert abs(lp.mean() - analytic) < 3 * se


class TestConstruction:
    def test_from_predictive_matches_from_covariance(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((6, 9))
        K = KernelMatrix.from_array(A @ A.T)
        pc = predictive_covariance(K, 0.3)
        m1 = GaussianModel.from_predictive(pc)
        m2 = GaussianModel.from_covariance(pc.C)
        assert np.array_equal(m1.cov, m2.cov)
        assert m1.log_det == pytest.approx(m2.log_det, rel=1e-12)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValidationError):
            GaussianModel.from_covariance(np.ones((2, 3)))

    def test_log_det_value(self):
        model = GaussianModel.from_covariance(np.diag([1.0, 4.0, 9.0]))
        assert model.log_det == pytest.approx(np.log(36.0), rel=1e-12)
