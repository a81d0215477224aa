import numpy as np
import pytest

from gdfpca.basis import make_basis, project_scores, uniform_grid
from gdfpca.simgen import (
    dfm_panel,
    dfm_transition,
    far1_coefficients,
    far1_transition,
    gen_dfm,
    gen_far1,
    gen_vari11,
    haar_orthogonal,
    replication_rng,
    smooth_panel,
    vari11_panel,
)


class TestFar1:
    def test_kappa_zero_is_iid(self):
        assert not np.any(far1_transition(15, 0.0))
        x = far1_coefficients(15, 0.0, 2000, seed=3)
        assert np.allclose(x.mean(axis=0), 0, atol=0.1)
        assert np.allclose(np.cov(x, rowvar=False), np.eye(15), atol=0.12)

    def test_entry(self):
        d, kappa = 15, 0.3
        i = np.arange(1, d + 1)
        G = np.exp(-(i[:, None] + i[None, :]))
        B = far1_transition(d, kappa)
        assert B[0, 0] == pytest.approx(kappa * np.exp(-2) / (2 * np.linalg.norm(G, 2)), rel=1e-14)
        assert np.linalg.norm(B, 2) == pytest.approx(kappa / 2, rel=1e-12)

    def test_autocorrelation_sign(self):
        positive = 0
        for seed in range(20):
            x = far1_coefficients(15, 0.9, 300, seed=seed)[:, 0]
            x = x - x.mean()
            positive += (x[1:] @ x[:-1]) > 0
        assert positive >= 18

    def test_burn_in_stationarity(self):
        for seed in range(20):
            x = far1_coefficients(15, 0.9, 300, seed=seed)
            v1 = x[:75].var(axis=0).sum()
            v4 = x[-75:].var(axis=0).sum()
            assert 0.5 < v1 / v4 < 2

    @pytest.mark.parametrize("d,kappa", [(14, 0.3), (0, 0.3), (15, 2.0), (15, -0.1)])
    def test_errors(self, d, kappa):
        with pytest.raises(ValueError):
            far1_transition(d, kappa)

    def test_stationarity_message(self):
        with pytest.raises(ValueError, match="stationarity"):
            far1_transition(15, 2.5)

    def test_curves(self):
        g = uniform_grid()
        s = gen_far1(15, 0.3, 50, grid=g, seed=1)
        assert s.values.shape == (50, 101)
        coefs = far1_coefficients(15, 0.3, 50, seed=1)
        assert np.allclose(project_scores(s, make_basis("fourier", 15, g)), coefs, atol=1e-8)

    def test_determinism_and_streams(self):
        a = far1_coefficients(15, 0.3, 40, seed=7, replication=2)
        assert np.array_equal(a, far1_coefficients(15, 0.3, 40, seed=7, replication=2))
        assert not np.array_equal(a, far1_coefficients(15, 0.3, 40, seed=7, replication=3))
        assert not np.array_equal(a, far1_coefficients(15, 0.3, 40, seed=8, replication=2))

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            replication_rng(-1)


class TestVari11:
    def test_haar_orthogonal(self):
        V = haar_orthogonal(8, np.random.default_rng(0))
        assert np.allclose(V.T @ V, np.eye(8), atol=1e-12)

    def test_panel_structure(self):
        z, A = vari11_panel(10, 30, np.random.default_rng(2))
        assert np.max(np.abs(np.linalg.eigvals(A))) <= 0.9 + 1e-12
        assert np.allclose(A, A.T)
        # z_1 = x_1 = u_1, and the differences follow the VAR(1)
        x = np.diff(np.vstack([np.zeros(10), z]), axis=0)
        u = x[1:] - x[:-1] @ A.T
        rng = np.random.default_rng(2)
        haar_orthogonal(10, rng)
        rng.uniform(0, 0.9, size=10)
        u_true = rng.standard_normal((30, 10))
        assert np.allclose(z[0], u_true[0])
        assert np.allclose(u, u_true[1:])

    def test_integration_grows_variance(self):
        g = uniform_grid()
        basis = make_basis("fourier", 21, g)
        growth, bounded = 0, 0
        for seed in range(20):
            stats = {}
            for T in (100, 200):
                sc = project_scores(gen_vari11(50, T, grid=g, seed=seed), basis)
                stats[T] = (sc.var(axis=0).sum(), np.diff(sc, axis=0).var(axis=0).sum())
            growth += stats[200][0] > stats[100][0]
            bounded += 0.5 < stats[200][1] / stats[100][1] < 2
        assert growth >= 15
        assert bounded == 20

    def test_shape_and_error(self):
        s = gen_vari11(50, 12, seed=0)
        assert s.values.shape == (12, 101)
        with pytest.raises(ValueError):
            gen_vari11(15, 12, n_basis=21)

    def test_smoothing_reproduces_in_span(self):
        g = uniform_grid()
        coef = np.random.default_rng(4).standard_normal((3, 5))
        from gdfpca.basis import fourier_values

        panel = coef @ fourier_values(5, (np.arange(20) + 0.5) / 20)
        got, _ = smooth_panel(panel, 5, g)
        assert np.allclose(got, coef, atol=1e-10)


class TestDfm:
    def test_transition_norm(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert np.linalg.norm(dfm_transition(6, rng), 2) <= 1 + 1e-12

    def test_common_rank(self):
        z, common = dfm_panel(30, 100, 6, 2, np.random.default_rng(1))
        assert np.linalg.matrix_rank(common) <= 6
        assert z.shape == common.shape == (100, 30)

    def test_signal_to_noise(self):
        ratios = []
        for seed in range(20):
            z, common = dfm_panel(30, 300, rng=replication_rng(seed))
            ratios.append(common.var() / (z - common).var())
        ratios = np.array(ratios)
        assert np.all(np.isfinite(ratios)) and np.all(ratios > 0)
        assert 0.8 < np.var(np.concatenate([(z - common).ravel()])) < 1.2

    def test_errors(self):
        with pytest.raises(ValueError):
            dfm_panel(5, 10, r=6, q=2, rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            dfm_panel(10, 10, r=2, q=3, rng=np.random.default_rng(0))

    def test_gen_dfm_deterministic(self):
        a, ca = gen_dfm(30, 40, n_basis=21, seed=5)
        b, cb = gen_dfm(30, 40, n_basis=21, seed=5)
        assert np.array_equal(a.values, b.values) and np.array_equal(ca.values, cb.values)
        assert a.values.shape == (40, 101)
