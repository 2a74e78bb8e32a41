import numpy as np
import pytest

from multiplexgm.errors import InfeasibleRho, ValidationError
from multiplexgm.generators import (
    CorrelatedErSpec,
    ErrorFilter,
    MeModelSpec,
    MsModelSpec,
    apply_error_channel,
    centered_from_adjacency,
    er_adjacency,
    gen_correlated_er_pair,
    gen_me_instance,
    gen_ms_instance,
    plant_template,
    shuffle_background,
)
from multiplexgm.multiplex import validate_multiplex


def within_3se(samples, target):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    return abs(samples.mean() - target) <= 3 * se


def upper(M):
    return M[np.triu_indices(M.shape[0], 1)]


class TestErrorChannel:
    def test_trivial_filters(self, rng):
        C = centered_from_adjacency(er_adjacency(10, 0.5, rng))
        assert np.array_equal(apply_error_channel(C, 0.0, rng), C)
        assert np.array_equal(apply_error_channel(C, 1.0, rng), -C)

    def test_absent_vertices_untouched(self, rng):
        mask = np.array([1, 1, 0, 1, 1])
        C = centered_from_adjacency(er_adjacency(5, 0.5, rng), mask)
        out = apply_error_channel(C, 1.0, rng)
        assert not out[2].any() and np.array_equal(out, out.T)

    def test_flip_rate(self):
        r = np.random.default_rng(11)
        C = centered_from_adjacency(er_adjacency(50, 0.5, r))
        flips = np.array([upper(apply_error_channel(C, 0.3, r) != C).mean()
                          for _ in range(10_000)])
        assert within_3se(flips, 0.3)

    def test_error_filter_validation(self):
        with pytest.raises(ValidationError):
            ErrorFilter((np.full((3, 3), 1.5),))
        with pytest.raises(ValidationError):
            ErrorFilter((np.full((3, 3), 0.5),))  # not hollow


class TestCorrelatedEr:
    def test_rho_one(self, rng):
        G, H, truth = gen_correlated_er_pair(CorrelatedErSpec(30, 0.3, 1.0, 3), rng)
        assert G == H and np.array_equal(truth, np.arange(30))

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.5])
    def test_correlation(self, rho):
        r = np.random.default_rng(12)
        n, reps = 100, 2000 if rho == 0.3 else 300
        est = []
        for _ in range(reps):
            G, H, _ = gen_correlated_er_pair(CorrelatedErSpec(n, 0.5, rho), r)
            g, h = upper(G.adjacency(0)), upper(H.adjacency(0))
            est.append(np.corrcoef(g, h)[0, 1])
        assert within_3se(est, rho)

    def test_infeasible(self):
        with pytest.raises(InfeasibleRho):
            CorrelatedErSpec(10, 0.2, -0.5)
        with pytest.raises(ValidationError):
            CorrelatedErSpec(10, 0.5, (0.1, 0.2), 3)


class TestMs:
    def test_noise_free_is_induced(self, rng):
        tpl, bg, truth = gen_ms_instance(MsModelSpec(12, 7, 3, 0.4, 0.0, 0.0), rng)
        for i in range(3):
            assert np.array_equal(tpl.adjacency(i), bg.adjacency(i)[:7, :7])
        assert np.array_equal(truth, np.arange(7))

    def test_covariance_and_densities(self):
        r = np.random.default_rng(13)
        p, s, q = (0.3, 0.5), (0.1, 0.2), (0.2, 0.5)
        spec = MsModelSpec(6, 4, 2, p, s, q)
        prods, a_dens, b_dens = [[], []], [[], []], [[], []]
        for _ in range(10_000):
            tpl, bg, _ = gen_ms_instance(spec, r)
            for i in range(2):
                a = tpl.adjacency(i)[0, 1]
                b = bg.adjacency(i)[0, 1]
                prods[i].append((a, b))
                a_dens[i].append(upper(tpl.adjacency(i)).mean())
                b_dens[i].append(upper(bg.adjacency(i)).mean())
        for i in range(2):
            ab = np.array(prods[i])
            # covariance via the per-replicate centered product
            mu_a = p[i] * (1 - 2 * s[i]) + s[i]
            mu_b = p[i] * (1 - 2 * q[i]) + q[i]
            cov = (ab[:, 0] - mu_a) * (ab[:, 1] - mu_b)
            assert within_3se(cov, p[i] * (1 - p[i]) * (1 - 2 * s[i]) * (1 - 2 * q[i]))
            assert within_3se(a_dens[i], mu_a)
            assert within_3se(b_dens[i], mu_b)
        # s = q = 1/2 in channel 2: template and background independent
        assert abs(np.corrcoef(np.array(prods[1]).T)[0, 1]) < 3 / np.sqrt(10_000)

    def test_determinism_and_validity(self):
        spec = MsModelSpec(9, 5, 2, 0.5, 0.1, 0.1)
        a = gen_ms_instance(spec, np.random.default_rng(1), return_sources=True)
        b = gen_ms_instance(spec, np.random.default_rng(1), return_sources=True)
        assert a[0] == b[0] and a[1] == b[1] and np.array_equal(a[3][0], b[3][0])
        for g in a[:2]:
            assert validate_multiplex(g.n_total, [(ch.vertices, ch.edges) for ch in g.channels]) == g

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            MsModelSpec(4, 5, 1, 0.5, 0, 0)
        with pytest.raises(ValidationError):
            MsModelSpec(5, 4, 2, 0.5, (0.1, 0.2, 0.3), 0)
        with pytest.raises(ValidationError):
            MsModelSpec(5, 4, 1, 1.5, 0, 0)


class TestMe:
    def test_noise_free(self, rng):
        tpl, bg, _, (T, W) = gen_me_instance(MeModelSpec(10, 6, 3, 0.5, 0, 0, 0, 0), rng,
                                             return_sources=True)
        for i in range(3):
            assert np.array_equal(bg.adjacency(i), W)
            assert np.array_equal(tpl.adjacency(i), W[:6, :6])
        assert np.array_equal(T, W[:6, :6])

    def test_densities(self):
        r = np.random.default_rng(14)
        p, s, q, rr, t = 0.3, (0.1, 0.5), (0.2, 0.5), (0.3, 0.5), (0.05, 0.5)
        spec = MeModelSpec(8, 5, 2, p, s, q, rr, t)
        dt, db = [[], []], [[], []]
        for _ in range(10_000):
            tpl, bg, _ = gen_me_instance(spec, r)
            for i in range(2):
                dt[i].append(upper(tpl.adjacency(i)).mean())
                db[i].append(upper(bg.adjacency(i)).mean())
        for i in range(2):
            assert within_3se(dt[i], p * (1 - s[i]) + (1 - p) * q[i])
            assert within_3se(db[i], p * (1 - rr[i]) + (1 - p) * t[i])
        # all rates 1/2: channels are fair coins
        assert within_3se(db[1], 0.5) and within_3se(dt[1], 0.5)


class TestPlant:
    def test_noise_zero_and_one(self, rng):
        tpl, bg, truth = plant_template(60, 10, 2, rng, noise=0.0)
        for i in range(2):
            assert np.array_equal(tpl.adjacency(i), bg.adjacency(i)[np.ix_(truth, truth)])
        tpl, bg, truth = plant_template(60, 10, 2, rng, noise=1.0, shuffle=False)
        for i in range(2):
            comp = 1 - bg.adjacency(i)[:10, :10] - np.eye(10)
            assert np.array_equal(tpl.adjacency(i), comp)

    def test_default_profile_shape(self, rng):
        tpl, bg, truth = plant_template(500, 35, 3, rng)
        assert (tpl.n_total, tpl.c, bg.n_total, bg.c) == (35, 3, 500, 3)
        assert len(set(truth.tolist())) == 35

    def test_drop_vertices(self, rng):
        tpl, _, _ = plant_template(50, 12, 3, rng, drop_vertices=0.3)
        sizes = [len(ch.vertices) for ch in tpl.channels]
        assert min(sizes) < 12
        assert set.intersection(*(set(ch.vertices) for ch in tpl.channels))

    def test_shuffle_background(self, rng):
        tpl, bg, truth = plant_template(40, 8, 1, rng, noise=0.0, shuffle=False)
        bg2, truth2 = shuffle_background(bg, truth, rng)
        A = bg2.adjacency(0)[np.ix_(truth2, truth2)]
        assert np.array_equal(A, tpl.adjacency(0))
