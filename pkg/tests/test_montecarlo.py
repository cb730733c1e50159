import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from poisson_cutset import bound
from poisson_cutset import montecarlo as mc
from poisson_cutset.config import NetworkConfig
from poisson_cutset.errors import DegenerateGeometryError, ParameterError, TruncationError
from poisson_cutset.montecarlo import FadingModel
from poisson_cutset.ppp import Region, make_rng, sample_ppp


def small_cfg(p=1.0, **kw):
    base = dict(nu=1.0, R=5.0, W=1e3, alpha=4.0)
    base.update(kw)
    return NetworkConfig.from_snr(p, **base)


def logdet_eig(gains, snr):
    """Oracle: log det(I + snr H H*) from the eigenvalues of H H*."""
    ev = np.linalg.eigvalsh(gains @ gains.conj().T)
    return float(np.sum(np.log1p(snr * np.clip(ev, 0.0, None))))


class TestFading:
    @pytest.mark.parametrize("model", list(FadingModel))
    def test_unit_power(self, model):
        h = mc.draw_fading(model, (100_000,), make_rng(1))
        assert abs(np.mean(np.abs(h) ** 2) - 1.0) <= 0.02

    def test_uniform_phase_modulus(self):
        h = mc.draw_fading("uniform_phase", (1000,), make_rng(2))
        np.testing.assert_allclose(np.abs(h), 1.0, rtol=1e-14)

    @pytest.mark.parametrize("model", list(FadingModel))
    def test_sign_symmetry(self, model):
        a = mc.draw_fading(model, (20_000,), make_rng(3))
        b = mc.draw_fading(model, (20_000,), make_rng(4))
        for part in (np.real, np.imag):
            assert stats.ks_2samp(part(a), -part(b)).pvalue > 0.01
        z = np.mean(a) / (np.std(a) / math.sqrt(a.size))
        assert abs(z) < 2.58

    @pytest.mark.parametrize("model", list(FadingModel))
    def test_entries_uncorrelated(self, model):
        h = mc.draw_fading(model, (50_000, 2), make_rng(5))
        corr = np.mean(h[:, 0] * np.conj(h[:, 1]))
        assert abs(corr) < 3 * math.sqrt(2.0 / 50_000)


class TestChannel:
    def test_uniform_phase_single_link(self):
        ch = mc.build_channel([[3.0, 4.0]], [[0.0, 0.0]], 4.0, "uniform_phase", 0)
        assert abs(ch.gains[0, 0]) == pytest.approx(5.0**-2, rel=1e-14)

    def test_mean_power_matches_geometry(self):
        tx, rx = [[2.0, 0.0]], [[0.0, 0.0]]
        p = [abs(mc.build_channel(tx, rx, 3.0, "rayleigh", s).gains[0, 0]) ** 2 for s in range(20_000)]
        assert np.mean(p) == pytest.approx(2.0**-3, rel=0.03)

    def test_coincident_points(self):
        with pytest.raises(DegenerateGeometryError):
            mc.build_channel([[1.0, 1.0]], [[1.0, 1.0]], 4.0, "rayleigh", 0)
        with pytest.raises(DegenerateGeometryError):
            mc.jensen_geometry_bound([[1.0, 1.0]], [[1.0, 1.0]], small_cfg())
        with pytest.raises(DegenerateGeometryError):
            mc.received_snr([1.0, 1.0], [[1.0, 1.0]], small_cfg())

    def test_deterministic(self):
        tx = sample_ppp(Region.annulus(5, 8), 1.0, 1)
        rx = sample_ppp(Region.disk(4), 1.0, 2)
        a = mc.build_channel(tx, rx, 4.0, "rayleigh", 9).gains
        b = mc.build_channel(tx, rx, 4.0, "rayleigh", 9).gains
        assert a.tobytes() == b.tobytes()


class TestCapacities:
    def test_zero_power(self):
        cfg = small_cfg(0.0)
        ch = mc.build_channel([[6.0, 0.0], [0.0, 7.0]], [[1.0, 0.0]], 4.0, "rayleigh", 0)
        assert mc.mimo_capacity(ch, cfg) == 0.0
        assert mc.miso_sum_capacity(ch, cfg) == 0.0
        assert mc.jensen_geometry_bound([[6.0, 0.0]], [[1.0, 0.0]], cfg) == 0.0

    def test_scalar_channel(self):
        cfg = small_cfg(2.0)
        r = 1.5
        ch = mc.build_channel([[r, 0.0]], [[0.0, 0.0]], 4.0, "uniform_phase", 0)
        exact = cfg.W * math.log(1 + 2.0 * r**-4)
        assert mc.mimo_capacity(ch, cfg) == pytest.approx(exact, rel=1e-14)
        assert mc.jensen_geometry_bound([[r, 0.0]], [[0.0, 0.0]], cfg) == pytest.approx(exact, rel=1e-14)

    @pytest.mark.parametrize("shape", [(3, 4), (4, 3), (1, 5), (6, 6)])
    def test_logdet_against_eigenvalues(self, shape):
        rng = np.random.default_rng(sum(shape))
        n_rx, n_tx = shape
        rx = rng.uniform(-2, 2, size=(n_rx, 2))
        tx = rng.uniform(3, 6, size=(n_tx, 2))
        cfg = small_cfg(50.0, alpha=3.0)
        ch = mc.build_channel(tx, rx, cfg.alpha, "rayleigh", 4)
        ref = cfg.W * logdet_eig(ch.gains, cfg.p_over_nw)
        assert mc.mimo_capacity(ch, cfg) == pytest.approx(ref, rel=1e-10)

    def test_single_receiver_equality(self):
        cfg = small_cfg(10.0)
        ch = mc.build_channel([[6.0, 0.0], [0.0, 7.0], [-6.5, 1.0]], [[1.0, 0.5]], 4.0, "rayleigh", 2)
        assert mc.miso_sum_capacity(ch, cfg) == pytest.approx(mc.mimo_capacity(ch, cfg), rel=1e-13)

    @settings(max_examples=200, deadline=None)
    @given(
        n_rx=st.integers(1, 8),
        n_tx=st.integers(1, 8),
        log_snr=st.floats(-6, 12),
        seed=st.integers(0, 2**31),
        model=st.sampled_from(list(FadingModel)),
    )
    def test_hadamard_every_draw(self, n_rx, n_tx, log_snr, seed, model):
        rng = np.random.default_rng(seed)
        rx = rng.uniform(-1, 1, size=(n_rx, 2))
        tx = rng.uniform(1.5, 4, size=(n_tx, 2)) * rng.choice([-1, 1], size=(n_tx, 2))
        cfg = small_cfg(10.0**log_snr)
        ch = mc.build_channel(tx, rx, 4.0, model, seed)
        assert mc.mimo_capacity(ch, cfg) <= mc.miso_sum_capacity(ch, cfg)

    def test_jensen_above_fading_average(self):
        rng = np.random.default_rng(8)
        rx = rng.uniform(-2, 2, size=(3, 2))
        tx = rng.uniform(3, 5, size=(4, 2))
        cfg = small_cfg(20.0)
        miso = np.array(
            [mc.miso_sum_capacity(mc.build_channel(tx, rx, 4.0, "rayleigh", s), cfg) for s in range(10_000)]
        )
        jensen = mc.jensen_geometry_bound(tx, rx, cfg)
        se = miso.std(ddof=1) / math.sqrt(miso.size)
        assert miso.mean() <= jensen + 3 * se
        # the gap is a genuine Jensen gap, not noise
        assert jensen - miso.mean() > 3 * se


class TestReceivedSnr:
    def test_empty(self):
        assert mc.received_snr([0.0, 0.0], np.empty((0, 2)), small_cfg()) == 0.0

    def test_single_transmitter(self):
        assert mc.received_snr([0.0, 0.0], [[1.0, 0.0]], small_cfg(1.0)) == pytest.approx(1.0, rel=1e-15)

    def test_campbell_oracle_matches_direct_quadrature(self):
        from scipy import integrate

        rho, inner, outer = 3.0, 5.0, 20.0

        def f(phi, s):
            return s * (s * s + rho * rho - 2 * s * rho * math.cos(phi)) ** -2.0

        ref, _ = integrate.dblquad(f, inner, outer, 0, 2 * math.pi, epsabs=0, epsrel=1e-11)
        assert mc.campbell_annulus_mean(rho, inner, outer, 1.0, 4.0) == pytest.approx(ref, rel=1e-9)

    def test_receiver_centred_annulus_reaches_s_r(self):
        # transmitters filling |x - rx| in (r, T) with tail < 1e-3 carry almost all of s_r
        cfg = small_cfg(1.0)
        r, T = 1.0, 40.0
        assert (r / T) ** (cfg.alpha - 2) < 1e-3
        reg = Region.annulus(r, T)
        q = np.array([mc.received_snr([0.0, 0.0], sample_ppp(reg, cfg.nu, s), cfg) for s in range(10_000)])
        s_r = bound.snr_profile(cfg, r)
        se = q.std(ddof=1) / math.sqrt(q.size)
        assert q.mean() >= 0.8 * s_r
        assert q.mean() <= s_r + 3 * se


class TestTruncation:
    def test_tail_fraction(self):
        assert mc.tail_fraction(small_cfg(), 50.0) == pytest.approx(0.01)
        with pytest.raises(ParameterError):
            mc.tail_fraction(small_cfg(), 5.0)

    def test_cap_enforced(self):
        with pytest.raises(TruncationError, match="enlarge"):
            mc.estimate_expected_cutset(small_cfg(), 1, 1, 20.0, 0)


class TestEstimate:
    def test_zero_power(self):
        est = mc.estimate_expected_cutset(small_cfg(0.0), 3, 2, 50.0, 0)
        assert (est.mimo.mean, est.miso.mean, est.jensen.mean) == (0.0, 0.0, 0.0)

    def test_ordering_and_analytic_bound(self):
        cfg = small_cfg(1.0)
        est = mc.estimate_expected_cutset(cfg, 20, 10, 50.0, 1)
        assert est.hadamard_violations == 0
        pooled = lambda a, b: 3 * math.hypot(a.std_error, b.std_error)  # noqa: E731
        assert est.mimo.mean <= est.miso.mean + pooled(est.mimo, est.miso)
        assert est.miso.mean <= est.jensen.mean + pooled(est.miso, est.jensen)
        analytic = bound.cutset_bound_quadrature(cfg).value
        assert est.jensen.mean <= analytic + 3 * est.jensen.std_error

    def test_sweep_matches_single_calls(self):
        cfgs = [small_cfg(p) for p in (0.1, 1.0, 10.0)]
        swept = mc.estimate_expected_cutset_sweep(cfgs, 3, 4, 50.0, 6)
        for cfg, res in zip(cfgs, swept):
            single = mc.estimate_expected_cutset(cfg, 3, 4, 50.0, 6)
            assert res.mimo == single.mimo
            assert res.jensen == single.jensen

    def test_sweep_rejects_mixed_geometry(self):
        with pytest.raises(ParameterError):
            mc.estimate_expected_cutset_sweep([small_cfg(), small_cfg(R=6.0)], 1, 1, 60.0, 0)

    def test_jensen_independent_of_fading_model(self):
        cfg = small_cfg(1.0)
        a = mc.estimate_expected_cutset(cfg, 5, 3, 50.0, 2, "rayleigh", keep_records=True)
        b = mc.estimate_expected_cutset(cfg, 5, 3, 50.0, 2, "uniform_phase", keep_records=True)
        assert a.jensen == b.jensen
        assert [r[4] for r in a.records] == [r[4] for r in b.records]
        assert a.mimo != b.mimo

    def test_standard_error_scaling_with_draws(self):
        # one trial: the error comes from the spread over fading draws
        cfg = small_cfg(1.0, R=3.0)
        se = {n: mc.estimate_expected_cutset(cfg, 1, n, 30.0, 4).mimo.std_error for n in (200, 400, 800)}
        assert se[400] / se[200] == pytest.approx(1 / math.sqrt(2), rel=0.2)
        assert se[800] / se[200] == pytest.approx(0.5, rel=0.2)

    def test_standard_error_scaling_with_trials(self):
        cfg = small_cfg(1.0, R=3.0)
        se = {n: mc.estimate_expected_cutset(cfg, n, 1, 30.0, 5).jensen.std_error for n in (50, 200)}
        assert se[200] / se[50] == pytest.approx(0.5, rel=0.3)

    def test_bad_counts(self):
        with pytest.raises(ParameterError):
            mc.estimate_expected_cutset(small_cfg(), 0, 1, 50.0, 0)

    def test_records_csv(self, tmp_path):
        est = mc.estimate_expected_cutset(small_cfg(), 2, 2, 50.0, 0, keep_records=True)
        path = tmp_path / "trials.csv"
        mc.write_records_csv(path, est.records)
        lines = path.read_text().splitlines()
        assert lines[0] == "trial,draw,mimo_nats,miso_nats,jensen_nats"
        assert len(lines) == 5
