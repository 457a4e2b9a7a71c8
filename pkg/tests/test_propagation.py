import math

import numpy as np
import pytest

from eitlab.eit import eit_bandwidth, slow_light_delay
from eitlab.medium import MediumParams
from eitlab.propagation import (
    ControlSchedule,
    ControlSegment,
    Envelope,
    GridSpec,
    IntegrationError,
    SETTLE_TIME,
    efficiency,
    evolve,
    refine_until_converged,
    store_and_retrieve,
    suggest_grid,
)


def gaussian_input(span, center, fwhm, n=2049):
    t = np.linspace(0.0, span, n)
    return Envelope.gaussian(t, center=center, fwhm=fwhm)


class TestEnvelope:
    def test_needs_16_points(self):
        t = np.linspace(0, 1, 8)
        with pytest.raises(ValueError):
            Envelope(t, np.zeros(8, dtype=complex))

    def test_rejects_nonuniform_grid(self):
        t = np.array([0.0, 1.0, 2.0, 3.5] + list(np.arange(4.5, 17.0)))
        with pytest.raises(ValueError):
            Envelope(t, np.zeros(t.size, dtype=complex))

    def test_gaussian_intensity_fwhm(self):
        env = gaussian_input(100.0, 50.0, 12.0)
        assert env.intensity_fwhm() == pytest.approx(12.0, rel=1e-3)

    def test_normalized_unit_area(self):
        env = gaussian_input(100.0, 50.0, 12.0).normalized()
        assert env.intensity_area() == pytest.approx(1.0, rel=1e-12)

    def test_sample_zero_outside_support(self):
        env = gaussian_input(10.0, 5.0, 2.0)
        assert env.sample(np.array([-5.0, 20.0])) == pytest.approx([0.0, 0.0])


class TestEfficiency:
    def test_identity(self):
        env = gaussian_input(50.0, 25.0, 8.0)
        assert efficiency(env, env) == pytest.approx(1.0)

    def test_zero_output(self):
        env = gaussian_input(50.0, 25.0, 8.0)
        zero = Envelope(env.t, np.zeros_like(env.values))
        assert efficiency(zero, env) == 0.0

    def test_quadratic_in_amplitude(self):
        env = gaussian_input(50.0, 25.0, 8.0)
        half = env.scaled(1.0 / math.sqrt(2.0))
        assert efficiency(half, env) == pytest.approx(0.5, rel=1e-12)

    def test_zero_reference_rejected(self):
        env = gaussian_input(50.0, 25.0, 8.0)
        zero = Envelope(env.t, np.zeros_like(env.values))
        with pytest.raises(ValueError):
            efficiency(env, zero)

    def test_mismatched_spacing_rejected(self):
        a = gaussian_input(50.0, 25.0, 8.0, n=513)
        b = gaussian_input(50.0, 25.0, 8.0, n=1025)
        with pytest.raises(ValueError):
            efficiency(a, b)


class TestControlSchedule:
    def test_segments_must_be_contiguous(self):
        with pytest.raises(ValueError):
            ControlSchedule(
                [ControlSegment(0, 10, 1.0), ControlSegment(11, 20, 1.0)]
            )

    def test_negative_omega_rejected(self):
        with pytest.raises(ValueError):
            ControlSchedule([ControlSegment(0, 10, -1.0)])

    def test_zero_exactly_during_storage(self):
        ctrl = ControlSchedule.write_store_read(1.0, t_off=20.0, tau=30.0)
        t = np.linspace(20.0, 50.0, 501)
        assert np.all(ctrl.omega_at(t) == 0.0)

    def test_ramps_live_inside_bright_segments(self):
        ctrl = ControlSchedule.write_store_read(2.0, t_off=20.0, tau=30.0, ramp=1.0)
        assert ctrl.omega_at(np.array([19.0]))[0] == pytest.approx(2.0)
        assert 0.0 < ctrl.omega_at(np.array([19.5]))[0] < 2.0
        assert ctrl.omega_at(np.array([50.5]))[0] > 0.0

    def test_tau_property(self):
        ctrl = ControlSchedule.write_store_read(1.0, t_off=20.0, tau=35.0)
        assert ctrl.tau == pytest.approx(35.0)

    def test_storage_interval_none_for_constant(self):
        assert ControlSchedule.constant(1.0, 50.0).storage_interval() is None


class TestEvolve:
    def test_empty_medium_passthrough(self):
        med = MediumParams(d=0.0)
        inp = gaussian_input(60.0, 25.0, 8.0)
        ctrl = ControlSchedule.constant(1.0, 60.0)
        st = evolve(inp, ctrl, med, GridSpec(64, 600))
        # co-moving frame: the transmitted field equals the input identically
        assert np.max(np.abs(st.output - inp.sample(st.t))) < 1e-12
        applied_area = float(np.trapezoid(np.abs(st.input_applied) ** 2, st.t))
        assert st.output_area() == pytest.approx(applied_area, rel=1e-12)

    @pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
    def test_beer_absorption(self, d):
        # analytic two-level oracle: on-resonance intensity leaves exp(-2d)
        med = MediumParams(d=d)
        inp = gaussian_input(240.0, 120.0, 40.0)
        ctrl = ControlSchedule.constant(0.0, 240.0, ramp=0.5)
        st = evolve(inp, ctrl, med, GridSpec(256, 2400))
        eta = st.output_area() / inp.intensity_area()
        assert eta == pytest.approx(math.exp(-2.0 * d), rel=0.05)

    def test_slow_light_delay_matches_formula(self):
        d, om = 20.0, 1.0
        med = MediumParams(d=d)
        duration = d / om**2
        span = 5.0 * duration
        inp = gaussian_input(span, 1.5 * duration, duration)
        ctrl = ControlSchedule.constant(om, span)
        st = evolve(inp, ctrl, med, suggest_grid(med, ctrl))
        measured = st.output_envelope().peak_time() - inp.peak_time()
        assert measured == pytest.approx(slow_light_delay(med, om), rel=0.10)

    def test_causality(self):
        # input supported only on t >= 100; output must vanish before that
        med = MediumParams(d=10.0)
        t = np.linspace(100.0, 200.0, 1025)
        inp = Envelope.gaussian(t, center=140.0, fwhm=15.0)
        ctrl = ControlSchedule.constant(1.0, 200.0)
        st = evolve(inp, ctrl, med, suggest_grid(med, ctrl))
        peak = float(np.max(np.abs(st.output)))
        early = st.t < 99.9
        assert np.max(np.abs(st.output[early])) < 1e-8 * peak

    def test_linearity_in_input_amplitude(self):
        med = MediumParams(d=15.0)
        inp = gaussian_input(120.0, 50.0, 15.0)
        ctrl = ControlSchedule.constant(1.0, 120.0)
        grid = GridSpec(128, 1024)
        out1 = evolve(inp, ctrl, med, grid).output
        out2 = evolve(inp.scaled(2.0), ctrl, med, grid).output
        assert np.allclose(out2, 2.0 * out1, rtol=1e-13, atol=0.0)

    def test_dark_state_transmission(self):
        med = MediumParams(d=20.0)
        inp = gaussian_input(1200.0, 400.0, 200.0)
        ctrl = ControlSchedule.constant(1.0, 1200.0)
        assert 200.0 > 10.0 / eit_bandwidth(1.0, med)  # bandwidth << window
        st = evolve(inp, ctrl, med, suggest_grid(med, ctrl))
        assert st.output_area() / inp.intensity_area() >= 0.99

    def test_initial_state_unexcited(self):
        med = MediumParams(d=5.0)
        inp = gaussian_input(50.0, 25.0, 8.0)
        ctrl = ControlSchedule.constant(1.0, 50.0)
        st = evolve(inp, ctrl, med, GridSpec(64, 256))
        assert np.all(st.P[0] == 0.0)
        assert np.all(st.S[0] == 0.0)

    def test_instability_reports_step_sizes(self):
        med = MediumParams(d=200.0)
        inp = gaussian_input(400.0, 100.0, 60.0)
        ctrl = ControlSchedule.constant(1.0, 400.0)
        with pytest.raises(IntegrationError, match="n_z"):
            evolve(inp, ctrl, med, GridSpec(400, 1000), check_every=16)


class TestStoreAndRetrieve:
    @staticmethod
    def scenario(d=20.0, om=1.0, tau=30.0, gamma_s=0.0):
        med = MediumParams(d=d, gamma_s=gamma_s)
        window = (1.6 * d + 40.0) / om**2
        ctrl = ControlSchedule.write_store_read(om, t_off=window, tau=tau)
        t = np.linspace(0.0, window, 513)
        inp = Envelope.gaussian(t, 0.55 * window, 0.3 * window).normalized()
        return med, ctrl, inp

    def test_requires_storage_phase(self):
        med, _, inp = self.scenario()
        ctrl = ControlSchedule.constant(1.0, 100.0)
        with pytest.raises(ValueError):
            store_and_retrieve(inp, ctrl, med, GridSpec(64, 256))

    def test_no_decay_means_tau_independent(self):
        med, ctrl1, inp = self.scenario(tau=40.0)
        _, ctrl2, _ = self.scenario(tau=80.0)
        grid = suggest_grid(med, ctrl1)
        eta1 = store_and_retrieve(inp, ctrl1, med, grid).eta_total
        eta2 = store_and_retrieve(inp, ctrl2, med, grid).eta_total
        assert abs(eta1 - eta2) < 1e-6

    def test_pure_spin_decay_exponential(self):
        # tau scan decays as exp(-2 gamma_s tau); fit the log-linear slope
        gamma_s = 2e-3
        med, _, inp = self.scenario(gamma_s=gamma_s)
        taus = np.array([40.0, 240.0, 440.0, 640.0])
        etas = []
        for tau in taus:
            _, ctrl, _ = self.scenario(tau=tau, gamma_s=gamma_s)
            grid = suggest_grid(med, ctrl)
            etas.append(store_and_retrieve(inp, ctrl, med, grid).eta_total)
        slope = np.polyfit(taus, np.log(etas), 1)[0]
        assert slope == pytest.approx(-2.0 * gamma_s, rel=0.01)

    def test_ledger_closes(self):
        med, ctrl, inp = self.scenario(d=25.0)
        grid = refine_until_converged(inp, ctrl, med, 1e-3)
        report = store_and_retrieve(inp, ctrl, med, grid)
        assert report.ledger_total() == pytest.approx(1.0, abs=0.01)
        for component in (
            report.eta_total,
            report.eta_leakage,
            report.eta_scatter,
            report.eta_spin_decay,
            report.eta_residual,
        ):
            assert 0.0 <= component <= 1.0

    def test_fast_forward_matches_direct_integration(self):
        # storage slightly above vs below the settle threshold must agree
        med, _, inp = self.scenario(gamma_s=1e-3)
        _, ctrl_short, _ = self.scenario(tau=SETTLE_TIME - 1.0, gamma_s=1e-3)
        _, ctrl_long, _ = self.scenario(tau=SETTLE_TIME + 1.0, gamma_s=1e-3)
        grid = suggest_grid(med, ctrl_short)
        eta_short = store_and_retrieve(inp, ctrl_short, med, grid).eta_total
        eta_long = store_and_retrieve(inp, ctrl_long, med, grid).eta_total
        expected = eta_short * math.exp(-2.0 * 1e-3 * 2.0)
        assert eta_long == pytest.approx(expected, rel=2e-3)


class TestRefinement:
    def test_infinite_tolerance_returns_coarsest(self):
        med, ctrl, inp = TestStoreAndRetrieve.scenario(d=10.0)
        base = GridSpec(64, 256)
        assert refine_until_converged(inp, ctrl, med, math.inf, base=base) == base

    def test_smooth_scenario_converges(self):
        med, ctrl, inp = TestStoreAndRetrieve.scenario(d=10.0)
        grid = refine_until_converged(inp, ctrl, med, 1e-3)
        assert grid.n_z >= 64 and grid.n_t >= 64

    def test_tighter_tolerance_never_coarser(self):
        med, ctrl, inp = TestStoreAndRetrieve.scenario(d=10.0)
        loose = refine_until_converged(inp, ctrl, med, 2e-2)
        tight = refine_until_converged(inp, ctrl, med, 1e-3)
        assert tight.n_z >= loose.n_z
        assert tight.n_t >= loose.n_t

    def test_nonpositive_tolerance_rejected(self):
        med, ctrl, inp = TestStoreAndRetrieve.scenario(d=10.0)
        with pytest.raises(ValueError):
            refine_until_converged(inp, ctrl, med, 0.0)

    def test_unreachable_tolerance_errors_out(self):
        med, ctrl, inp = TestStoreAndRetrieve.scenario(d=10.0)
        with pytest.raises(IntegrationError, match="did not converge"):
            refine_until_converged(inp, ctrl, med, 1e-15, max_doublings=1)
