import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from wavedmd.dmd import (
    DmdModel,
    cycle_duration,
    fit_dmd,
    is_extrapolation,
    mode_report,
    phase_magnitude,
    reconstruct,
    reconstruct_values,
    temporal_dynamics,
)
from wavedmd.errors import RankError, ValidationError
from wavedmd.synth import CycleSpec, gen_linear_system, gen_planted_cycles, random_diagonalizable, rng_for

from conftest import make_panel


def rotation(theta, scale=1.0):
    c, s = math.cos(theta), math.sin(theta)
    return scale * np.array([[c, -s], [s, c]])


def match_error(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def manual_model(lams, modes, amps, dt=1.0):
    lams = np.asarray(lams, dtype=complex)
    modes = np.asarray(modes, dtype=complex)
    omega = np.where(lams != 0, np.log(np.where(lams != 0, lams, 1)) / dt, np.nan)
    ids = tuple(f"s{i}" for i in range(modes.shape[0]))
    return DmdModel(lams, modes, np.asarray(amps, dtype=complex), omega, dt, 0, 10, 1.0, np.ones(1), ids)


def test_damped_rotation_recovers_eigenvalues():
    A = rotation(0.1, 0.99)
    panel = gen_linear_system(A, [1.0, 0.5], 60)
    model = fit_dmd(panel, rank=2)
    assert match_error(model.eigenvalues, np.linalg.eigvals(A)) <= 1e-8
    rep = mode_report(model)
    assert len(rep) == 1
    assert rep.rows[0].frequency == pytest.approx(0.1 / (2 * math.pi), abs=1e-10)
    assert rep.rows[0].growth_rate == pytest.approx(math.log(0.99), abs=1e-10)


def test_constant_panel_single_zero_frequency_mode():
    panel = make_panel(np.tile([[2.0], [-1.0], [0.5]], (1, 20)))
    model = fit_dmd(panel)
    assert model.rank == 1
    assert model.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    row = mode_report(model).rows[0]
    assert row.frequency == 0.0
    assert math.isinf(row.duration) and row.duration_label == "Inf"


def test_planted_short_cycles_exact():
    periods = [5, 19, 31, 7]
    rng = rng_for(4)
    specs = [CycleSpec(p, rng.normal(size=8) + 1j * rng.normal(size=8), amplitude=1.0 + i) for i, p in enumerate(periods)]
    model = fit_dmd(gen_planted_cycles(specs, 400), rank=8)
    freqs = sorted(r.frequency for r in mode_report(model).rows)
    np.testing.assert_allclose(freqs, sorted(1 / p for p in periods), atol=1e-10)


@pytest.mark.parametrize("f, days", [(0.2154, 5), (0.0517, 19), (0.0320, 31), (0.1436, 7),
                                     (1 / 925, 925), (1 / 654, 654), (1 / 332, 332)])
def test_duration_rounding(f, days):
    assert cycle_duration(f) == days


def test_zero_frequency_duration_is_infinite():
    assert math.isinf(cycle_duration(0.0))


def test_report_one_row_per_conjugate_pair(rng):
    A = random_diagonalizable(6, rng)
    model = fit_dmd(gen_linear_system(A, rng.normal(size=6), 100), rank=6)
    rep = mode_report(model)
    assert len(rep) == 3
    assert all(model.eigenvalues[r.mode].imag > 0 for r in rep.rows)


def test_rank_order_tie_break():
    model = manual_model([1.0, np.exp(0.3j), np.exp(-0.3j), np.exp(0.1j), np.exp(-0.1j)],
                         np.eye(5), [1.0, 1.0, 1.0, 1.0, 1.0])
    rep = mode_report(model)
    assert rep.rank_order == [0, 3, 1]  # equal power: lowest frequency first


def test_negative_real_eigenvalue_is_nyquist():
    model = manual_model([-0.5], [[1.0]], [1.0])
    row = mode_report(model).rows[0]
    assert row.nyquist
    assert row.frequency == pytest.approx(0.5)
    assert row.duration == 2


def test_zero_eigenvalue_marked_decayed():
    model = manual_model([0.0, 0.9], np.eye(2), [1.0, 1.0])
    assert model.decayed.tolist() == [True, False]
    idx, _ = temporal_dynamics(model, [0, 1, 2])
    assert idx.tolist() == [1]
    row = next(r for r in mode_report(model).rows if r.mode == 0)
    assert row.decayed and row.growth_rate == -math.inf


def test_power_kind_amplitude():
    model = manual_model([0.9, 0.8], np.eye(2), [3.0, -4.0])
    assert [r.power for r in mode_report(model, "amplitude").rows] == [4.0, 3.0]
    assert [r.power for r in mode_report(model).rows] == [16.0, 9.0]
    with pytest.raises(ValidationError):
        mode_report(model, "energy")


class TestTemporal:
    def test_unit_eigenvalue_constant(self):
        _, tr = temporal_dynamics(manual_model([1.0], [[1.0]], [1.0]), np.arange(5))
        np.testing.assert_allclose(tr[0], 1.0, atol=1e-15)

    def test_geometric_halving(self):
        _, tr = temporal_dynamics(manual_model([0.5], [[1.0]], [1.0]), np.arange(6))
        np.testing.assert_allclose(tr[0].real, 0.5 ** np.arange(6), rtol=1e-14)

    def test_damped_19_day_cycle_combined_trace(self):
        growth, period = -0.004, 19.0
        spec = CycleSpec(period, np.array([1.0, 1j * 0.5, 0.3 - 0.2j]), amplitude=2.0, phase=0.4, growth_rate=growth)
        panel = gen_planted_cycles([spec], 300)
        model = fit_dmd(panel, rank=2)
        t = np.arange(300.0)
        idx, tr = temporal_dynamics(model, t, combine=True)
        assert idx.size == 1
        i = idx[0]
        b = model.amplitudes[i]
        closed = 2 * abs(b) * np.exp(growth * t) * np.cos(2 * np.pi * t / period + np.angle(b))
        np.testing.assert_allclose(tr[0], closed, atol=1e-8)

    def test_extrapolation_flag(self):
        model = manual_model([1.0], [[1.0]], [1.0])
        assert not is_extrapolation(model, [0, 5, 10])
        assert is_extrapolation(model, [0, 11])


class TestReconstruct:
    def test_full_rank_linear_system(self, rng):
        A = random_diagonalizable(8, rng)
        panel = gen_linear_system(A, rng.normal(size=8), 120)
        model = fit_dmd(panel, rank=8)
        rec = reconstruct(model)
        err = np.linalg.norm(rec.values - panel.values) / np.linalg.norm(panel.values)
        assert err <= 1e-6
        assert np.max(np.abs(reconstruct_values(model, panel.times).imag)) <= 1e-9

    def test_one_step_consistency(self, rng):
        A = random_diagonalizable(6, rng)
        panel = gen_linear_system(A, rng.normal(size=6), 80)
        model = fit_dmd(panel, rank=6)
        X2 = panel.values[:, 1:]
        rec = reconstruct(model, panel.times[1:]).values
        assert np.linalg.norm(X2 - rec) / np.linalg.norm(X2) <= 1e-8

    def test_rank_one_data(self):
        v = np.array([1.0, -2.0, 0.5])
        panel = make_panel(v[:, None] * 0.9 ** np.arange(30)[None, :])
        model = fit_dmd(panel, rank=1)
        np.testing.assert_allclose(reconstruct(model).values, panel.values, atol=1e-8)

    def test_rank_zero_is_zero_panel(self, rng):
        panel = make_panel(rng.normal(size=(3, 10)))
        model = fit_dmd(panel, rank=0)
        assert model.rank == 0
        assert np.all(reconstruct(model).values == 0.0)
        assert len(mode_report(model)) == 0


class TestPhaseMagnitude:
    def test_real_positive_mode(self):
        mag, ph = phase_magnitude(manual_model([0.9], [[0.6], [0.8]], [1.0]), 0)
        np.testing.assert_allclose(mag, [0.6, 0.8])
        assert np.all(ph == 0.0)

    def test_negative_entry(self):
        mag, ph = phase_magnitude(manual_model([0.9], [[-3.0]], [1.0]), 0)
        assert mag[0] == 3.0 and ph[0] == pytest.approx(math.pi)

    def test_phase_in_half_open_interval(self):
        _, ph = phase_magnitude(manual_model([0.9], [[complex(-1.0, -0.0)]], [1.0]), 0)
        assert ph[0] == math.pi

    def test_quarter_period_lag(self):
        period = 40.0
        # series 2 lags series 1 by period / 4
        t = np.arange(400.0)
        x1 = np.cos(2 * np.pi * t / period)
        x2 = np.cos(2 * np.pi * (t - period / 4) / period)
        model = fit_dmd(make_panel([x1, x2]), rank=2)
        pos = int(np.argmax(model.eigenvalues.imag))
        _, ph = phase_magnitude(model, pos)
        diff = np.angle(np.exp(1j * (ph[1] - ph[0])))
        assert abs(diff) == pytest.approx(np.pi / 2, abs=1e-6)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            phase_magnitude(manual_model([0.9], [[1.0]], [1.0]), 1)


class TestFitErrors:
    def test_rank_too_large(self, rng):
        with pytest.raises(ValidationError):
            fit_dmd(make_panel(rng.normal(size=(3, 10))), rank=4)

    def test_zero_singular_value_in_truncation(self):
        panel = make_panel(np.tile([[1.0], [2.0], [3.0]], (1, 10)))
        with pytest.raises(RankError, match="below 1"):
            fit_dmd(panel, rank=2)

    def test_too_few_snapshots(self):
        with pytest.raises(ValidationError):
            fit_dmd(make_panel([[1.0, 2.0]]))

    def test_energy_threshold_selects_rank(self, rng):
        A = random_diagonalizable(4, rng)
        panel = gen_linear_system(A, rng.normal(size=4), 50)
        assert fit_dmd(panel, energy=1.0).rank == 4
        model = fit_dmd(panel)
        assert model.svd_energy >= 0.999
        with pytest.raises(ValidationError):
            fit_dmd(panel, energy=1.5)


class TestInvariants:
    def test_conjugate_closure(self, rng):
        A = random_diagonalizable(10, rng)
        model = fit_dmd(gen_linear_system(A, rng.normal(size=10), 150), rank=10)
        lam = model.eigenvalues
        assert match_error(lam, lam.conj()) <= 1e-12
        norms = np.linalg.norm(model.modes, axis=0)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)
        for i, l in enumerate(lam):
            if l.imag > 0:
                j = int(np.argmin(np.abs(lam - l.conj())))
                np.testing.assert_allclose(model.modes[:, j], model.modes[:, i].conj(), atol=1e-10)
                assert model.amplitudes[j] == pytest.approx(model.amplitudes[i].conjugate(), abs=1e-8)

    @pytest.mark.parametrize("c", [0.1, 1.0, 10.0])
    def test_power_rank_invariance_under_scaling(self, c, rng):
        specs = [CycleSpec(p, rng.normal(size=10) + 1j * rng.normal(size=10), amplitude=a)
                 for p, a in [(50.0, 3.0), (9.0, 1.0), (23.0, 2.0)]]
        panel = gen_planted_cycles(specs, 300, noise_std=1e-3, seed=1)
        base = mode_report(fit_dmd(panel, rank=6))
        scaled = mode_report(fit_dmd(panel.with_values(c * panel.values), rank=6))
        assert scaled.rank_order == base.rank_order
        np.testing.assert_allclose([r.power for r in scaled.rows], [c**2 * r.power for r in base.rows], rtol=1e-8)

    def test_duration_reproduces_rounded_frequency_for_whole_day_periods(self):
        for days in (925, 654, 332, 19):
            assert cycle_duration(1 / days) == days
            assert round(1 / cycle_duration(1 / days), 4) == round(1 / days, 4)
