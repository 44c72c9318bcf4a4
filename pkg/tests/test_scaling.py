import numpy as np
import pytest

from almg import meanfield as mf
from almg import scaling as sc
from almg.model import ModelParams


class TestSplinePeak:
    def test_parabola(self):
        x = np.linspace(0, 1, 11)
        y = 2 - 5 * (x - 0.437) ** 2
        xp, yp = sc.spline_peak(x, y)
        assert xp == pytest.approx(0.437, abs=1e-10)
        assert yp == pytest.approx(2.0, abs=1e-10)

    def test_seven_point_parabola(self):
        x = np.linspace(0.0, 0.6, 7)
        assert sc.spline_peak(x, -((x - 0.3) ** 2))[0] == pytest.approx(0.3, abs=1e-10)

    def test_cubic(self):
        # y = -x^3 + 3x has a maximum at x = 1
        x = np.linspace(0.2, 1.8, 9)
        xp, yp = sc.spline_peak(x, -(x**3) + 3 * x)
        assert xp == pytest.approx(1.0, abs=1e-10)
        assert yp == pytest.approx(2.0, abs=1e-10)

    def test_monotone_rejected(self):
        with pytest.raises(sc.FitError):
            sc.spline_peak(np.arange(8.0), np.arange(8.0))

    def test_input_checks(self):
        with pytest.raises(ValueError):
            sc.spline_peak([0, 1, 2, 3], [0, 1, 0, 1])
        with pytest.raises(ValueError):
            sc.spline_peak([0, 1, 1, 3, 4], [0, 1, 2, 1, 0])

    def test_window(self):
        xs, ys = sc.peak_window(np.arange(100), np.arange(100), 2, half_width=10)
        assert xs[0] == 0 and xs[-1] == 12
        xs, _ = sc.peak_window(np.arange(100), np.arange(100), 50, half_width=1)
        assert len(xs) == 9


class TestPowerLaw:
    def test_exact(self):
        Ns = np.array([256, 512, 1024, 2048])
        fit = sc.powerlaw_fit(Ns, 7 * Ns**2.0)
        assert fit.exponent == pytest.approx(2.0, abs=1e-12)
        assert fit.exponent_stderr < 1e-10
        assert fit.prefactor == pytest.approx(7.0, rel=1e-9)
        assert fit.r_squared == pytest.approx(1.0)

    def test_scale_invariant_exponent(self):
        Ns = np.array([100, 200, 400, 800])
        v = Ns**-1.0 * (1 + 0.05 * np.array([1, -1, 1, -1]))
        a = sc.powerlaw_fit(Ns, v).exponent
        assert sc.powerlaw_fit(Ns, 13 * v).exponent == pytest.approx(a, abs=1e-12)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            sc.powerlaw_fit([1, 2], [1, 2])
        with pytest.raises(ValueError):
            sc.powerlaw_fit([1, 2, 3], [1, 0, 3])


class TestExtrapolation:
    def test_synthetic_recovered(self):
        Ns = np.array([200, 400, 800, 1600.0])
        fit = sc.extrapolate_max_energy(Ns, 0.8 + 3 / Ns)
        assert fit.E_cl == pytest.approx(0.8, abs=1e-6)
        assert fit.b == pytest.approx(1.0, abs=1e-4)
        assert fit.c == pytest.approx(3.0, rel=1e-3)
        assert fit.identifiable

    def test_constant_flagged(self):
        fit = sc.extrapolate_max_energy([200, 400, 800, 1600], [0.5] * 4)
        assert not fit.identifiable and fit.E_cl == 0.5 and np.isnan(fit.b)

    def test_history_monotone(self):
        Ns = np.array([200, 400, 800, 1600.0])
        fit = sc.extrapolate_max_energy(Ns, 0.3 - 0.7 * Ns**-1.5)
        h = np.array(fit.history)
        assert len(h) > 10 and np.all(np.diff(h) <= 0)

    def test_needs_four_sizes(self):
        with pytest.raises(ValueError):
            sc.extrapolate_max_energy([1, 2, 3], [1, 2, 3])


class TestThreshold:
    def test_crossing_interpolated(self):
        a = [-0.8, -0.6, -0.4, -0.2]
        d = [0.4, 0.2, 0.0, 0.0]
        assert sc.threshold_crossing(a, d, tol=0.0) == pytest.approx(-0.4)
        assert sc.threshold_crossing(a, d, tol=0.1) == pytest.approx(-0.5)

    def test_nan_skipped(self):
        assert sc.threshold_crossing([-0.8, -0.6, -0.4, -0.2], [0.4, np.nan, 0.0, np.nan], tol=0.0) == pytest.approx(-0.4)

    def test_crossing_errors(self):
        with pytest.raises(sc.FitError):
            sc.threshold_crossing([-0.8, -0.6], [0.1, 0.2])
        with pytest.raises(sc.FitError):
            sc.threshold_crossing([-0.8, -0.6], [0.0, 0.0])
        with pytest.raises(sc.FitError):
            sc.threshold_crossing([-0.8, -0.6], [np.nan, 0.3])

    def test_scan_validation(self):
        with pytest.raises(ValueError):
            sc.threshold_scan(0.2, [], [200, 400, 800, 1600])
        with pytest.raises(ValueError):
            sc.threshold_scan(0.2, [-0.5], [200, 400, 800])

    def test_point_below_threshold_positive(self):
        pt = sc.threshold_point(0.2, -0.8, [200, 400, 800, 1600])
        assert pt.f2 == pytest.approx(mf.f2_formula(0.2, -0.8))
        assert pt.difference == pytest.approx(0.2, abs=0.01)
        assert all(np.diff(pt.emax) != 0)

    def test_point_above_threshold_zero(self):
        pt = sc.threshold_point(0.2, -0.3, [200, 400, 800, 1600])
        assert abs(pt.difference) < 1e-3

    def test_max_excitation_u1(self):
        # xi = 0, alpha = 0: levels 0..N so the top excitation per particle is 1
        assert sc.max_excitation_per_particle(ModelParams(40, 0.0, 0.0)) == pytest.approx(1.0)


class TestQFSPeaks:
    def test_peak_near_critical_energy(self):
        peaks, curves = sc.qfs_peak_scaling(0.3, -0.6, [1024])
        assert set(peaks) == {"f1", "f2"}
        for pk in peaks.values():
            assert abs(pk.positions[0] - pk.critical_energy) < 2 / 1024
            assert pk.heights[0] > 0
        assert curves[0][0] == 1024

    def test_no_separatrix(self):
        with pytest.raises(sc.FitError):
            sc.qfs_peak_scaling(0.15, 0.0, [64])

    def test_locate_requires_levels(self):
        with pytest.raises(sc.FitError):
            sc.locate_qfs_peak(np.linspace(0, 0.1, 20), np.ones(20), 0.5, 0.01)
