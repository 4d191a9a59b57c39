import math

import numpy as np
import pytest
from scipy import integrate, special

from prbh.density_model import (
    DensityCurve,
    cdf_exact,
    cdf_small_y,
    chi_square_pdf,
    density_curve,
    f_density,
    fit_distance,
    normalized_curves,
    z_grid,
)

# continuous L1 gap for N=1 by mpmath quadrature between the crossings of
# 4(1-z)^3 and 10 e^{-10z} / (1 - e^{-10}) on [0, 1)
FIT_DISTANCE_N1 = 0.601317606749606625


class TestFDensity:
    def test_examples(self):
        assert f_density(0.0, 1) == 1.0
        assert f_density(0.1, 2) == pytest.approx(math.exp(-1), abs=1e-15)
        assert f_density(0.0, 3) == 0.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            f_density(-0.1, 2)
        with pytest.raises(ValueError):
            f_density(0.1, 0)

    @pytest.mark.parametrize("N", range(1, 11))
    def test_mass_is_one_tenth(self, N):
        total, _ = integrate.quad(f_density, 0, np.inf, args=(N,), epsabs=1e-13, epsrel=1e-13)
        assert abs(total - 0.1) <= 1e-8

    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_mode(self, N):
        assert density_curve(N, 1000).argmax() == pytest.approx((N - 1) / 10, abs=1e-3)

    def test_rate_is_configurable(self):
        assert f_density(0.25, 2, rate=4.0) == pytest.approx(math.exp(-1), abs=1e-15)


class TestChiSquare:
    def test_at_zero(self):
        assert chi_square_pdf(0.0, 2) == 0.5

    def test_identity_example(self):
        assert abs(f_density(0.15, 3) - 2 * chi_square_pdf(3.0, 6)) <= 1e-12

    def test_identity_random_points(self):
        rng = np.random.default_rng(0)
        for z, N in zip(rng.uniform(0, 3, 10_000), rng.integers(1, 11, 10_000)):
            assert abs(f_density(z, int(N)) - 2 * chi_square_pdf(20 * z, 2 * int(N))) <= 1e-12

    def test_closed_form(self):
        for x, k in ((1.3, 4), (7.0, 10)):
            ref = x ** (k / 2 - 1) * math.exp(-x / 2) / (2 ** (k / 2) * math.gamma(k / 2))
            assert chi_square_pdf(x, k) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("dof", [2, 6, 20])
    def test_normalized(self, dof):
        assert abs(integrate.quad(chi_square_pdf, 0, np.inf, args=(dof,))[0] - 1) <= 1e-8

    @pytest.mark.parametrize("dof", [0, 3, -2, 2.5])
    def test_rejects_dof(self, dof):
        with pytest.raises(ValueError):
            chi_square_pdf(1.0, dof)


class TestSmallY:
    def test_examples(self):
        assert cdf_small_y(1.0, 1) == 1.0
        assert cdf_small_y(0.5, 2) == 0.125

    def test_exact_formula(self):
        for y in (0.01, 0.3, 2.0):
            for N in range(1, 8):
                assert cdf_small_y(y, N) == y**N / math.factorial(N)

    def test_gap_to_incomplete_gamma(self):
        exact = cdf_exact(0.1, 2)
        assert exact == pytest.approx(special.gammainc(2, 0.1))
        assert abs(cdf_small_y(0.1, 2) - exact) / exact < 0.10

    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_error_order(self, N):
        ys = np.logspace(-2.5, -1, 8)
        # the argument of the small-y CDF is x = 10 z, so integrate f over z in [0, y/10]
        errs = [cdf_small_y(y, N) - 10 * integrate.quad(f_density, 0, y / 10, args=(N,), epsabs=0, epsrel=1e-13)[0] for y in ys]
        slope = np.polyfit(np.log(ys), np.log(errs), 1)[0]
        assert slope == pytest.approx(N + 1, abs=0.05)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            cdf_small_y(-1.0, 2)


class TestCurves:
    def test_grid(self):
        zs = z_grid(200)
        assert len(zs) == 200 and zs[0] == 0 and zs[-1] < 1 and np.all(np.diff(zs) > 0)
        with pytest.raises(ValueError):
            z_grid(1)

    def test_n1_decreasing(self):
        assert np.all(np.diff(density_curve(1, 200).f) < 0)

    def test_n5_single_interior_max(self):
        f = density_curve(5, 200).f
        peak = int(np.argmax(f))
        assert 0 < peak < len(f) - 1
        assert np.all(np.diff(f[: peak + 1]) > 0) and np.all(np.diff(f[peak:]) < 0)
        assert density_curve(5, 200).argmax() == pytest.approx(0.4, abs=1 / 200)

    def test_csv_round_trip(self):
        c = density_curve(3, 200)
        back = DensityCurve.from_csv(c.to_csv(), 3)
        assert back.z.tobytes() == c.z.tobytes() and back.f.tobytes() == c.f.tobytes()

    def test_csv_header_and_rows(self):
        lines = density_curve(3, 50).to_csv().splitlines()
        assert lines[0] == "z,f" and len(lines) == 51

    def test_invalid_curves(self):
        with pytest.raises(ValueError):
            DensityCurve(1, np.array([0.0, 0.5, 0.5]), np.ones(3))
        with pytest.raises(ValueError):
            DensityCurve(1, np.array([0.0, 1.0]), np.ones(2))
        with pytest.raises(ValueError):
            DensityCurve(1, np.array([0.0, 0.5]), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            DensityCurve.from_csv("a,b\n1,2\n", 1)

    def test_points(self):
        c = density_curve(2, 4)
        assert c.points[1] == (0.25, pytest.approx(2.5 * math.exp(-2.5)))


class TestFitDistance:
    def test_n1_against_continuous_oracle(self):
        assert fit_distance(1) == pytest.approx(FIT_DISTANCE_N1, abs=1e-5)
        assert fit_distance(1, z_grid(20_000)) == pytest.approx(FIT_DISTANCE_N1, abs=1e-8)

    @pytest.mark.parametrize("N", range(1, 11))
    def test_finite(self, N):
        d = fit_distance(N)
        assert math.isfinite(d) and 0 <= d <= 2

    @pytest.mark.parametrize("N", [1, 4, 9])
    def test_normalizations(self, N):
        zs, exact, approx = normalized_curves(N)
        assert abs(integrate.trapezoid(exact, zs) - 1) <= 1e-8
        assert abs(integrate.trapezoid(approx, zs) - 1) <= 1e-8
