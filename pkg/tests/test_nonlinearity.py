import numpy as np
import pytest

from mcsvortex import (
    GridSpec,
    NegativeArgument,
    OutOfRange,
    cp1_model,
    model_from_name,
    tabulated_model,
    u1_model,
)


class TestLinearModel:
    def test_below_truncation(self):
        model = u1_model(1.0)
        assert model.eval(0.7) == pytest.approx((0.7, 1.0, 0.0), abs=1e-15)
        assert model.f0 == 0.0
        assert model.s == 1.0

    def test_inverse_identity_point(self):
        assert u1_model(1.0).inverse(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_needs_positive_s(self):
        with pytest.raises(ValueError):
            u1_model(0.0)


class TestRationalModel:
    def test_zero_at_one(self):
        model = cp1_model(0.5)
        f, _, _ = model.eval(1.0)
        assert f == pytest.approx(0.0, abs=1e-15)
        assert model.inverse(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_closed_form_derivatives(self):
        model = cp1_model(0.5)
        for t in (0.0, 0.3, 1.0, 4.2, 25.0):
            _, f1, f2 = model.eval(t)
            assert f1 == pytest.approx(2.0 / (1.0 + t) ** 2, rel=1e-14)
            assert f2 == pytest.approx(-4.0 / (1.0 + t) ** 3, rel=1e-14)

    def test_derivatives_match_finite_differences(self):
        model = cp1_model(0.5)
        step = 1e-5
        for t in (1.0, 0.4, 2.7):
            f_m, _, _ = model.eval(t - step)
            f_0, f1, f2 = model.eval(t)
            f_p, _, _ = model.eval(t + step)
            fd1 = (f_p - f_m) / (2 * step)
            fd2 = (f_p - 2 * f_0 + f_m) / step**2
            assert f1 == pytest.approx(fd1, rel=1e-6)
            assert f2 == pytest.approx(fd2, rel=1e-4)

    def test_s_range_enforced(self):
        with pytest.raises(ValueError):
            cp1_model(1.0)
        with pytest.raises(ValueError):
            cp1_model(-1.0)


class TestTruncation:
    def test_continuity_across_threshold(self):
        model = u1_model(1.0)
        T = model.T
        eps = 1e-11
        below = model.eval(T - eps)
        above = model.eval(T + eps)
        for lo, hi in zip(below, above):
            assert abs(hi - lo) <= 1e-10

    def test_continuity_at_freeze_point(self):
        model = u1_model(1.0)
        eps = 1e-11
        below = model.eval(2 * model.T - eps)
        above = model.eval(2 * model.T + eps)
        for lo, hi in zip(below, above):
            assert abs(hi - lo) <= 1e-10

    def test_flat_beyond_twice_threshold(self):
        model = u1_model(1.0)
        f_far, f1_far, f2_far = model.eval(10 * model.T)
        assert f1_far == 0.0
        assert f2_far == 0.0
        f_edge, _, _ = model.eval(2 * model.T)
        assert f_far == pytest.approx(f_edge, rel=1e-14)

    def test_bounded_envelope(self, rng):
        model = u1_model(1.0)
        ts = np.concatenate([np.linspace(0, 10, 2001), rng.uniform(0, 50, 500)])
        f, f1, f2 = model._eval_arrays(ts)
        assert np.all(np.isfinite(f)) and np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))
        assert np.max(np.abs(f) + np.abs(f1) + np.abs(f2)) <= 10.0

    def test_monotone(self, rng):
        for model in (u1_model(1.0), cp1_model(0.5)):
            ts = np.sort(rng.uniform(0.0, 3.0 * (model.T if np.isfinite(model.T) else 2.0), 200))
            f, _, _ = model._eval_arrays(ts)
            strictly_below_t = ts < (model.T if np.isfinite(model.T) else np.inf)
            pairs = zip(f[strictly_below_t][:-1], f[strictly_below_t][1:])
            assert all(b > a for a, b in pairs)


class TestEvalField:
    def test_constant_field(self):
        grid = GridSpec(8)
        model = cp1_model(0.5)
        f, f1, f2 = model.eval_field(grid.constant(1.0))
        expected = model.eval(1.0)
        assert np.allclose(f.values, expected[0], atol=1e-15)
        assert np.allclose(f1.values, expected[1], atol=1e-15)
        assert np.allclose(f2.values, expected[2], atol=1e-15)

    def test_zeros_field_linear_model(self):
        grid = GridSpec(8)
        f, f1, f2 = u1_model(1.0).eval_field(grid.constant(0.0))
        assert np.all(f.values == 0.0)
        assert np.all(f1.values == 1.0)
        assert np.all(f2.values == 0.0)

    def test_matches_scalar_loop(self, rng):
        grid = GridSpec(8)
        model = u1_model(1.0)
        t = grid.field(rng.uniform(0.0, 5.0, size=(8, 8)))
        f, f1, f2 = model.eval_field(t)
        for i in range(8):
            for j in range(8):
                sf, sf1, sf2 = model.eval(t.values[i, j])
                assert f.values[i, j] == pytest.approx(sf, abs=1e-15)
                assert f1.values[i, j] == pytest.approx(sf1, abs=1e-15)
                assert f2.values[i, j] == pytest.approx(sf2, abs=1e-15)

    def test_negative_argument_reports_index(self):
        grid = GridSpec(8)
        vals = np.ones((8, 8))
        vals[3, 5] = -0.25
        with pytest.raises(NegativeArgument, match=r"\(3, 5\)"):
            u1_model(1.0).eval_field(grid.field(vals))

    def test_scalar_negative_argument(self):
        with pytest.raises(NegativeArgument):
            u1_model(1.0).eval(-0.1)


class TestInverse:
    def test_random_targets_match_bisection_oracle(self, rng):
        for model in (u1_model(1.0), cp1_model(0.5)):
            hi = model.T if np.isfinite(model.T) else 64.0
            for _ in range(20):
                y = float(rng.uniform(model.f0, model.f_upper - 1e-9))
                lo_b, hi_b = 0.0, hi
                while model._eval_arrays(np.asarray(hi_b))[0] <= y:
                    hi_b *= 2.0
                for _ in range(64):
                    mid = 0.5 * (lo_b + hi_b)
                    if float(model._eval_arrays(np.asarray(mid))[0]) > y:
                        hi_b = mid
                    else:
                        lo_b = mid
                t = model.inverse(y)
                f_t, _, _ = model.eval(t)
                assert abs(f_t - y) <= 1e-12
                assert t == pytest.approx(0.5 * (lo_b + hi_b), abs=1e-9)

    def test_round_trip_below_threshold(self, rng):
        model = u1_model(1.0)
        for t in rng.uniform(0.0, 0.95 * model.T, 20):
            f_t, _, _ = model.eval(float(t))
            assert model.inverse(f_t) == pytest.approx(float(t), abs=1e-10)

    def test_out_of_range(self):
        model = u1_model(1.0)
        with pytest.raises(OutOfRange):
            model.inverse(-0.5)
        with pytest.raises(OutOfRange):
            model.inverse(model.f_upper + 0.1)


class TestTabulatedModel:
    def make(self):
        ts = np.linspace(0.0, 3.0, 40)
        return tabulated_model(ts, np.sqrt(ts + 0.01), s=1.0)

    def test_interpolates_samples(self):
        model = self.make()
        f, _, _ = model.eval(1.5)
        assert f == pytest.approx(np.sqrt(1.51), rel=1e-3)

    def test_inverse_round_trip(self):
        model = self.make()
        y = 0.9
        t = model.inverse(y)
        f_t, _, _ = model.eval(t)
        assert abs(f_t - y) <= 1e-12

    def test_rejects_non_monotone(self):
        ts = np.linspace(0.0, 1.0, 10)
        fs = np.sin(4 * ts)
        with pytest.raises(ValueError):
            tabulated_model(ts, fs, s=0.2)

    def test_registry(self):
        assert model_from_name("u1").s == 1.0
        assert model_from_name("cp1").s == 0.5
        custom = model_from_name(
            "custom", s=1.0, table=(np.linspace(0, 3, 20), np.linspace(0, 3, 20) ** 1.0 + 0.0)
        )
        assert custom.name == "custom"
        with pytest.raises(ValueError):
            model_from_name("unknown")
        with pytest.raises(ValueError):
            model_from_name("custom")
