import numpy as np
import pytest

from pdae1d import (
    Field,
    Grid1D,
    StatePair,
    compute_wx,
    constraint_residual,
    cumulative_integral,
    reconstruct_w,
)


def fine_running_integral(fn, x, points=1_000_001):
    # independent quadrature oracle: dense trapezoid on [0, x]
    s = np.linspace(0.0, x, points)
    return np.trapezoid(fn(s), s)


def sine_state(grid, amplitude=1.0):
    # u + v = amplitude * sin(pi x)
    return StatePair(
        Field(grid, amplitude * np.sin(np.pi * grid.nodes)), Field.zeros(grid)
    )


class TestCumulativeIntegral:
    def test_zero(self):
        grid = Grid1D(10)
        out = cumulative_integral(Field.zeros(grid))
        assert np.all(out.values == 0.0)
        assert out.boundary == (0.0, 0.0)

    def test_constant_is_exact(self):
        grid = Grid1D(12)
        ones = Field(grid, np.ones(12), boundary=(1.0, 1.0))
        out = cumulative_integral(ones)
        np.testing.assert_allclose(out.values, grid.nodes, rtol=1e-14)
        np.testing.assert_allclose(out.boundary[1], 1.0, rtol=1e-14)

    def test_sine_against_quadrature_oracle(self):
        grid = Grid1D(127)
        f = Field.sample(grid, lambda x: np.sin(np.pi * x))
        out = cumulative_integral(f)
        for j in (0, 31, 63, 126):
            oracle = fine_running_integral(lambda s: np.sin(np.pi * s), grid.nodes[j])
            assert abs(out.values[j] - oracle) < 1e-4
            assert abs(oracle - (1.0 - np.cos(np.pi * grid.nodes[j])) / np.pi) < 1e-12

    def test_second_order_refinement(self):
        errors = []
        for n in (31, 63, 127):
            grid = Grid1D(n)
            out = cumulative_integral(Field.sample(grid, lambda x: np.sin(np.pi * x)))
            exact = (1.0 - np.cos(np.pi * grid.nodes)) / np.pi
            errors.append(np.max(np.abs(out.values - exact)))
        ratios = [errors[i] / errors[i + 1] for i in range(2)]
        assert all(3.2 <= r <= 4.8 for r in ratios)

    def test_starts_at_zero_exactly(self):
        grid = Grid1D(9)
        rng = np.random.default_rng(1)
        f = Field(grid, rng.uniform(-1.0, 1.0, 9), boundary=(0.3, -0.2))
        assert cumulative_integral(f).boundary[0] == 0.0


class TestComputeWx:
    def test_zero_state(self):
        grid = Grid1D(8)
        out = compute_wx(StatePair.zeros(grid))
        assert np.all(out.values == 0.0) and out.boundary == (0.0, 0.0)

    def test_sine_closed_form(self):
        grid = Grid1D(127)
        out = compute_wx(sine_state(grid))
        exact = -(1.0 - np.cos(np.pi * grid.nodes)) / np.pi
        assert np.max(np.abs(out.values - exact)) < 1e-4

    def test_scaling_linearity(self):
        grid = Grid1D(33)
        rng = np.random.default_rng(2)
        state = StatePair(
            Field(grid, rng.uniform(-1.0, 1.0, 33)), Field(grid, rng.uniform(-1.0, 1.0, 33))
        )
        scaled = compute_wx(3.5 * state)
        np.testing.assert_allclose(scaled.values, 3.5 * compute_wx(state).values, rtol=1e-13)

    def test_impact_weights(self):
        grid = Grid1D(21)
        rng = np.random.default_rng(3)
        u = rng.uniform(-1.0, 1.0, 21)
        v = rng.uniform(-1.0, 1.0, 21)
        state = StatePair(Field(grid, u), Field(grid, v))
        weighted = compute_wx(state, p_u=2.0, p_v=-0.5)
        recombined = compute_wx(StatePair(Field(grid, 2.0 * u), Field(grid, -0.5 * v)))
        np.testing.assert_allclose(weighted.values, recombined.values, rtol=1e-13, atol=1e-16)


class TestReconstructW:
    def test_zero_state(self):
        grid = Grid1D(8)
        w = reconstruct_w(StatePair.zeros(grid))
        assert np.all(w.values == 0.0) and w.boundary == (0.0, 0.0)

    def test_sine_closed_form(self):
        # u + v = sin(pi x): w = -(x/pi - sin(pi x)/pi^2)
        grid = Grid1D(127)
        w = reconstruct_w(sine_state(grid))
        exact = -(grid.nodes / np.pi - np.sin(np.pi * grid.nodes) / np.pi**2)
        assert np.max(np.abs(w.values - exact)) < 2e-4

    def test_sine_against_nested_quadrature_oracle(self):
        grid = Grid1D(63)
        w = reconstruct_w(sine_state(grid))
        x_probe = grid.nodes[31]
        ys = np.linspace(0.0, x_probe, 2001)
        inner = np.array([fine_running_integral(lambda s: np.sin(np.pi * s), y, 20001) for y in ys])
        oracle = -np.trapezoid(inner, ys)
        assert abs(w.values[31] - oracle) < 2e-4

    def test_constant_state_exact(self):
        # trapezoid is exact through linear integrands: w = -c x^2 / 2; the
        # constant profile carries its end values explicitly
        grid = Grid1D(40)
        c = 0.75
        state = StatePair(
            Field(grid, np.full(40, c), boundary=(c, c)),
            Field.zeros(grid),
        )
        w = reconstruct_w(state)
        np.testing.assert_allclose(w.values, -c * grid.nodes**2 / 2.0, rtol=0, atol=1e-12)

    def test_left_boundary_conditions_exact(self):
        grid = Grid1D(50)
        rng = np.random.default_rng(5)
        for _ in range(25):
            state = StatePair(
                Field(grid, rng.uniform(-1.0, 1.0, 50)), Field(grid, rng.uniform(-1.0, 1.0, 50))
            )
            assert reconstruct_w(state).boundary[0] == 0.0
            assert compute_wx(state).boundary[0] == 0.0

    def test_linearity_in_state(self):
        grid = Grid1D(30)
        rng = np.random.default_rng(6)
        a = StatePair(Field(grid, rng.uniform(-1, 1, 30)), Field(grid, rng.uniform(-1, 1, 30)))
        b = StatePair(Field(grid, rng.uniform(-1, 1, 30)), Field(grid, rng.uniform(-1, 1, 30)))
        combo = reconstruct_w(2.0 * a + (-3.0) * b)
        parts = 2.0 * reconstruct_w(a) + (-3.0) * reconstruct_w(b)
        np.testing.assert_allclose(combo.values, parts.values, rtol=1e-12, atol=1e-15)


class TestConstraintResidual:
    def test_zero_state_zero_report(self):
        grid = Grid1D(8)
        state = StatePair.zeros(grid)
        report = constraint_residual(state, reconstruct_w(state))
        assert report.residual_l2 == 0.0
        assert report.w_at_0 == 0.0 and report.wx_at_0 == 0.0 and report.w_at_1 == 0.0

    def test_second_order_residual(self):
        residuals = []
        for n in (63, 127):  # h halves between these grids
            grid = Grid1D(n)
            state = sine_state(grid)
            report = constraint_residual(state, reconstruct_w(state))
            residuals.append(report.residual_l2)
        assert 3.2 <= residuals[0] / residuals[1] <= 4.8

    def test_right_end_compatibility_diagnostic(self):
        # double integral of sin(pi x) over the unit square wedge: w(1) = -1/pi
        grid = Grid1D(127)
        state = sine_state(grid)
        report = constraint_residual(state, reconstruct_w(state))
        assert abs(report.w_at_1 - (-0.31830988618379067153776752674502872407)) < 1e-3

    def test_left_end_reported_exactly_zero(self):
        grid = Grid1D(64)
        rng = np.random.default_rng(9)
        state = StatePair(
            Field(grid, rng.uniform(-1.0, 1.0, 64)), Field(grid, rng.uniform(-1.0, 1.0, 64))
        )
        report = constraint_residual(state, reconstruct_w(state))
        assert report.w_at_0 == 0.0
        assert report.wx_at_0 == 0.0

    def test_grid_mismatch_rejected(self):
        state = StatePair.zeros(Grid1D(8))
        with pytest.raises(ValueError):
            constraint_residual(state, Field.zeros(Grid1D(9)))
