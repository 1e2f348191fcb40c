import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from pdae1d import (
    CoefficientSet,
    Field,
    Grid1D,
    PicardConvergenceError,
    SolveConfig,
    SourcePair,
    StatePair,
    laplacian_eigenvalues,
    picard_slab,
    sine_mode,
    solve,
    step_exp_euler,
    step_imex,
    zero_sources,
)


def dense_laplacian(n):
    h = 1.0 / (n + 1)
    return (-2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)) / h**2


def mol_rhs_factory(grid, sources=None, coefficients=None):
    # independent method-of-lines right-hand side for oracle integration
    c = coefficients if coefficients is not None else CoefficientSet()
    n = grid.n_interior
    matrix = dense_laplacian(n)

    def rhs(t, y):
        u, v = y[:n], y[n:]
        full = np.concatenate(([0.0], c.p_u * u + c.p_v * v, [0.0]))
        integral = cumulative_trapezoid(full, grid.nodes_full, initial=0.0)[1:-1]
        du = c.d_u * (matrix @ u) - u * integral
        dv = c.d_v * (matrix @ v) + v * integral
        if sources is not None:
            du = du + sources.f(t).values
            dv = dv + sources.g(t).values
        return np.concatenate((du, dv))

    return rhs


def rk4_march(y0, t0, dt, substeps, rhs):
    y, t = y0.copy(), t0
    step = dt / substeps
    for _ in range(substeps):
        k1 = rhs(t, y)
        k2 = rhs(t + step / 2, y + step / 2 * k1)
        k3 = rhs(t + step / 2, y + step / 2 * k2)
        k4 = rhs(t + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += step
    return y


def decay_state(grid, amplitude=0.1):
    x = grid.nodes
    return StatePair(
        Field(grid, amplitude * np.sin(np.pi * x)),
        Field(grid, amplitude * np.sin(2.0 * np.pi * x)),
    )


def pack(state):
    return np.concatenate((state.u.values, state.v.values))


class TestExpEuler:
    def test_zero_is_fixed_point(self):
        grid = Grid1D(10)
        out = step_exp_euler(StatePair.zeros(grid), 0.0, 0.1)
        assert np.all(out.u.values == 0.0) and np.all(out.v.values == 0.0)

    def test_linear_regime_matches_dense_exponential(self):
        # reaction disabled, no sources: ten steps reproduce expm exactly
        grid = Grid1D(12)
        rng = np.random.default_rng(51)
        state = StatePair(
            Field(grid, rng.uniform(-1, 1, 12)), Field(grid, rng.uniform(-1, 1, 12))
        )
        dt = 0.01
        marched = state
        for k in range(10):
            marched = step_exp_euler(marched, k * dt, dt, reaction=False)
        propagator = expm(10 * dt * dense_laplacian(12))
        assert np.max(np.abs(marched.u.values - propagator @ state.u.values)) < 1e-9
        assert np.max(np.abs(marched.v.values - propagator @ state.v.values)) < 1e-9

    def test_one_step_against_rk4_oracle(self):
        grid = Grid1D(16)
        state = decay_state(grid)
        rhs = mol_rhs_factory(grid)
        errors = []
        for dt in (0.02, 0.01, 0.005):
            stepped = step_exp_euler(state, 0.0, dt)
            reference = rk4_march(pack(state), 0.0, dt, 100, rhs)
            errors.append(np.max(np.abs(pack(stepped) - reference)))
        assert errors[0] < 1e-4
        ratios = [errors[i] / errors[i + 1] for i in range(2)]
        assert all(2.7 <= r <= 5.5 for r in ratios)  # local error is O(dt^2)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step_exp_euler(StatePair.zeros(Grid1D(4)), 0.0, 0.0)


class TestImex:
    def test_zero_is_fixed_point(self):
        grid = Grid1D(10)
        out = step_imex(StatePair.zeros(grid), 0.0, 0.1)
        assert np.all(out.u.values == 0.0) and np.all(out.v.values == 0.0)

    def test_single_mode_linear_recurrence(self):
        grid = Grid1D(14)
        lam = laplacian_eigenvalues(grid)
        dt, diffusion = 0.05, 1.5
        coefficients = CoefficientSet(d_u=diffusion, d_v=1.0)
        for k in (1, 4, 14):
            state = StatePair(sine_mode(grid, k), Field.zeros(grid))
            out = step_imex(state, 0.0, dt, coefficients=coefficients, reaction=False)
            expected = state.u.values / (1.0 - dt * diffusion * lam[k - 1])
            np.testing.assert_allclose(out.u.values, expected, rtol=1e-12, atol=1e-15)

    def test_full_step_against_rk4_oracle(self):
        grid = Grid1D(16)
        state = decay_state(grid, amplitude=0.5)
        rhs = mol_rhs_factory(grid)
        errors = []
        for dt in (0.002, 0.001):
            stepped = step_imex(state, 0.0, dt)
            reference = rk4_march(pack(state), 0.0, dt, 100, rhs)
            errors.append(np.max(np.abs(pack(stepped) - reference)))
        assert 3.0 <= errors[0] / errors[1] <= 5.0  # one-step defect is O(dt^2)

    def test_agrees_with_exp_euler_under_refinement(self):
        grid = Grid1D(32)
        state = decay_state(grid)
        distances = []
        for dt in (1e-3, 5e-4):
            cfg_a = SolveConfig(dt=dt, t_end=0.2, method="exp_euler", snapshot_every=10**9)
            cfg_b = SolveConfig(dt=dt, t_end=0.2, method="imex", snapshot_every=10**9)
            a = solve(state, cfg_a).states[-1]
            b = solve(state, cfg_b).states[-1]
            distances.append((a - b).norm())
        assert distances[0] < 1e-3
        assert distances[0] / distances[1] > 1.5


class TestPicard:
    def test_zero_state_converges_immediately(self):
        grid = Grid1D(8)
        cfg = SolveConfig(dt=0.1, t_end=0.1, method="picard")
        result = picard_slab(StatePair.zeros(grid), 0.0, 0.1, cfg)
        assert result.iterations == 1
        assert np.all(result.state.u.values == 0.0)

    def test_contraction_within_budget(self):
        grid = Grid1D(64)
        state = decay_state(grid)
        dt = 0.13
        assert dt * 4.0 * np.sqrt(3.0) * state.norm() <= 0.1
        cfg = SolveConfig(dt=dt, t_end=dt, method="picard")
        result = picard_slab(state, 0.0, dt, cfg)
        assert result.iterations <= 6
        assert result.diff_norms[-1] < 1e-10
        ratios = np.asarray(result.diff_norms[1:]) / np.asarray(result.diff_norms[:-1])
        assert np.max(ratios) <= 0.12

    def test_slab_end_matches_refined_exp_euler(self):
        grid = Grid1D(24)
        state = decay_state(grid, amplitude=0.4)
        errors = []
        for dt in (0.08, 0.04):
            cfg = SolveConfig(dt=dt, t_end=dt, method="picard", picard_tol=1e-13)
            slab_end = picard_slab(state, 0.0, dt, cfg).state
            refined = state
            fine = dt / 64
            for k in range(64):
                refined = step_exp_euler(refined, k * fine, fine)
            errors.append((slab_end - refined).norm())
        assert errors[0] < 1e-4
        assert 3.0 <= errors[0] / errors[1] <= 6.0  # both converge at O(dt^2) or better

    def test_nonconvergence_raises_with_estimate(self):
        grid = Grid1D(16)
        state = 50.0 * decay_state(grid, amplitude=1.0)
        cfg = SolveConfig(dt=0.5, t_end=0.5, method="picard", picard_max_iter=8)
        with pytest.raises(PicardConvergenceError) as excinfo:
            picard_slab(state, 0.0, 0.5, cfg)
        assert excinfo.value.iterations == 8
        assert np.isfinite(excinfo.value.contraction_estimate)

    def test_solve_reports_step_failure_with_partial_trajectory(self):
        grid = Grid1D(16)
        state = 50.0 * decay_state(grid, amplitude=1.0)
        cfg = SolveConfig(dt=0.5, t_end=1.0, method="picard", picard_max_iter=5, blowup_threshold=1e9)
        traj = solve(state, cfg)
        assert traj.status.kind == "step_failure"
        assert traj.status.t == 0.0
        assert "no convergence" in traj.status.reason
        assert traj.times == [0.0]


class TestSolve:
    def test_zero_initial_data_stays_zero(self):
        grid = Grid1D(12)
        cfg = SolveConfig(dt=0.05, t_end=0.5)
        traj = solve(StatePair.zeros(grid), cfg)
        assert traj.status.kind == "completed"
        assert all(s.norm() == 0.0 for s in traj.states)
        assert traj.times[0] == 0.0
        assert np.all(np.diff(traj.times) > 0.0)

    def test_snapshot_cadence(self):
        grid = Grid1D(8)
        cfg = SolveConfig(dt=0.01, t_end=0.2, snapshot_every=5)
        traj = solve(decay_state(grid), cfg)
        np.testing.assert_allclose(traj.times, [0.0, 0.05, 0.1, 0.15, 0.2], rtol=1e-12)
        assert len(traj.states) == len(traj.w_fields) == len(traj.reports) == 5

    def test_blowup_detection(self):
        grid = Grid1D(32)
        state = StatePair(Field.zeros(grid), sine_mode(grid, 1, 50.0))
        cfg = SolveConfig(dt=5e-4, t_end=1.0, blowup_threshold=1e3, snapshot_every=100)
        traj = solve(state, cfg)
        assert traj.status.kind == "blowup_detected"
        assert traj.status.t == traj.times[-1]
        assert traj.states[-1].norm() >= 1e3
        assert np.all(np.diff(traj.times) > 0.0)

    def test_blowup_threshold_hit_at_start(self):
        grid = Grid1D(8)
        state = StatePair(sine_mode(grid, 1, 10.0), Field.zeros(grid))
        cfg = SolveConfig(dt=0.01, t_end=0.1, blowup_threshold=1.0)
        traj = solve(state, cfg)
        assert traj.status.kind == "blowup_detected"
        assert traj.status.t == 0.0

    def test_norm_continuity_along_decay(self):
        grid = Grid1D(48)
        cfg = SolveConfig(dt=1e-3, t_end=0.3)
        traj = solve(decay_state(grid), cfg)
        norms = np.array([s.norm() for s in traj.states])
        jumps = np.abs(np.diff(norms))
        rate_limit = np.max(jumps[:30]) / cfg.dt  # steepest early decay bounds the rest
        assert np.all(jumps <= 1.05 * rate_limit * cfg.dt + 1e-14)

    def test_constraint_reports_present_and_second_order(self):
        residual_maxima = []
        for n in (63, 127):
            grid = Grid1D(n)
            cfg = SolveConfig(dt=1e-3, t_end=0.05, snapshot_every=10)
            traj = solve(decay_state(grid), cfg)
            assert traj.status.kind == "completed"
            assert all(r.w_at_0 == 0.0 and r.wx_at_0 == 0.0 for r in traj.reports)
            residual_maxima.append(max(r.residual_l2 for r in traj.reports))
        assert 3.2 <= residual_maxima[0] / residual_maxima[1] <= 4.8

    def test_picard_solve_counts_iterations(self):
        grid = Grid1D(16)
        cfg = SolveConfig(dt=0.02, t_end=0.1, method="picard")
        traj = solve(decay_state(grid), cfg)
        assert traj.status.kind == "completed"
        assert traj.picard_iterations_total >= traj.steps_taken


class TestSolveConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0, "t_end": 1.0},
            {"dt": 0.1, "t_end": -1.0},
            {"dt": 2.0, "t_end": 1.0},
            {"dt": 0.1, "t_end": 1.0, "method": "rk4"},
            {"dt": 0.1, "t_end": 1.0, "picard_substeps": 1},
            {"dt": 0.1, "t_end": 1.0, "picard_max_iter": 0},
            {"dt": 0.1, "t_end": 1.0, "picard_tol": 0.0},
            {"dt": 0.1, "t_end": 1.0, "blowup_threshold": 0.0},
            {"dt": 0.1, "t_end": 1.0, "snapshot_every": 0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SolveConfig(**kwargs)

    def test_defaults(self):
        cfg = SolveConfig(dt=0.1, t_end=1.0)
        assert cfg.picard_max_iter == 25
        assert cfg.picard_tol == 1e-10
        assert cfg.picard_substeps == 4
        assert cfg.blowup_threshold == 1e6
        assert cfg.snapshot_every == 1
