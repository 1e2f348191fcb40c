"""Time marching for the constrained reaction-diffusion pair.

Three one-step methods share the split "stiff diffusion + mild reaction":

* exponential Euler, exact on the diffusion part,
  U_{n+1} = S(dt) U_n + dt * phi1(dt * A) R(U_n, t_n);
* a Picard fixed-point solve of the variation-of-constants integral on
  each slab, with trapezoid quadrature over a few substep samples;
* IMEX Euler, implicit in the diffusion and explicit in the reaction,
  (I - dt * A) U_{n+1} = U_n + dt * R(U_n, t_n).

``solve`` marches any of them at fixed step size, reconstructs the
constrained profile at snapshot stamps, and stops early when the state
norm crosses the blow-up threshold (a detection heuristic: the reported
time is a candidate, not a proven maximal existence time).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constraint import ConstraintReport, constraint_residual, reconstruct_w
from .fields import Field, StatePair
from .nonlinearity import CoefficientSet, SourcePair, eval_reaction, zero_sources
from .spectral import (
    _to_coeffs,
    _to_values,
    laplacian_eigenvalues,
    phi1_apply,
    semigroup_apply,
    solve_shifted,
)

__all__ = [
    "SolveConfig",
    "RunStatus",
    "Trajectory",
    "PicardResult",
    "PicardConvergenceError",
    "step_exp_euler",
    "step_imex",
    "picard_slab",
    "solve",
]

METHODS = ("exp_euler", "picard", "imex")


@dataclass(frozen=True)
class SolveConfig:
    """Fixed-step marching parameters; no adaptivity by design."""

    dt: float
    t_end: float
    method: str = "exp_euler"
    picard_max_iter: int = 25
    picard_tol: float = 1e-10
    picard_substeps: int = 4
    blowup_threshold: float = 1e6
    snapshot_every: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")
        if self.picard_tol <= 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_substeps < 2:
            raise ValueError("picard_substeps must be >= 2")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


@dataclass(frozen=True)
class RunStatus:
    """Terminal state of a march: completed, blowup_detected, or step_failure."""

    kind: str
    t: float | None = None
    reason: str | None = None

    @classmethod
    def completed(cls) -> "RunStatus":
        return cls("completed")

    @classmethod
    def blowup_detected(cls, t: float) -> "RunStatus":
        return cls("blowup_detected", t=t)

    @classmethod
    def step_failure(cls, t: float, reason: str) -> "RunStatus":
        return cls("step_failure", t=t, reason=reason)


@dataclass
class Trajectory:
    """Snapshots of a single march plus its termination status."""

    times: list[float]
    states: list[StatePair]
    w_fields: list[Field]
    reports: list[ConstraintReport]
    status: RunStatus
    steps_taken: int = 0
    picard_iterations_total: int = 0


class PicardResult(NamedTuple):
    state: StatePair
    iterations: int
    diff_norms: tuple[float, ...]


class PicardConvergenceError(RuntimeError):
    """Raised when the slab fixed point fails to contract within the budget."""

    def __init__(self, t: float, iterations: int, diff_norms: tuple[float, ...]):
        self.t = t
        self.iterations = iterations
        self.diff_norms = diff_norms
        self.contraction_estimate = (
            diff_norms[-1] / diff_norms[-2]
            if len(diff_norms) >= 2 and diff_norms[-2] > 0
            else float("nan")
        )
        super().__init__(
            f"no convergence after {iterations} sweeps at t={t}; "
            f"last contraction estimate {self.contraction_estimate:.3g}"
        )


def _rhs(state, t, sources, coefficients, reaction):
    if reaction:
        return eval_reaction(state, t, sources, coefficients)
    grid = state.grid
    if sources is None:
        return StatePair.zeros(grid)
    return StatePair(Field(grid, sources.f(t).values), Field(grid, sources.g(t).values))


def step_exp_euler(
    state: StatePair,
    t: float,
    dt: float,
    sources: SourcePair | None = None,
    coefficients: CoefficientSet | None = None,
    reaction: bool = True,
) -> StatePair:
    """One exponential-Euler step from time t.

    Exact on the diffusion part; the reaction is frozen at the left
    endpoint and weighted by phi1.  ``reaction=False`` drops the quadratic
    coupling but keeps the sources (linear-regime test hook).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = coefficients if coefficients is not None else CoefficientSet()
    rhs = _rhs(state, t, sources, c, reaction)
    return semigroup_apply(state, dt, c.d_u, c.d_v) + dt * phi1_apply(rhs, dt, c.d_u, c.d_v)


def step_imex(
    state: StatePair,
    t: float,
    dt: float,
    sources: SourcePair | None = None,
    coefficients: CoefficientSet | None = None,
    reaction: bool = True,
) -> StatePair:
    """One IMEX Euler step: implicit diffusion, explicit reaction.

    Componentwise (I - dt*d*Laplacian) u_next = u + dt*rhs_u, solved through
    the shifted resolvent with shift 1/(dt*d); unconditionally stable in the
    diffusion part.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = coefficients if coefficients is not None else CoefficientSet()
    rhs = _rhs(state, t, sources, c, reaction)
    grid = state.grid
    out = []
    for comp, r, d in ((state.u, rhs.u, c.d_u), (state.v, rhs.v, c.d_v)):
        shift = 1.0 / (dt * d)
        target = Field(grid, shift * (comp.values + dt * r.values))
        out.append(solve_shifted(target, shift))
    return StatePair(out[0], out[1])


def _running_integral(weighted: np.ndarray, h: float) -> np.ndarray:
    # trapezoid from the zero left end: I(x_1) = h/2 * w_1, then cell sums
    inner = np.cumsum(0.5 * h * (weighted[:-1] + weighted[1:]))
    return 0.5 * h * weighted[0] + np.concatenate(([0.0], inner))


def picard_slab(
    state: StatePair,
    t: float,
    dt: float,
    config: SolveConfig,
    sources: SourcePair | None = None,
    coefficients: CoefficientSet | None = None,
    reaction: bool = True,
) -> PicardResult:
    """Fixed-point solve of the variation-of-constants integral on [t, t+dt].

    The iterate is held at ``picard_substeps`` uniformly spaced samples of
    the slab; each sweep replaces it by the semigroup drift plus the
    trapezoid quadrature of the propagated reaction history.  Sweeping
    stops when the max-over-samples product-norm change drops below
    ``picard_tol``; exhausting ``picard_max_iter`` raises
    :class:`PicardConvergenceError` with a contraction estimate attached.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = coefficients if coefficients is not None else CoefficientSet()
    src = sources if sources is not None else zero_sources(state.grid)
    grid = state.grid
    n = grid.n_interior
    h = grid.h
    m = config.picard_substeps
    delta = dt / (m - 1)
    lam = laplacian_eigenvalues(grid)

    def gap_powers(d):
        # E[q] = exp(d * lam * q * delta), the propagator over q substep gaps
        powers = np.empty((m, n))
        powers[0] = 1.0
        one_gap = np.exp(d * lam * delta)
        for q in range(1, m):
            powers[q] = powers[q - 1] * one_gap
        return powers

    eu, ev = gap_powers(c.d_u), gap_powers(c.d_v)
    cu0 = _to_coeffs(state.u.values, n)
    cv0 = _to_coeffs(state.v.values, n)

    # initial iterate: pure semigroup drift at every sample
    cu = eu * cu0
    cv = ev * cv0
    taus = t + delta * np.arange(m)

    def reaction_coeffs(cu_s, cv_s):
        fu = np.empty((m, n))
        fv = np.empty((m, n))
        for i in range(m):
            uv = _to_values(cu_s[i])
            vv = _to_values(cv_s[i])
            if reaction:
                integral = _running_integral(c.p_u * uv + c.p_v * vv, h)
                ru = -uv * integral
                rv = vv * integral
            else:
                ru = np.zeros(n)
                rv = np.zeros(n)
            fu[i] = _to_coeffs(ru + src.f(taus[i]).values, n)
            fv[i] = _to_coeffs(rv + src.g(taus[i]).values, n)
        return fu, fv

    diff_norms: list[float] = []
    for sweep in range(1, config.picard_max_iter + 1):
        fu, fv = reaction_coeffs(cu, cv)
        new_cu = np.empty_like(cu)
        new_cv = np.empty_like(cv)
        new_cu[0] = cu0
        new_cv[0] = cv0
        for i in range(1, m):
            acc_u = 0.5 * (eu[i] * fu[0] + fu[i])
            acc_v = 0.5 * (ev[i] * fv[0] + fv[i])
            for q in range(1, i):
                acc_u = acc_u + eu[i - q] * fu[q]
                acc_v = acc_v + ev[i - q] * fv[q]
            new_cu[i] = eu[i] * cu0 + delta * acc_u
            new_cv[i] = ev[i] * cv0 + delta * acc_v
        # Parseval on the unit interval: ||f||_2^2 = (1/2) sum c_k^2
        diffs = 0.5 * (np.sum((new_cu - cu) ** 2, axis=1) + np.sum((new_cv - cv) ** 2, axis=1))
        diff = float(np.sqrt(np.max(diffs)))
        diff_norms.append(diff)
        cu, cv = new_cu, new_cv
        if diff < config.picard_tol:
            end = StatePair(Field(grid, _to_values(cu[-1])), Field(grid, _to_values(cv[-1])))
            return PicardResult(end, sweep, tuple(diff_norms))
    raise PicardConvergenceError(t, config.picard_max_iter, tuple(diff_norms))


def solve(
    state0: StatePair,
    config: SolveConfig,
    sources: SourcePair | None = None,
    coefficients: CoefficientSet | None = None,
) -> Trajectory:
    """March from t = 0 to t_end at fixed dt with the configured method.

    Snapshots (state, reconstructed profile, constraint report) are stored
    every ``snapshot_every`` steps plus always at t = 0 and at the final
    accepted step.  Crossing the blow-up threshold stops the march with a
    candidate detection time; a failed step keeps the partial trajectory.
    """
    c = coefficients if coefficients is not None else CoefficientSet()
    src = sources if sources is not None else zero_sources(state0.grid)
    traj = Trajectory([], [], [], [], RunStatus.completed())

    def snapshot(t_now: float, state: StatePair):
        w = reconstruct_w(state, c.p_u, c.p_v)
        traj.times.append(t_now)
        traj.states.append(state)
        traj.w_fields.append(w)
        traj.reports.append(constraint_residual(state, w, c.p_u, c.p_v))

    snapshot(0.0, state0)
    if state0.norm() >= config.blowup_threshold:
        traj.status = RunStatus.blowup_detected(0.0)
        return traj

    n_steps = max(1, int(round(config.t_end / config.dt)))
    state = state0
    for k in range(1, n_steps + 1):
        t_prev = (k - 1) * config.dt
        try:
            if config.method == "exp_euler":
                state = step_exp_euler(state, t_prev, config.dt, src, c)
            elif config.method == "imex":
                state = step_imex(state, t_prev, config.dt, src, c)
            else:
                result = picard_slab(state, t_prev, config.dt, config, src, c)
                state = result.state
                traj.picard_iterations_total += result.iterations
        except PicardConvergenceError as err:
            traj.status = RunStatus.step_failure(t_prev, str(err))
            return traj
        except ValueError as err:
            traj.status = RunStatus.step_failure(t_prev, f"non-finite state: {err}")
            return traj
        traj.steps_taken = k
        t_now = k * config.dt
        if state.norm() >= config.blowup_threshold:
            snapshot(t_now, state)
            traj.status = RunStatus.blowup_detected(t_now)
            return traj
        if k % config.snapshot_every == 0 or k == n_steps:
            snapshot(t_now, state)
    traj.status = RunStatus.completed()
    return traj
