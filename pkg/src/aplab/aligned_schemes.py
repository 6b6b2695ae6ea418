"""Four time discretizations of the field-aligned transport model.

All schemes share the first-order upwind stencil in x (explicit) and differ
in how they treat the stiff y-transport: implicit upwind solved per column
(imex), exact diagonal update in Fourier space (fourier), mean/fluctuation
splitting (micro-macro), and a multiplier reformulation whose column systems
stay solvable down to eps = 0 (lagrange).
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .aligned import AlignedModel, y_average
from .grid import Field2D, Grid2D, sample
from .linalg import (CyclicTridiag, SolveStats, SparseFactor, assemble_arrays,
                     dft_wavenumbers, solve_cyclic, _dft_matrices)
from .results import RunResult, StepRecord

__all__ = [
    "AlignedScheme", "AlignedSchemeConfig", "MicroMacroState", "LagrangeState",
    "step_imex", "step_fourier", "step_micromacro", "step_lagrange_aligned",
    "run_aligned", "upwind_x", "aligned_lagrange_matrix",
]


class AlignedScheme(Enum):
    IMEX = "imex"
    FOURIER = "fourier"
    MICRO_MACRO = "micro-macro"
    LAGRANGE = "lagrange"


@dataclass(frozen=True)
class AlignedSchemeConfig:
    """Model, grid, time step, and scheme selection.

    The derived ratios alpha = a*dt/dx (explicit part) and beta = b*dt/dy
    (implicit part) must be finite; alpha <= 1 is the stability boundary of
    the explicit part but is deliberately not enforced here, so instability
    experiments can cross it.
    """

    model: AlignedModel
    grid: Grid2D
    dt: float
    scheme: AlignedScheme = AlignedScheme.IMEX
    solver_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not (self.dt > 0.0) or not np.isfinite(self.dt):
            raise ValueError(f"time step must be finite and > 0, got {self.dt}")
        if not np.isfinite(self.alpha) or not np.isfinite(self.beta) or self.beta <= 0.0:
            raise ValueError(f"derived ratios alpha={self.alpha}, beta={self.beta} invalid")
        if not isinstance(self.scheme, AlignedScheme):
            object.__setattr__(self, "scheme", AlignedScheme(self.scheme))

    @property
    def alpha(self) -> float:
        return self.model.a * self.dt / self.grid.dx

    @property
    def beta(self) -> float:
        return self.model.b * self.dt / self.grid.dy


@dataclass(frozen=True)
class MicroMacroState:
    """Mean part over y (macro, one value per x-node) plus fluctuation.

    The fluctuation keeps a zero column mean; construction checks it.
    """

    H: np.ndarray
    h: Field2D

    def __post_init__(self) -> None:
        H = np.asarray(self.H, dtype=float)
        if H.shape != (self.h.grid.nx - 1,):
            raise ValueError(f"macro part has shape {H.shape}, expected ({self.h.grid.nx - 1},)")
        object.__setattr__(self, "H", H)
        drift = np.max(np.abs(self.h.values.mean(axis=1)))
        scale = max(1.0, float(np.max(np.abs(self.h.values), initial=0.0)))
        if drift > 1e-10 * scale:
            raise ValueError(f"fluctuation column means are off zero by {drift:.3e}")

    @classmethod
    def from_field(cls, f: Field2D) -> "MicroMacroState":
        H = y_average(f)
        return cls(H, f.with_values(f.values - H[:, None]))

    def to_field(self) -> Field2D:
        return self.h.with_values(self.H[:, None] + self.h.values)

    @property
    def time(self) -> float:
        return self.h.time


@dataclass(frozen=True)
class LagrangeState:
    """Transported field plus the multiplier field of the reformulation."""

    f: Field2D
    q: Field2D

    def __post_init__(self) -> None:
        if self.f.grid != self.q.grid:
            raise ValueError("field and multiplier live on different grids")

    @classmethod
    def from_field(cls, f: Field2D) -> "LagrangeState":
        return cls(f, f.with_values(np.zeros_like(f.values)))

    @property
    def time(self) -> float:
        return self.f.time


def upwind_x(values: np.ndarray, alpha: float) -> np.ndarray:
    """Explicit first-order upwind step along axis 0 (orientation a >= 0)."""
    if alpha == 0.0:
        return values.copy()
    return values - alpha * (values - np.roll(values, 1, axis=0))


def _l1_mass_scale(values: np.ndarray) -> float:
    return max(1.0, float(np.abs(values).sum()))


# ---------------------------------------------------------------------------
# steppers (one instance per run, factorizations cached)


class ImexStepper:
    def __init__(self, cfg: AlignedSchemeConfig):
        self.cfg = cfg
        eps = cfg.model.eps
        # keep eps + beta unevaluated: rounding it shifts the smallest
        # eigenvalue (exactly eps) by u * beta, which swamps small eps
        self.matrix = CyclicTridiag.from_sum(cfg.grid.ny - 1, eps, cfg.beta,
                                             -cfg.beta)

    def step(self, f: Field2D) -> tuple[Field2D, SolveStats]:
        cfg = self.cfg
        rhs = cfg.model.eps * upwind_x(f.values, cfg.alpha)
        sol = solve_cyclic(self.matrix, rhs.T).T
        resid = float(np.max(np.abs(self.matrix.matvec(sol.T) - rhs.T)))
        scale = max(1.0, float(np.max(np.abs(rhs))))
        return (f.with_values(sol, f.time + cfg.dt),
                SolveStats(resid / scale, 1, "direct"))


class FourierStepper:
    def __init__(self, cfg: AlignedSchemeConfig):
        self.cfg = cfg
        m = cfg.grid.ny - 1
        if m > 1024:
            raise ValueError(f"direct transform stepper limited to 1024 y-modes, got {m}")
        fwd, inv = _dft_matrices(m)
        self.fwd_t = fwd.T.copy()
        self.inv_t = inv.T.copy()
        ks = dft_wavenumbers(m)
        omega_y = 2.0 * np.pi / cfg.grid.ly
        eps = cfg.model.eps
        if eps > 0.0:
            self.factor = 1.0 / (1.0 + 1j * omega_y * ks * cfg.model.b * cfg.dt / eps)
        else:
            self.factor = np.where(ks == 0, 1.0 + 0.0j, 0.0j)

    def step(self, f: Field2D) -> tuple[Field2D, SolveStats]:
        cfg = self.cfg
        coeffs = f.values @ self.fwd_t
        coeffs = upwind_x(coeffs, cfg.alpha)
        coeffs = coeffs * self.factor[None, :]
        vals = (coeffs @ self.inv_t).real
        return f.with_values(vals, f.time + cfg.dt), SolveStats(0.0, 0, "direct")


class MicroMacroStepper:
    def __init__(self, cfg: AlignedSchemeConfig):
        self.cfg = cfg
        self.inner = ImexStepper(cfg) if cfg.model.eps > 0.0 else None

    def step(self, s: MicroMacroState) -> tuple[MicroMacroState, SolveStats]:
        cfg = self.cfg
        H_new = upwind_x(s.H, cfg.alpha)
        if self.inner is None:
            h_vals = np.zeros_like(s.h.values)
            stats = SolveStats(0.0, 0, "direct")
        else:
            h_new, stats = self.inner.step(s.h)
            # re-projection removes roundoff drift; exact step keeps mean zero
            h_vals = h_new.values - h_new.values.mean(axis=1)[:, None]
        return (MicroMacroState(H_new, s.h.with_values(h_vals, s.h.time + cfg.dt)), stats)


def aligned_lagrange_matrix(m: int, beta: float, eps: float):
    """Per-column system for (field, multiplier) unknowns, size 2m.

    Rows 0..m-1: evolution with the implicit multiplier difference.
    Rows m..2m-2: the constraint rows for j = 2..m (the cyclic set is
    rank-deficient by one, so the j = 1 row is dropped).
    Row 2m-1: pins the multiplier at the first y-node to zero.
    """
    jj = np.arange(m)
    rows = [jj, jj, jj]
    cols = [jj, m + jj, m + (jj - 1) % m]
    vals = [np.ones(m), np.full(m, beta), np.full(m, -beta)]
    r2 = m - 1 + np.arange(1, m)
    j2 = np.arange(1, m)
    rows += [r2, r2, r2, r2]
    cols += [j2, j2 - 1, m + j2, m + j2 - 1]
    vals += [np.ones(m - 1), -np.ones(m - 1), np.full(m - 1, -eps), np.full(m - 1, eps)]
    rows.append(np.array([2 * m - 1]))
    cols.append(np.array([m]))
    vals.append(np.array([1.0]))
    return assemble_arrays(2 * m, 2 * m,
                           np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


class LagrangeAlignedStepper:
    def __init__(self, cfg: AlignedSchemeConfig):
        self.cfg = cfg
        m = cfg.grid.ny - 1
        self.m = m
        self.factor = SparseFactor(aligned_lagrange_matrix(m, cfg.beta, cfg.model.eps))

    def step(self, s: LagrangeState) -> tuple[LagrangeState, SolveStats]:
        cfg = self.cfg
        m = self.m
        ncols = cfg.grid.nx - 1
        rhs = np.zeros((2 * m, ncols))
        rhs[:m] = upwind_x(s.f.values, cfg.alpha).T
        sol, stats = self.factor.solve(rhs, tol=cfg.solver_tol)
        f_vals = sol[:m].T
        q_vals = sol[m:].T.copy()
        q_vals[:, 0] = 0.0
        t_new = s.f.time + cfg.dt
        return (LagrangeState(s.f.with_values(f_vals, t_new),
                              s.q.with_values(q_vals, t_new)), stats)


_STEPPERS = {
    AlignedScheme.IMEX: ImexStepper,
    AlignedScheme.FOURIER: FourierStepper,
    AlignedScheme.MICRO_MACRO: MicroMacroStepper,
    AlignedScheme.LAGRANGE: LagrangeAlignedStepper,
}


def make_aligned_stepper(cfg: AlignedSchemeConfig):
    return _STEPPERS[cfg.scheme](cfg)


def initial_state(cfg: AlignedSchemeConfig, f0: Field2D):
    if cfg.scheme is AlignedScheme.MICRO_MACRO:
        return MicroMacroState.from_field(f0)
    if cfg.scheme is AlignedScheme.LAGRANGE:
        return LagrangeState.from_field(f0)
    return f0


def state_field(state) -> Field2D:
    """The transported field carried by any scheme state."""
    if isinstance(state, MicroMacroState):
        return state.to_field()
    if isinstance(state, LagrangeState):
        return state.f
    return state


def state_mass(state) -> float:
    if isinstance(state, MicroMacroState):
        ny1 = state.h.grid.ny - 1
        return float(ny1 * state.H.sum() + state.h.values.sum())
    if isinstance(state, LagrangeState):
        return float(state.f.values.sum())
    return float(state.values.sum())


# ---------------------------------------------------------------------------
# public one-step entry points


def step_imex(f: Field2D, cfg: AlignedSchemeConfig) -> Field2D:
    """One implicit-explicit step; raises SingularMatrixError at eps = 0."""
    return ImexStepper(cfg).step(f)[0]


def step_fourier(f: Field2D, cfg: AlignedSchemeConfig) -> Field2D:
    """One step in partial Fourier space; well defined for every eps >= 0."""
    return FourierStepper(cfg).step(f)[0]


def step_micromacro(s: MicroMacroState, cfg: AlignedSchemeConfig) -> MicroMacroState:
    """Advance mean and fluctuation; at eps = 0 the fluctuation is dropped."""
    return MicroMacroStepper(cfg).step(s)[0]


def step_lagrange_aligned(s: LagrangeState, cfg: AlignedSchemeConfig) -> LagrangeState:
    """Advance the multiplier form by one step; solvable for every eps >= 0."""
    return LagrangeAlignedStepper(cfg).step(s)[0]


# ---------------------------------------------------------------------------
# driver


def run_aligned(cfg: AlignedSchemeConfig, n_steps: int,
                snapshot_times=None) -> RunResult:
    """Iterate the selected scheme from the sampled initial condition.

    Snapshot times must sit on the time grid (multiples of dt, within the
    run); misaligned requests are rejected rather than interpolated. Mass
    and solver residuals are recorded every step.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    t_end = n_steps * cfg.dt
    if snapshot_times is None:
        snapshot_times = [0.0, t_end] if n_steps > 0 else [0.0]
    snap_steps = _snapshot_steps(snapshot_times, cfg.dt, n_steps)

    t0 = _time.perf_counter()
    f0 = sample(cfg.grid, cfg.model.f_in, 0.0)
    state = initial_state(cfg, f0)
    stepper = make_aligned_stepper(cfg)

    result = RunResult()
    result.diagnostics.append(StepRecord(0, 0.0, state_mass(state)))
    if 0 in snap_steps:
        result.snapshots.append((0.0, state_field(state)))
    for n in range(1, n_steps + 1):
        try:
            state, stats = stepper.step(state)
        except Exception as exc:
            exc.args = (f"step {n}: {exc}",) + exc.args[1:]
            raise
        t = n * cfg.dt
        result.diagnostics.append(
            StepRecord(n, t, state_mass(state), stats.residual_norm, stats.iterations))
        if n in snap_steps:
            result.snapshots.append((t, state_field(state)))
    result.manifest = {
        "scheme": cfg.scheme.value,
        "eps": cfg.model.eps,
        "a": cfg.model.a,
        "b": cfg.model.b,
        "dt": cfg.dt,
        "n_steps": n_steps,
        "grid": [cfg.grid.x_min, cfg.grid.x_max, cfg.grid.y_min, cfg.grid.y_max,
                 cfg.grid.nx, cfg.grid.ny],
        "wall_time_s": _time.perf_counter() - t0,
    }
    return result


def _snapshot_steps(snapshot_times, dt: float, n_steps: int) -> set:
    steps = set()
    for t in snapshot_times:
        n = round(t / dt)
        if abs(t - n * dt) > 1e-9 * max(dt, abs(t)) or n < 0 or n > n_steps:
            raise ValueError(f"snapshot time {t} is not a step multiple within the run")
        steps.add(int(n))
    return steps
