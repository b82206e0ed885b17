"""Method-of-lines finite-difference integrator on Neumann grids.

Space is discretized in conservative flux form (finite volumes): diffusion
and the cross-diffusion term are face-flux differences, so their sums over
the grid telescope to the boundary fluxes, which vanish under homogeneous
Neumann conditions.  Cell-centered grids with ghost reflection make those
boundary fluxes exactly zero.  Radial balls use the spherically symmetric
operator (1/r^(m-1)) d/dr (r^(m-1) d/dr) with face areas r^(m-1); the cell
centered layout never evaluates 1/r at the origin and the r = 0 face has
zero area, which encodes the symmetry condition u_r(0) = 0.

Time stepping is SSP-RK3 under a diffusive/advective CFL cap.  Stages that
dip below the positivity tolerance trigger a halve-and-retry on dt; values
are never clipped, since clipping would silently corrupt the mass monitor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .model import (
    POSITIVITY_EPS,
    DomainKind,
    DomainSpec,
    FieldState,
    Grid,
    ModelParams,
)

try:
    from . import _kernels

    _HAVE_KERNELS = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_KERNELS = False


class AdvectionScheme(str, Enum):
    UPWIND = "upwind"
    CENTRAL = "central"


class StepStatus(str, Enum):
    OK = "Ok"
    DT_FLOOR_HIT = "DtFloorHit"
    BLOWUP_DETECTED = "BlowupDetected"
    NEGATIVITY_FAULT = "NegativityFault"


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    dt_init: float = 1e-2
    cfl_safety: float = 0.4
    dt_min: float = 1e-10
    blowup_threshold: float = 1e6
    advection_scheme: AdvectionScheme = AdvectionScheme.UPWIND
    record_every: float = 0.1

    def __post_init__(self) -> None:
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.dt_init <= 0 or self.dt_min <= 0:
            raise ValueError("dt_init and dt_min must be positive")
        if self.dt_min >= self.dt_init:
            raise ValueError("dt_min must be smaller than dt_init")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.record_every <= 0:
            raise ValueError("record_every must be positive")


@dataclass(frozen=True)
class StepOutcome:
    state: FieldState
    dt_used: float
    status: StepStatus


def face_weight_arrays(
    grid: Grid, domain: DomainSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Face factors and inverse cell weights for 1-D grids.

    Radial balls: faces weigh r^(m-1) and cells 1/(r_j^(m-1) h); intervals:
    unit faces and cells 1/h.  Boundary faces carry zero weight, which is the
    ghost-reflected Neumann condition in conservative form.
    """
    n = grid.shape[0]
    h = grid.spacing[0]
    if domain.kind is DomainKind.RADIAL_BALL:
        m = domain.radial_n
        af = (np.arange(n + 1) * h) ** (m - 1)
        r = grid.axis_centers(0)
        iw = 1.0 / (r ** (m - 1) * h)
    else:
        af = np.ones(n + 1)
        iw = np.full(n, 1.0 / h)
    af[0] = 0.0
    af[n] = 0.0
    return af, iw


def laplacian(field: np.ndarray, grid: Grid, domain: DomainSpec) -> np.ndarray:
    """Second-order conservative Laplacian with ghost-cell Neumann reflection."""
    if field.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    if len(grid.shape) == 1:
        inv_h = 1.0 / grid.spacing[0]
        af, iw = face_weight_arrays(grid, domain)
        flux = np.zeros(grid.shape[0] + 1)
        flux[1:-1] = af[1:-1] * np.diff(field) * inv_h
        return np.diff(flux) * iw
    out = np.zeros_like(field)
    for ax, h in enumerate(grid.spacing):
        inv_h = 1.0 / h
        flux = np.zeros(_face_shape(grid.shape, ax))
        inner = _axis_slice(field.ndim, ax)
        flux[inner] = np.diff(field, axis=ax) * inv_h
        out += np.diff(flux, axis=ax) * inv_h
    return out


def _face_shape(shape: tuple[int, ...], axis: int) -> tuple[int, ...]:
    return tuple(s + 1 if a == axis else s for a, s in enumerate(shape))


def _axis_slice(ndim: int, axis: int) -> tuple[slice, ...]:
    return tuple(slice(1, -1) if a == axis else slice(None) for a in range(ndim))


def chemotaxis_divergence(
    u: np.ndarray,
    v: np.ndarray,
    grid: Grid,
    domain: DomainSpec,
    scheme: AdvectionScheme = AdvectionScheme.UPWIND,
) -> np.ndarray:
    """Conservative divergence of the cross-diffusion flux u * grad(v).

    Face flux is u_face * (grad v)_face with a central face gradient; u_face
    is taken upwind on the sign of the face gradient (positivity-favoring
    default) or as the arithmetic mean.  Boundary faces carry zero flux, so
    the discrete sum over all cells telescopes to zero.
    """
    if u.shape != grid.shape or v.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    upwind = scheme is AdvectionScheme.UPWIND

    if len(grid.shape) == 1:
        inv_h = 1.0 / grid.spacing[0]
        af, iw = face_weight_arrays(grid, domain)
        gv = np.diff(v) * inv_h
        if upwind:
            uf = np.where(gv > 0.0, u[:-1], u[1:])
        else:
            uf = 0.5 * (u[:-1] + u[1:])
        flux = np.zeros(grid.shape[0] + 1)
        flux[1:-1] = af[1:-1] * uf * gv
        return np.diff(flux) * iw

    out = np.zeros_like(u)
    for ax, h in enumerate(grid.spacing):
        inv_h = 1.0 / h
        gv = np.diff(v, axis=ax) * inv_h
        lo = _shift_slice(u.ndim, ax, 0)
        hi = _shift_slice(u.ndim, ax, 1)
        if upwind:
            uf = np.where(gv > 0.0, u[lo], u[hi])
        else:
            uf = 0.5 * (u[lo] + u[hi])
        flux = np.zeros(_face_shape(grid.shape, ax))
        flux[_axis_slice(u.ndim, ax)] = uf * gv
        out += np.diff(flux, axis=ax) * inv_h
    return out


def _shift_slice(ndim: int, axis: int, side: int) -> tuple[slice, ...]:
    s = slice(None, -1) if side == 0 else slice(1, None)
    return tuple(s if a == axis else slice(None) for a in range(ndim))


def _central_gradients(field: np.ndarray, grid: Grid) -> list[np.ndarray]:
    """Ghost-reflected central difference along each axis."""
    grads = []
    for ax, h in enumerate(grid.spacing):
        inv_2h = 1.0 / (2.0 * h)
        padded = np.pad(field, _pad_width(field.ndim, ax), mode="edge")
        hi = _shift_pad_slice(field.ndim, ax, 2)
        lo = _shift_pad_slice(field.ndim, ax, 0)
        grads.append((padded[hi] - padded[lo]) * inv_2h)
    return grads


def _pad_width(ndim: int, axis: int) -> list[tuple[int, int]]:
    return [(1, 1) if a == axis else (0, 0) for a in range(ndim)]


def _shift_pad_slice(ndim: int, axis: int, offset: int) -> tuple[slice, ...]:
    s = slice(offset, None) if offset == 2 else slice(0, -2)
    return tuple(s if a == axis else slice(None) for a in range(ndim))


def gradient_magnitude(field: np.ndarray, grid: Grid) -> np.ndarray:
    """|grad field| from ghost-reflected central differences."""
    sq = np.zeros_like(field)
    for g in _central_gradients(field, grid):
        sq += g * g
    return np.sqrt(sq)


def gradient_magnitude_term(
    u: np.ndarray, grid: Grid, domain: DomainSpec, gamma: float
) -> np.ndarray:
    """Per-cell |grad u|^gamma (radial grids use |u_r|)."""
    if not 1.0 <= gamma <= 2.0:
        raise ValueError(f"gamma must lie in [1, 2], got {gamma}")
    if u.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    mag = gradient_magnitude(u, grid)
    if gamma == 2.0:
        return mag * mag
    if gamma == 1.0:
        return mag
    return mag**gamma


def rhs(
    state: FieldState,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    scheme: AdvectionScheme = AdvectionScheme.UPWIND,
) -> tuple[np.ndarray, np.ndarray]:
    """Semi-discrete right-hand side of the coupled system.

    du/dt = lap(u) - chi div(u grad v) + lam u - mu u^2 - c |grad u|^gamma
    dv/dt = lap(v) - u v
    """
    u, v = state.u, state.v
    du = laplacian(u, grid, domain)
    if params.chi != 0.0:
        du = du - params.chi * chemotaxis_divergence(u, v, grid, domain, scheme)
    du = du + (params.lam - params.mu * u) * u
    if params.c != 0.0:
        du = du - params.c * gradient_magnitude_term(u, grid, domain, params.gamma)
    dv = laplacian(v, grid, domain) - u * v
    return du, dv


def max_face_gradient(v: np.ndarray, grid: Grid) -> float:
    """Largest |grad v| over interior faces: the advective CFL speed scale."""
    gmax = 0.0
    for ax, h in enumerate(grid.spacing):
        g = np.abs(np.diff(v, axis=ax)) * (1.0 / h)
        if g.size:
            gmax = max(gmax, float(g.max()))
    return gmax


def cfl_dt(
    state: FieldState, params: ModelParams, grid: Grid, config: SolverConfig
) -> float:
    """CFL-limited step: min of the requested dt, the diffusive cap
    cfl * h^2 / (2 d), and the advective cap cfl * h / (chi max|grad v|)."""
    h = min(grid.spacing)
    d_eff = len(grid.shape)
    dt = min(config.dt_init, config.cfl_safety * h * h / (2.0 * d_eff))
    speed = params.chi * max_face_gradient(state.v, grid)
    if speed > 0.0:
        dt = min(dt, config.cfl_safety * h / speed)
    return dt


def _min_value(*arrays: np.ndarray) -> float:
    return min(float(a.min()) for a in arrays)


def step(
    state: FieldState,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    config: SolverConfig,
    dt_limit: float | None = None,
) -> StepOutcome:
    """One SSP-RK3 step with CFL-limited dt and positivity retry.

    Negativity beyond the tolerance in any stage halves dt and retries down
    to dt_min; a CFL dt below dt_min reports DtFloorHit; a final max(u) above
    the blow-up threshold (or any non-finite value) reports BlowupDetected.
    """
    dt = cfl_dt(state, params, grid, config)
    if dt < config.dt_min:
        return StepOutcome(state=state, dt_used=0.0, status=StepStatus.DT_FLOOR_HIT)
    if dt_limit is not None:
        dt = min(dt, dt_limit)
    u, v = state.u, state.v
    scheme = config.advection_scheme
    while True:
        d1u, d1v = rhs(state, params, grid, domain, scheme)
        s1u = u + dt * d1u
        s1v = v + dt * d1v
        if _min_value(s1u, s1v) >= -POSITIVITY_EPS:
            s1 = FieldState(u=s1u, v=s1v, t=state.t)
            d2u, d2v = rhs(s1, params, grid, domain, scheme)
            s2u = 0.75 * u + 0.25 * (s1u + dt * d2u)
            s2v = 0.75 * v + 0.25 * (s1v + dt * d2v)
            if _min_value(s2u, s2v) >= -POSITIVITY_EPS:
                s2 = FieldState(u=s2u, v=s2v, t=state.t)
                d3u, d3v = rhs(s2, params, grid, domain, scheme)
                third = 1.0 / 3.0
                nu = third * u + 2.0 * third * (s2u + dt * d3u)
                nv = third * v + 2.0 * third * (s2v + dt * d3v)
                if _min_value(nu, nv) >= -POSITIVITY_EPS:
                    break
        dt *= 0.5
        if dt < config.dt_min:
            return StepOutcome(
                state=state, dt_used=0.0, status=StepStatus.NEGATIVITY_FAULT
            )
    new_state = FieldState(u=nu, v=nv, t=state.t + dt)
    if not (np.isfinite(nu).all() and np.isfinite(nv).all()):
        return StepOutcome(
            state=new_state, dt_used=dt, status=StepStatus.BLOWUP_DETECTED
        )
    if float(nu.max()) > config.blowup_threshold:
        return StepOutcome(
            state=new_state, dt_used=dt, status=StepStatus.BLOWUP_DETECTED
        )
    return StepOutcome(state=new_state, dt_used=dt, status=StepStatus.OK)


def _advance_numpy(
    state: FieldState,
    t_target: float,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    config: SolverConfig,
) -> StepOutcome:
    """Step repeatedly until t_target (exact landing) or a non-Ok status."""
    outcome = StepOutcome(state=state, dt_used=0.0, status=StepStatus.OK)
    rel = 1e-14 * max(1.0, abs(t_target))
    while outcome.state.t < t_target:
        outcome = step(
            outcome.state, params, grid, domain, config,
            dt_limit=t_target - outcome.state.t,
        )
        if outcome.status is not StepStatus.OK:
            return outcome
        if t_target - outcome.state.t <= rel:
            outcome = replace(
                outcome, state=replace(outcome.state, t=t_target)
            )
    return outcome


def _advance_fast(
    state: FieldState,
    t_target: float,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    config: SolverConfig,
) -> StepOutcome:
    """Fused compiled advance for 1-D grids (interval and radial)."""
    h = grid.spacing[0]
    af, iw = face_weight_arrays(grid, domain)
    u = state.u.copy()
    v = state.v.copy()
    t, status_code, dt_used = _kernels.advance_1d(
        u, v, state.t, t_target, af, iw, h,
        params.chi, params.lam, params.mu, params.c, params.gamma,
        config.dt_init, config.cfl_safety, config.dt_min,
        config.blowup_threshold,
        config.advection_scheme is AdvectionScheme.UPWIND,
    )
    status = (
        StepStatus.OK,
        StepStatus.DT_FLOOR_HIT,
        StepStatus.BLOWUP_DETECTED,
        StepStatus.NEGATIVITY_FAULT,
    )[status_code]
    return StepOutcome(state=FieldState(u=u, v=v, t=t), dt_used=dt_used,
                       status=status)


def advance_to(
    state: FieldState,
    t_target: float,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    config: SolverConfig,
    use_fast_path: bool = True,
) -> StepOutcome:
    """Advance to t_target, using the compiled 1-D fast path when possible."""
    if t_target <= state.t:
        return StepOutcome(state=state, dt_used=0.0, status=StepStatus.OK)
    if use_fast_path and _HAVE_KERNELS and len(grid.shape) == 1:
        return _advance_fast(state, t_target, params, grid, domain, config)
    return _advance_numpy(state, t_target, params, grid, domain, config)


def simulate(
    initial: FieldState,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    config: SolverConfig,
    observer=None,
    use_fast_path: bool = True,
) -> tuple[StepOutcome, list]:
    """Advance to t_end, sampling diagnostics every record_every time units.

    `observer(state) -> record` builds a diagnostics record from a snapshot
    (the monitors module provides one); records are collected at t = 0, at
    every multiple of record_every, and at the final time.  Returns the final
    outcome together with the record list.  Single-threaded and deterministic
    for fixed inputs.
    """
    initial.validate(grid)
    diagnostics: list = []
    if config.t_end <= initial.t:
        return (
            StepOutcome(state=initial, dt_used=0.0, status=StepStatus.OK),
            diagnostics,
        )
    if observer is not None:
        diagnostics.append(observer(initial))
    outcome = StepOutcome(state=initial, dt_used=0.0, status=StepStatus.OK)
    k = int(math.floor(initial.t / config.record_every)) + 1
    while outcome.state.t < config.t_end:
        t_next = min(config.t_end, k * config.record_every)
        if t_next <= outcome.state.t:
            k += 1
            continue
        outcome = advance_to(
            outcome.state, t_next, params, grid, domain, config, use_fast_path
        )
        if outcome.status is not StepStatus.OK:
            break
        if observer is not None:
            diagnostics.append(observer(outcome.state))
        k += 1
    return outcome, diagnostics
