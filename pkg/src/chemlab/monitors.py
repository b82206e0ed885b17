"""Diagnostics and a-priori bound checks on discrete trajectories.

The analysis guarantees three running bounds for the continuous system: the
mass stays below M = max{initial mass, (lam/mu)|Omega|}, the sup of v never
exceeds its initial sup, and the Dirichlet energy of v stays bounded.  The
monitors translate these into checkable statements about sampled trajectories:
hard inequalities with small quadrature slack for the first two, and a
non-explosion heuristic (tail max against transient max) for the energy,
since its theoretical ceiling is existential rather than numeric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainKind, DomainSpec, FieldState, Grid, ModelParams, cell_volumes
from .solver import _central_gradients

MASS_SLACK = 1e-6
VMAX_SLACK = 1e-12

CSV_COLUMNS = (
    "t", "mass", "linf_u", "linf_v", "l2_gradv_sq", "lp_u", "l2p_gradv",
    "phi", "mass_bound_ok", "vmax_ok", "interp_ratio",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time sample of all monitored quantities."""

    t: float
    mass: float
    linf_u: float
    linf_v: float
    l2_gradv_sq: float
    lp_u: float
    l2p_gradv: float
    phi: float
    mass_bound_ok: bool
    vmax_ok: bool
    interp_ratio: float | None = None

    def to_csv_row(self) -> str:
        cells = [
            repr(self.t), repr(self.mass), repr(self.linf_u),
            repr(self.linf_v), repr(self.l2_gradv_sq), repr(self.lp_u),
            repr(self.l2p_gradv), repr(self.phi),
            "true" if self.mass_bound_ok else "false",
            "true" if self.vmax_ok else "false",
            "" if self.interp_ratio is None else repr(self.interp_ratio),
        ]
        return ",".join(cells)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def record(
    state: FieldState,
    params: ModelParams,
    grid: Grid,
    domain: DomainSpec,
    p: float,
    M: float,
    v0_sup: float,
    interp_q: float | None = None,
) -> DiagnosticsRecord:
    """Midpoint-quadrature diagnostics of one snapshot.

    p > 1 selects the monitored norm pair (integral of u^p, integral of
    |grad v|^(2p)); their sum is the functional whose boundedness the
    critical-exponent condition guarantees.
    """
    if p <= 1.0:
        raise ValueError(f"monitor exponent p must exceed 1, got {p}")
    w = cell_volumes(grid, domain)
    u, v = state.u, state.v
    mass = float(np.sum(u * w))
    grad_sq = np.zeros_like(v)
    for g in _central_gradients(v, grid):
        grad_sq += g * g
    l2_gradv_sq = float(np.sum(grad_sq * w))
    lp_u = float(np.sum(u**p * w))
    l2p_gradv = float(np.sum(grad_sq**p * w))
    ratio = None
    if interp_q is not None:
        _, _, ratio = check_interpolation_inequality(v, interp_q, grid, domain)
    return DiagnosticsRecord(
        t=state.t,
        mass=mass,
        linf_u=float(u.max()),
        linf_v=float(v.max()),
        l2_gradv_sq=l2_gradv_sq,
        lp_u=lp_u,
        l2p_gradv=l2p_gradv,
        phi=lp_u + l2p_gradv,
        mass_bound_ok=mass <= M * (1.0 + MASS_SLACK),
        vmax_ok=float(v.max()) <= v0_sup * (1.0 + VMAX_SLACK),
        interp_ratio=ratio,
    )


def _hessian_frobenius_sq(w: np.ndarray, grid: Grid, domain: DomainSpec) -> np.ndarray:
    """Squared Frobenius norm of the discrete Hessian, ghost-reflected.

    Radial fields carry the tangential curvature (m-1)(w_r / r)^2 on top of
    the radial second difference.
    """
    ndim = len(grid.shape)
    if domain.kind is DomainKind.RADIAL_BALL:
        h = grid.spacing[0]
        inv_h2 = 1.0 / (h * h)
        padded = np.pad(w, 1, mode="edge")
        w_rr = (padded[2:] - 2.0 * w + padded[:-2]) * inv_h2
        (w_r,) = _central_gradients(w, grid)
        r = grid.axis_centers(0)
        m = domain.radial_n
        return w_rr**2 + (m - 1) * (w_r / r) ** 2
    out = np.zeros_like(w)
    for ax, h in enumerate(grid.spacing):
        inv_h2 = 1.0 / (h * h)
        padded = np.pad(w, _pad(ndim, ax), mode="edge")
        hi = _sl(ndim, ax, 2)
        lo = _sl(ndim, ax, 0)
        mid = _sl(ndim, ax, 1)
        out += ((padded[hi] - 2.0 * padded[mid] + padded[lo]) * inv_h2) ** 2
    grads = _central_gradients(w, grid)
    for a in range(ndim):
        ga = _central_gradients(grads[a], grid)
        for b in range(ndim):
            if a != b:
                out += ga[b] ** 2
    return out


def _pad(ndim: int, axis: int) -> list[tuple[int, int]]:
    return [(1, 1) if a == axis else (0, 0) for a in range(ndim)]


def _sl(ndim: int, axis: int, offset: int) -> tuple[slice, ...]:
    s = {0: slice(0, -2), 1: slice(1, -1), 2: slice(2, None)}[offset]
    return tuple(s if a == axis else slice(None) for a in range(ndim))


def _face_gradient_power_integral(
    w: np.ndarray, q: float, grid: Grid, domain: DomainSpec
) -> float:
    """Trapezoid-style quadrature of |grad w|^(2q+2) located at cell faces.

    Face differences are where the conservative scheme's gradients live, and
    boundary faces carry an exactly zero normal gradient: the discrete form
    of the compatibility condition w dw/dnu = 0.  The integrand vanishes at
    the boundary points, so summing interior faces is a valid second-order
    rule.  Transverse gradient components at a face are averaged from the
    two adjacent cells' central differences; axes are averaged so the total
    is a single estimate of the integral.
    """
    ndim = len(grid.shape)
    grads = _central_gradients(w, grid)
    if domain.kind is DomainKind.RADIAL_BALL:
        h = grid.spacing[0]
        m = domain.radial_n
        gf = np.diff(w) * (1.0 / h)
        r_face = np.arange(1, grid.shape[0]) * h
        omega = m * math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)
        face_w = omega * r_face ** (m - 1) * h
        return float(np.sum((gf * gf) ** (q + 1.0) * face_w))
    face_vol = math.prod(grid.spacing)
    total = 0.0
    for ax, h in enumerate(grid.spacing):
        gsq = (np.diff(w, axis=ax) * (1.0 / h)) ** 2
        for b in range(ndim):
            if b != ax:
                lo = _sl_half(ndim, ax, 0)
                hi = _sl_half(ndim, ax, 1)
                gsq = gsq + (0.5 * (grads[b][lo] + grads[b][hi])) ** 2
        total += float(np.sum(gsq ** (q + 1.0))) * face_vol
    return total / ndim


def _sl_half(ndim: int, axis: int, side: int) -> tuple[slice, ...]:
    s = slice(None, -1) if side == 0 else slice(1, None)
    return tuple(s if a == axis else slice(None) for a in range(ndim))


def check_interpolation_inequality(
    w: np.ndarray, q: float, grid: Grid, domain: DomainSpec
) -> tuple[float, float, float]:
    """Discrete spot-check of the gradient interpolation inequality.

    lhs = integral of |grad w|^(2q+2), quadrature at faces
    rhs = 2 (4q^2 + n) (max|w|)^2 * integral of |grad w|^(2q-2) |D^2 w|^2,
          quadrature at cells with ghost-reflected central differences

    For fields with Neumann-compatible boundary behavior the continuous
    inequality rhs >= lhs holds, and the discrete ratio approaches it from
    below under refinement (ratio >= 1 - delta_h with delta_h -> 0).
    Returns (lhs, rhs, ratio), with an infinite ratio when both sides vanish.
    """
    if q < 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    if w.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    vol = cell_volumes(grid, domain)
    lhs = _face_gradient_power_integral(w, q, grid, domain)
    grad_sq = np.zeros_like(w)
    for g in _central_gradients(w, grid):
        grad_sq += g * g
    hess_sq = _hessian_frobenius_sq(w, grid, domain)
    n_dim = domain.radial_n if domain.kind is DomainKind.RADIAL_BALL else len(grid.shape)
    wmax = float(np.abs(w).max())
    rhs = float(
        2.0 * (4.0 * q * q + n_dim) * wmax**2
        * np.sum(grad_sq ** (q - 1.0) * hess_sq * vol)
    )
    ratio = math.inf if lhs == 0.0 else rhs / lhs
    return lhs, rhs, ratio


@dataclass(frozen=True)
class TrajectoryReport:
    """Outcome of the a-priori bound checks over a sampled trajectory."""

    ok: bool
    failures: tuple[str, ...]
    phi_sup: float
    phi_sup_t: float
    phi_peak_early: bool
    l2_gradv_sup: float


def verify_trajectory_bounds(
    diagnostics: list[DiagnosticsRecord], M: float, v0_sup: float
) -> TrajectoryReport:
    """Check every sampled record against the proven running bounds.

    Failures name the bound, the timestamp, and the offending value.  The
    Dirichlet-energy check is a non-explosion heuristic: for runs reaching
    past t = 1, the max over the last quarter of post-transient samples must
    not exceed ten times the max over the first quarter.
    """
    if not diagnostics:
        raise ValueError("diagnostics list is empty")
    failures: list[str] = []
    prev_v = None
    for rec in diagnostics:
        if not rec.mass <= M * (1.0 + MASS_SLACK):
            failures.append(
                f"mass bound violated at t={rec.t:.6g}: "
                f"mass={rec.mass:.12g} > M={M:.12g}"
            )
        if not rec.linf_v <= v0_sup * (1.0 + VMAX_SLACK):
            failures.append(
                f"v-sup bound violated at t={rec.t:.6g}: "
                f"linf_v={rec.linf_v:.12g} > v0_sup={v0_sup:.12g}"
            )
        if prev_v is not None and rec.linf_v > prev_v * (1.0 + VMAX_SLACK):
            failures.append(
                f"v-sup increased at t={rec.t:.6g}: "
                f"{rec.linf_v:.12g} > {prev_v:.12g}"
            )
        prev_v = rec.linf_v
        if not math.isfinite(rec.l2_gradv_sq):
            failures.append(f"gradient energy non-finite at t={rec.t:.6g}")
    tail = [r for r in diagnostics if r.t > 1.0]
    if len(tail) >= 8:
        quarter = len(tail) // 4
        first = max(r.l2_gradv_sq for r in tail[:quarter])
        last = max(r.l2_gradv_sq for r in tail[-quarter:])
        if last > 10.0 * first + 1e-12:
            failures.append(
                f"gradient energy grew through the tail: "
                f"last-quarter max {last:.6g} > 10x first-quarter max {first:.6g}"
            )
    phis = [r.phi for r in diagnostics]
    idx = int(np.argmax(phis))
    t_end = diagnostics[-1].t
    return TrajectoryReport(
        ok=not failures,
        failures=tuple(failures),
        phi_sup=phis[idx],
        phi_sup_t=diagnostics[idx].t,
        phi_peak_early=diagnostics[idx].t <= 0.5 * t_end,
        l2_gradv_sup=max(r.l2_gradv_sq for r in diagnostics),
    )
