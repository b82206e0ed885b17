"""Problem definition: PDE coefficients, domain geometry, grids, and initial data.

The solver works on uniform cell-centered grids over three geometry families:
intervals, axis-aligned boxes (2-D/3-D), and radially symmetric balls reduced
to a 1-D grid in the radius.  Cell-centered layout puts the first cell center
at h/2, which makes homogeneous Neumann boundaries a one-line ghost reflection
and keeps midpoint quadrature second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

POSITIVITY_EPS = 1e-12


class DomainKind(str, Enum):
    INTERVAL = "interval"
    BOX2 = "box2"
    BOX3 = "box3"
    RADIAL_BALL = "radial"


_AXES = {
    DomainKind.INTERVAL: 1,
    DomainKind.BOX2: 2,
    DomainKind.BOX3: 3,
    DomainKind.RADIAL_BALL: 1,
}


def ball_volume(radius: float, n: int) -> float:
    """Volume of the n-dimensional ball of the given radius."""
    return math.pi ** (n / 2.0) * radius**n / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the cell/signal system and the analysis dimension n.

    chi scales the cross-diffusion toward the signal gradient, lam and mu are
    the logistic birth and quadratic-death rates, c and gamma control the
    gradient-dependent death term c*|grad u|^gamma.  The boundedness-condition
    checks require strictly positive chi, lam, mu; the solver also accepts
    zero values so decoupled diagnostic runs (pure heat) are expressible.
    """

    chi: float
    lam: float
    mu: float
    c: float
    gamma: float
    n: int

    def __post_init__(self) -> None:
        if self.chi < 0 or self.lam < 0 or self.mu < 0 or self.c < 0:
            raise ValueError("chi, lam, mu, c must be nonnegative")
        if not 1.0 <= self.gamma <= 2.0:
            raise ValueError(f"gamma must lie in [1, 2], got {self.gamma}")
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    def require_positive_rates(self) -> None:
        """Condition checks need chi, lam, mu > 0 (c >= 0 is allowed)."""
        if self.chi <= 0 or self.lam <= 0 or self.mu <= 0:
            raise ValueError("boundedness conditions require chi, lam, mu > 0")


@dataclass(frozen=True)
class DomainSpec:
    """Geometry of the habitat: kind, extents, and its measure |Omega|.

    extents holds side lengths (interval/box) or the single radius R
    (radial ball).  radial_n is the effective spatial dimension of the ball;
    it must be >= 3, matching the scope of the boundedness analysis.
    """

    kind: DomainKind
    extents: tuple[float, ...]
    radial_n: int = 0
    measure: float = 0.0

    def __post_init__(self) -> None:
        if any(e <= 0 for e in self.extents):
            raise ValueError("domain extents must be positive")
        if len(self.extents) != _AXES[self.kind]:
            raise ValueError(
                f"{self.kind.value} needs {_AXES[self.kind]} extent(s), "
                f"got {len(self.extents)}"
            )
        if self.kind is DomainKind.RADIAL_BALL:
            if self.radial_n < 3:
                raise ValueError("radial ball requires radial_n >= 3")
            measure = ball_volume(self.extents[0], self.radial_n)
        else:
            if self.radial_n:
                raise ValueError("radial_n only applies to radial domains")
            measure = math.prod(self.extents)
        object.__setattr__(self, "measure", measure)

    @property
    def ndim(self) -> int:
        """Number of grid axes (1 for both intervals and radial balls)."""
        return _AXES[self.kind]


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid: shape, spacing, centers at (i + 1/2) * h."""

    shape: tuple[int, ...]
    spacing: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(s < 4 for s in self.shape):
            raise ValueError("grids need at least 4 cells per axis")
        if len(self.shape) != len(self.spacing):
            raise ValueError("shape and spacing rank mismatch")

    @property
    def cell_count(self) -> int:
        return math.prod(self.shape)

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.shape[axis]) + 0.5) * h

    def meshgrid(self) -> list[np.ndarray]:
        axes = [self.axis_centers(a) for a in range(len(self.shape))]
        return list(np.meshgrid(*axes, indexing="ij"))


def build_grid(domain: DomainSpec, resolution: list[int] | tuple[int, ...]) -> Grid:
    """Build the uniform cell-centered grid covering the domain.

    resolution gives cells per axis (one entry for interval/radial domains).
    """
    res = tuple(int(r) for r in resolution)
    if len(res) != domain.ndim:
        raise ValueError(
            f"resolution rank {len(res)} does not match domain rank {domain.ndim}"
        )
    if any(r < 4 for r in res):
        raise ValueError("resolution entries must be >= 4")
    spacing = tuple(e / r for e, r in zip(domain.extents, res))
    return Grid(shape=res, spacing=spacing)


def cell_volumes(grid: Grid, domain: DomainSpec) -> np.ndarray:
    """Midpoint quadrature weights per cell (includes the spherical-shell
    area factor for radial grids)."""
    if domain.kind is DomainKind.RADIAL_BALL:
        m = domain.radial_n
        h = grid.spacing[0]
        r = grid.axis_centers(0)
        omega = m * math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)
        return omega * r ** (m - 1) * h
    vol = math.prod(grid.spacing)
    return np.full(grid.shape, vol)


def integrate_field(field: np.ndarray, grid: Grid, domain: DomainSpec) -> float:
    """Midpoint-rule integral of a discrete field over the domain."""
    return float(np.sum(field * cell_volumes(grid, domain)))


@dataclass(frozen=True)
class FieldState:
    """Discrete (u, v) pair at one time instant."""

    u: np.ndarray
    v: np.ndarray
    t: float

    def validate(self, grid: Grid) -> None:
        if self.u.shape != grid.shape or self.v.shape != grid.shape:
            raise ValueError("field shape does not match grid")
        if self.t < 0:
            raise ValueError("time must be nonnegative")
        if float(self.u.min()) < -POSITIVITY_EPS or float(self.v.min()) < -POSITIVITY_EPS:
            raise ValueError("fields fell below the positivity tolerance")


# --- initial-data descriptors -------------------------------------------------
#
# A closed set of smooth strictly positive profiles.  Every descriptor has an
# analytic lower bound, so positivity of the initial data is guaranteed by
# construction rather than sampled.


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class CosineBump:
    """baseline + amplitude * prod_i cos(pi x_i / L_i); radial: cos(pi r / R)."""

    amplitude: float
    baseline: float


@dataclass(frozen=True)
class GaussianBump:
    """baseline + amplitude * exp(-sum_i (x_i - c_i)^2 / (2 width^2))."""

    amplitude: float
    center: tuple[float, ...]
    width: float
    baseline: float


Descriptor = Constant | CosineBump | GaussianBump


def _descriptor_min(spec: Descriptor) -> float:
    if isinstance(spec, Constant):
        return spec.value
    if isinstance(spec, CosineBump):
        return spec.baseline - abs(spec.amplitude)
    return spec.baseline + min(0.0, spec.amplitude)


def evaluate_descriptor(spec: Descriptor, grid: Grid) -> np.ndarray:
    """Sample a descriptor at the cell centers."""
    if isinstance(spec, Constant):
        return np.full(grid.shape, float(spec.value))
    coords = grid.meshgrid()
    lengths = [grid.shape[a] * grid.spacing[a] for a in range(len(grid.shape))]
    if isinstance(spec, CosineBump):
        bump = np.ones(grid.shape)
        for x, length in zip(coords, lengths):
            bump = bump * np.cos(np.pi * x / length)
        return spec.baseline + spec.amplitude * bump
    if len(spec.center) != len(coords):
        raise ValueError("gaussian center rank does not match the grid")
    if spec.width <= 0:
        raise ValueError("gaussian width must be positive")
    r2 = np.zeros(grid.shape)
    for x, c in zip(coords, spec.center):
        r2 = r2 + (x - c) ** 2
    return spec.baseline + spec.amplitude * np.exp(-r2 / (2.0 * spec.width**2))


def descriptor_mass(spec: Descriptor, domain: DomainSpec) -> float:
    """Integral of the descriptor over the domain, to near machine accuracy.

    Uses closed forms where they exist (constants, cartesian cosine/gaussian
    profiles) and adaptive quadrature of the radial profile otherwise.
    """
    if isinstance(spec, Constant):
        return spec.value * domain.measure

    if domain.kind is DomainKind.RADIAL_BALL:
        m = domain.radial_n
        radius = domain.extents[0]
        omega = m * math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)
        if isinstance(spec, CosineBump):
            profile = lambda r: np.cos(np.pi * r / radius)  # noqa: E731
        else:
            c0 = spec.center[0]
            w = spec.width
            profile = lambda r: np.exp(-((r - c0) ** 2) / (2.0 * w**2))  # noqa: E731
        bump, _ = integrate.quad(
            lambda r: profile(r) * r ** (m - 1), 0.0, radius,
            epsabs=1e-14, epsrel=1e-13, limit=200,
        )
        return spec.baseline * domain.measure + spec.amplitude * omega * bump

    lengths = domain.extents
    if isinstance(spec, CosineBump):
        # each axis integral of cos(pi x / L) over [0, L] vanishes exactly
        return spec.baseline * domain.measure
    bump = 1.0
    for length, c in zip(lengths, spec.center):
        w = spec.width
        s = w * math.sqrt(math.pi / 2.0)
        bump *= s * (math.erf((length - c) / (math.sqrt(2.0) * w))
                     + math.erf(c / (math.sqrt(2.0) * w)))
    return spec.baseline * domain.measure + spec.amplitude * bump


@dataclass(frozen=True)
class InitialData:
    """Initial profiles plus the two scalars the condition checks consume:
    the initial mass (accurate quadrature) and the discrete sup of v0."""

    u0_spec: Descriptor
    v0_spec: Descriptor
    u0_mass: float
    v0_sup: float


def make_initial_data(
    u0_spec: Descriptor, v0_spec: Descriptor, domain: DomainSpec, grid: Grid
) -> InitialData:
    """Validate positivity and precompute the mass/sup scalars."""
    for name, spec in (("u0", u0_spec), ("v0", v0_spec)):
        if _descriptor_min(spec) <= 0:
            raise ValueError(f"{name} descriptor is not strictly positive")
    v0 = evaluate_descriptor(v0_spec, grid)
    u0 = evaluate_descriptor(u0_spec, grid)
    if float(u0.min()) <= 0 or float(v0.min()) <= 0:
        raise ValueError("initial data must be strictly positive on the grid")
    u0_mass = descriptor_mass(u0_spec, domain)
    if u0_mass <= 0:
        raise ValueError("initial mass must be positive")
    return InitialData(
        u0_spec=u0_spec,
        v0_spec=v0_spec,
        u0_mass=u0_mass,
        v0_sup=float(v0.max()),
    )


def evaluate_initial(data: InitialData, grid: Grid) -> FieldState:
    """Sample the initial descriptors onto the grid at t = 0.

    Deterministic: identical inputs produce bit-identical fields.
    """
    u0 = evaluate_descriptor(data.u0_spec, grid)
    v0 = evaluate_descriptor(data.v0_spec, grid)
    if float(u0.min()) <= 0 or float(v0.min()) <= 0:
        raise ValueError("initial data must be strictly positive on the grid")
    return FieldState(u=u0, v=v0, t=0.0)
