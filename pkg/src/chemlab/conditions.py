"""Closed-form constants, exponents, and boundedness conditions.

Everything here is scalar arithmetic on the model coefficients: the two
absorption constants K1, K2, the mass ceiling M, the interpolation exponents,
the critical-exponent boundedness condition and its regime rewrites, and the
feasibility search for a (p, eta) pair witnessing the condition.

The condition at the critical exponent gamma = 2n/(n+1) involves an
interpolation constant that has no canonical numeric value.  It is therefore
a required input (C_GN, default 1.0 at the CLI layer), every report records
the value used, and verdicts are conditional on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import ModelParams

CRITICAL_GAMMA_TOL = 1e-12


class TheoremScopeError(ValueError):
    """Raised when inputs fall outside the scope of the boundedness result."""


class GammaClass(str, Enum):
    STRICT_RANGE = "StrictRange"   # 2n/(n+1) < gamma <= 2: unconditional
    CRITICAL = "Critical"          # gamma = 2n/(n+1): parameter-conditional
    UNCOVERED = "Uncovered"        # gamma < 2n/(n+1): no statement


class Regime(str, Enum):
    B1_ZERO_C = "B1_zero_c"
    B2_MASS_BOUND = "B2_mass_bound"
    B2_MU_INEQUALITY = "B2_mu_inequality"
    B3_EQUALITY = "B3_equality"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class ExponentSet:
    """Interpolation exponents for a given (p, gamma, n).

    theta and sigma are the gradient weight and the norm index used to absorb
    the (p+1)-power of u; theta_bar drives the mass-based absorption; the
    hatted pair is (theta, sigma) evaluated at the critical exponent
    2n/(n+1), where theta_hat * sigma_hat * (n+1) / (2n) = 1 exactly.
    """

    theta: float
    sigma: float
    theta_bar: float
    theta_hat: float
    sigma_hat: float


@dataclass(frozen=True)
class ConditionReport:
    """Both sides of a boundedness condition plus everything that went in.

    `satisfied` is None when gamma is uncovered (no statement applies).
    `strict` records whether the comparison applied was `lhs > rhs` (the
    critical-case condition) or `lhs >= rhs` (the general (p, eta) form).
    """

    gamma_class: GammaClass
    M: float
    K1: float
    K2: float
    C_GN: float
    lhs: float
    rhs: float
    satisfied: bool | None
    regime: Regime
    p_used: float
    eta_used: float
    strict: bool


def critical_gamma(n: int) -> float:
    """The exponent threshold 2n/(n+1) separating the two condition regimes."""
    return 2.0 * n / (n + 1.0)


def compute_K1(p: float, n: int) -> float:
    """First absorption constant:
    (p/(p+1)) * (8(4p^2+n)/(p(p+1)))^(1/p) * (p(p-1)/2)^((p+1)/p).
    """
    _check_pn(p, n)
    a = p / (p + 1.0)
    b = (8.0 * (4.0 * p * p + n) / (p * (p + 1.0))) ** (1.0 / p)
    c = (p * (p - 1.0) / 2.0) ** ((p + 1.0) / p)
    return a * b * c


def compute_K2(p: float, n: int, eta: float) -> float:
    """Second absorption constant:
    2 p^((p+1)/2) (p+n+eta-1)^((p+1)/2) / (p+1)
        * (8(4p^2+n)(p-1)/(p(p+1)))^((p-1)/2).
    """
    _check_pn(p, n)
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    a = 2.0 * (p * (p + n + eta - 1.0)) ** ((p + 1.0) / 2.0) / (p + 1.0)
    b = (8.0 * (4.0 * p * p + n) * (p - 1.0) / (p * (p + 1.0))) ** ((p - 1.0) / 2.0)
    return a * b


def _check_pn(p: float, n: int) -> None:
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")


def compute_M(u0_mass: float, lam: float, mu: float, measure: float) -> float:
    """Mass ceiling max{initial mass, (lam/mu) |Omega|}."""
    if u0_mass <= 0 or lam <= 0 or mu <= 0 or measure <= 0:
        raise ValueError("compute_M requires positive inputs")
    return max(u0_mass, lam / mu * measure)


def gamma_class(gamma: float, n: int) -> GammaClass:
    """Classify gamma against the critical threshold 2n/(n+1).

    Values within 1e-12 (absolute) of the threshold count as critical, so a
    gamma computed as 2n/(n+1) in double precision classifies correctly.
    """
    if n < 3:
        raise TheoremScopeError(
            f"boundedness conditions require spatial dimension n >= 3, got n={n}"
        )
    if not 1.0 <= gamma <= 2.0:
        raise ValueError(f"gamma must lie in [1, 2], got {gamma}")
    gc = critical_gamma(n)
    if abs(gamma - gc) <= CRITICAL_GAMMA_TOL:
        return GammaClass.CRITICAL
    if gamma > gc:
        return GammaClass.STRICT_RANGE
    return GammaClass.UNCOVERED


def exponents(p: float, gamma: float, n: int) -> ExponentSet:
    """Interpolation exponents for (p, gamma, n); see ExponentSet.

    Validates the defining bounds: 0 < theta < 1, 0 < theta_bar < 1, the
    hatted product identity, and 0 < theta*sigma/gamma < 1 whenever gamma
    exceeds the critical threshold.
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")

    def theta_of(g: float) -> float:
        num = (p + g - 1.0) / g * (1.0 - 1.0 / (p + 1.0))
        den = (p + g - 1.0) / g + 1.0 / n - 1.0 / g
        if den <= 0.0:
            raise ArithmeticError("degenerate interpolation denominator")
        return num / den

    def sigma_of(g: float) -> float:
        return g * (p + 1.0) / (p + g - 1.0)

    gc = critical_gamma(n)
    out = ExponentSet(
        theta=theta_of(gamma),
        sigma=sigma_of(gamma),
        theta_bar=(p - 1.0) / (p - 1.0 + 2.0 / n),
        theta_hat=theta_of(gc),
        sigma_hat=sigma_of(gc),
    )
    if not 0.0 < out.theta < 1.0:
        raise ArithmeticError(f"theta out of (0,1): {out.theta}")
    if not 0.0 < out.theta_bar < 1.0:
        raise ArithmeticError(f"theta_bar out of (0,1): {out.theta_bar}")
    if abs(out.sigma_hat * out.theta_hat * (n + 1.0) / (2.0 * n) - 1.0) > 1e-10:
        raise ArithmeticError("hatted exponent identity violated")
    if gamma > gc + CRITICAL_GAMMA_TOL:
        ts = out.theta * out.sigma / gamma
        if not 0.0 < ts < 1.0:
            raise ArithmeticError(f"theta*sigma/gamma out of (0,1): {ts}")
    return out


def ode_bound(k: float, l: float) -> float:
    """Ceiling for any y >= 0 with y <= k (y^l + 1): max{1, (2k)^(1/(1-l))}."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if not 0.0 < l < 1.0:
        raise ValueError(f"l must lie in (0, 1), got {l}")
    return max(1.0, (2.0 * k) ** (1.0 / (1.0 - l)))


def _kappa(chi: float, v0_sup: float, n: int) -> tuple[float, float, float]:
    """K1/K2 at p = n/2 and the combined right-hand side of the critical
    condition: K1 v0^(4/n) chi^((2/n)(n+2)) + K2 v0^n."""
    p = n / 2.0
    k1 = compute_K1(p, n)
    k2 = compute_K2(p, n, 0.0)
    kappa = (k1 * v0_sup ** (4.0 / n) * chi ** ((2.0 / n) * (n + 2.0))
             + k2 * v0_sup ** float(n))
    return k1, k2, kappa


def _require_critical(params: ModelParams) -> None:
    params.require_positive_rates()
    cls = gamma_class(params.gamma, params.n)
    if cls is not GammaClass.CRITICAL:
        raise TheoremScopeError(
            f"condition only applies at the critical exponent "
            f"gamma = 2n/(n+1) = {critical_gamma(params.n):.12g}; "
            f"gamma={params.gamma} classifies as {cls.value}"
        )


def condition_a2(
    params: ModelParams, v0_sup: float, M: float, C_GN: float
) -> ConditionReport:
    """Critical-exponent boundedness condition at p = n/2 (strict comparison).

    lhs = c (n/2) (2n/(n^2+3n-2))^(2n/(n+1)) C_GN M^(-2/(n+1)) + mu n/2
    rhs = K1(n/2,n) v0^(4/n) chi^((2/n)(n+2)) + K2(n/2,n,0) v0^n

    C_GN stands in for the unspecified interpolation constant; the verdict is
    conditional on it.
    """
    _require_critical(params)
    _check_condition_inputs(v0_sup, M, C_GN)
    n = params.n
    k1, k2, kappa = _kappa(params.chi, v0_sup, n)
    base = 2.0 * n / (n * n + 3.0 * n - 2.0)
    lhs = (params.c * (n / 2.0) * base ** (2.0 * n / (n + 1.0)) * C_GN
           * M ** (-2.0 / (n + 1.0)) + params.mu * n / 2.0)
    return ConditionReport(
        gamma_class=GammaClass.CRITICAL,
        M=M, K1=k1, K2=k2, C_GN=C_GN,
        lhs=lhs, rhs=kappa,
        satisfied=lhs > kappa,
        regime=Regime.NOT_APPLICABLE,
        p_used=n / 2.0, eta_used=0.0,
        strict=True,
    )


def _check_condition_inputs(v0_sup: float, M: float, C_GN: float) -> None:
    if v0_sup <= 0:
        raise ValueError(f"v0_sup must be positive, got {v0_sup}")
    if M <= 0:
        raise ValueError(f"M must be positive, got {M}")
    if C_GN <= 0:
        raise ValueError(f"C_GN must be positive, got {C_GN}")


@dataclass(frozen=True)
class RegimeConstants:
    """Intermediate constants of the regime classification (for reporting)."""

    F: float            # (n/2) (2n/(n^2+3n-2))^(2n/(n+1)) C_GN
    kappa: float        # combined right-hand side
    mu_bar: float       # (2/n) kappa, the zero-c damping threshold
    E: float | None     # c F / (lam |Omega|)^(2/(n+1)), mu-branch only
    mass_limit: float | None  # (c F / (kappa - (n/2) mu))^((n+1)/2), mass branch


def remark_regimes(
    params: ModelParams,
    v0_sup: float,
    u0_mass: float,
    measure: float,
    C_GN: float,
) -> tuple[ConditionReport, RegimeConstants]:
    """Classify which rewrite of the critical condition applies and test it.

    With F and kappa as in RegimeConstants the condition reads
    c F M^(-2/(n+1)) + (n/2) mu > kappa.  Regimes:

    - c = 0: reduces to mu > (2/n) kappa.
    - mu < (2/n) kappa, c > 0, M = initial mass: an upper bound on the mass.
    - mu < (2/n) kappa, c > 0, M = (lam/mu)|Omega|: an inequality in mu alone.
    - mu = (2/n) kappa, c > 0: holds automatically.
    - mu > (2/n) kappa, c > 0: holds via the damping term alone (no named
      regime; reported NotApplicable).
    """
    _require_critical(params)
    _check_condition_inputs(v0_sup, 1.0, C_GN)
    if u0_mass <= 0 or measure <= 0:
        raise ValueError("u0_mass and measure must be positive")
    n = params.n
    c, mu, lam = params.c, params.mu, params.lam
    k1, k2, kappa = _kappa(params.chi, v0_sup, n)
    base = 2.0 * n / (n * n + 3.0 * n - 2.0)
    F = (n / 2.0) * base ** (2.0 * n / (n + 1.0)) * C_GN
    mu_bar = 2.0 / n * kappa
    logistic_mass = lam / mu * measure
    M = max(u0_mass, logistic_mass)
    lhs = c * F * M ** (-2.0 / (n + 1.0)) + n / 2.0 * mu

    E: float | None = None
    mass_limit: float | None = None
    if c == 0.0:
        regime = Regime.B1_ZERO_C
        satisfied = mu > mu_bar
    elif abs(mu - mu_bar) <= 1e-12 * max(1.0, mu_bar):
        regime = Regime.B3_EQUALITY
        satisfied = True
    elif mu < mu_bar:
        if u0_mass >= logistic_mass:
            regime = Regime.B2_MASS_BOUND
            mass_limit = (c * F / (kappa - n / 2.0 * mu)) ** ((n + 1.0) / 2.0)
            satisfied = u0_mass < mass_limit
        else:
            regime = Regime.B2_MU_INEQUALITY
            E = c * F / (lam * measure) ** (2.0 / (n + 1.0))
            satisfied = E * mu ** (2.0 / (n + 1.0)) + n / 2.0 * mu > kappa
    else:
        # mu above the threshold: the damping term alone settles it
        regime = Regime.NOT_APPLICABLE
        satisfied = lhs > kappa
    report = ConditionReport(
        gamma_class=GammaClass.CRITICAL,
        M=M, K1=k1, K2=k2, C_GN=C_GN,
        lhs=lhs, rhs=kappa,
        satisfied=satisfied,
        regime=regime,
        p_used=n / 2.0, eta_used=0.0,
        strict=True,
    )
    return report, RegimeConstants(F=F, kappa=kappa, mu_bar=mu_bar, E=E,
                                   mass_limit=mass_limit)


def condition_general(
    p: float,
    eta: float,
    params: ModelParams,
    v0_sup: float,
    M: float,
    C_GN: float,
) -> ConditionReport:
    """General (p, eta) form of the critical condition (non-strict).

    lhs = c p (2n/((n+1)p+n-1))^(2n/(n+1)) (2 C_GN)^(-sigma_hat) M^(-2/(n+1))
          + mu p
    rhs = K1(p,n) v0^(2/p) chi^(2(p+1)/p) + K2(p,n,eta) v0^(2p)

    Here C_GN is the interpolation constant itself (the p = n/2 condition
    above folds it into a single aggregate constant instead).  Above the
    critical exponent no condition is needed and the report says so.
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    params.require_positive_rates()
    _check_condition_inputs(v0_sup, M, C_GN)
    cls = gamma_class(params.gamma, params.n)
    if cls is GammaClass.STRICT_RANGE:
        return ConditionReport(
            gamma_class=cls, M=M, K1=math.nan, K2=math.nan, C_GN=C_GN,
            lhs=math.nan, rhs=math.nan, satisfied=True,
            regime=Regime.NOT_APPLICABLE, p_used=p, eta_used=eta, strict=False,
        )
    if cls is GammaClass.UNCOVERED:
        raise TheoremScopeError(
            "no boundedness condition available below the critical exponent"
        )
    n = params.n
    exps = exponents(p, critical_gamma(n), n)
    k1 = compute_K1(p, n)
    k2 = compute_K2(p, n, eta)
    base = 2.0 * n / ((n + 1.0) * p + n - 1.0)
    lhs = (params.c * p * base ** (2.0 * n / (n + 1.0))
           * (2.0 * C_GN) ** (-exps.sigma_hat) * M ** (-2.0 / (n + 1.0))
           + params.mu * p)
    rhs = (k1 * v0_sup ** (2.0 / p) * params.chi ** (2.0 * (p + 1.0) / p)
           + k2 * v0_sup ** (2.0 * p))
    return ConditionReport(
        gamma_class=cls, M=M, K1=k1, K2=k2, C_GN=C_GN,
        lhs=lhs, rhs=rhs, satisfied=lhs >= rhs,
        regime=Regime.NOT_APPLICABLE, p_used=p, eta_used=eta, strict=False,
    )


def aggregate_to_interpolation_constant(C_aggregate: float, n: int) -> float:
    """Convert the aggregate constant of the p = n/2 condition into the
    interpolation-constant convention of the general form.

    At p = n/2 the general prefactor (2n/((n+1)p+n-1))^(2n/(n+1)) equals
    2^(2n/(n+1)) times the aggregate form's prefactor, so the two conditions
    coincide exactly when (2 C)^(-sigma_hat(n/2)) = 2^(-2n/(n+1)) C_aggregate.
    """
    if C_aggregate <= 0:
        raise ValueError("aggregate constant must be positive")
    sigma_hat_half = critical_gamma(n) * (n / 2.0 + 1.0) / (
        n / 2.0 + critical_gamma(n) - 1.0)
    return 0.5 * (2.0 ** (-2.0 * n / (n + 1.0)) * C_aggregate) ** (
        -1.0 / sigma_hat_half)


def search_p_eta(
    params: ModelParams,
    v0_sup: float,
    M: float,
    C_GN: float,
    n_p: int = 64,
    n_eta: int = 20,
) -> tuple[float, float, ConditionReport] | None:
    """Search for a (p, eta) pair witnessing the general condition.

    p runs over an n_p-point geometric grid in (n/2, n]: offsets from n/2
    shrink geometrically from n/2 down to (n/2) 2^-40, so the scan probes
    arbitrarily close (within float resolution) to p = n/2 where the
    continuity argument lives, while every p stays strictly above n/2.  eta
    runs over 2^(-k), k = 1..n_eta.  C_GN is interpreted in the aggregate
    convention of `condition_a2`, converted so that the p -> n/2, eta -> 0
    limit of the scanned condition is exactly the p = n/2 condition; whenever
    that one holds strictly, points near the bottom of the grid succeed.

    Returns the first satisfying (p, eta, report) scanning p upward from n/2
    and eta downward from 1/2, or None if every grid point fails.
    """
    _require_critical(params)
    _check_condition_inputs(v0_sup, M, C_GN)
    if n_p < 1 or n_eta < 1:
        raise ValueError("grid sizes must be positive")
    n = params.n
    c_interp = aggregate_to_interpolation_constant(C_GN, n)
    if n_p == 1:
        exps_grid = [0.0]
    else:
        exps_grid = [-40.0 * i / (n_p - 1) for i in range(n_p)]
    p_grid = sorted(n / 2.0 + (n / 2.0) * 2.0**e for e in exps_grid)
    eta_grid = [2.0 ** (-k) for k in range(1, n_eta + 1)]
    for p in p_grid:
        if p <= 1.0:
            continue
        for eta in eta_grid:
            report = condition_general(p, eta, params, v0_sup, M, c_interp)
            if report.satisfied:
                return p, eta, report
    return None
