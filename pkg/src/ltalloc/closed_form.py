"""Explicit optimal allocation for a CRRA investor facing an OU Sharpe ratio.

With time-to-go tau = T - t, the optimal fraction in stocks is

    alpha = X / (gamma sigma)  +  (C1(tau) + C2(tau) X) (zeta / sigma) rho
            ^ myopic demand       ^ hedging demand

where C2 solves the Riccati equation dC2/dtau = a C2^2 + b C2 + c and C1 the
linear equation dC1/dtau = kappa theta C2 + (b/2 + a C2) C1, both starting
from zero at tau = 0. Only the "normal" branch (discriminant D > 0) is
supported; it always applies when gamma > 1.

The discount rate beta only shifts the level of the value function, never
the allocation, so it is carried in :class:`Preferences` but unused here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NonNormalRegime, SingularDenominator

DENOMINATOR_GUARD = 1e-12


@dataclass(frozen=True)
class Preferences:
    gamma: float
    horizon_T: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidParams("risk aversion must be positive", field="gamma")
        if not self.horizon_T >= 0:
            raise InvalidParams("horizon must be non-negative", field="horizon_T")
        if not self.beta >= 0:
            raise InvalidParams("discount rate must be non-negative", field="beta")


@dataclass(frozen=True)
class NormalSolutionCoefficients:
    a: float
    b: float
    c: float
    D: float
    delta: float
    gamma: float


@dataclass(frozen=True)
class AllocationDecomposition:
    myopic: float
    hedging: float
    total: float
    constrained: float
    c1: float
    c2: float


def riccati_coefficients(cont, gamma):
    if not gamma > 0:
        raise InvalidParams("risk aversion must be positive", field="gamma")
    z, rho, k = cont.zeta, cont.rho, cont.kappa
    a = (1.0 + (1.0 - gamma) * (rho * rho - 1.0)) * z * z
    b = 2.0 * ((1.0 - gamma) / gamma * z * rho - k)
    c = (1.0 - gamma) / gamma**2
    D = b * b - 4.0 * a * c
    if not D > 0:
        raise NonNormalRegime(D, gamma)
    return NormalSolutionCoefficients(a, b, c, D, math.sqrt(D), gamma)


def _denominator(coeffs, tau):
    e = -math.expm1(-coeffs.delta * tau)  # 1 - exp(-delta tau)
    den = 2.0 * coeffs.delta - (coeffs.b + coeffs.delta) * e
    if abs(den) < DENOMINATOR_GUARD:
        raise SingularDenominator(
            f"closed-form denominator {den:.3g} vanishes at tau = {tau:g}"
        )
    return e, den


def _check_tau(tau):
    if not tau >= 0:
        raise InvalidParams(f"time-to-go must be non-negative, got {tau!r}", field="tau")


def c2_at(coeffs, tau):
    _check_tau(tau)
    e, den = _denominator(coeffs, tau)
    return 2.0 * coeffs.c * e / den


def c1_at(coeffs, cont, tau):
    _check_tau(tau)
    _, den = _denominator(coeffs, tau)
    h = math.expm1(-0.5 * coeffs.delta * tau)  # -(1 - exp(-delta tau / 2))
    return 4.0 * coeffs.c * cont.kappa * cont.theta / coeffs.delta * h * h / den


def allocation(cont, prefs, x, tau):
    """Myopic/hedging split of the optimal stock weight at Sharpe ratio ``x``."""
    _check_tau(tau)
    if tau > prefs.horizon_T:
        raise InvalidParams(
            f"time-to-go {tau:g} exceeds the horizon {prefs.horizon_T:g}", field="tau"
        )
    gamma = prefs.gamma
    myopic = x / (gamma * cont.sigma)
    if gamma == 1:
        c1 = c2 = hedging = 0.0
    else:
        coeffs = riccati_coefficients(cont, gamma)
        c1 = c1_at(coeffs, cont, tau)
        c2 = c2_at(coeffs, tau)
        hedging = (c1 + c2 * x) * (cont.zeta / cont.sigma) * cont.rho
    total = myopic + hedging
    return AllocationDecomposition(
        myopic=myopic,
        hedging=hedging,
        total=total,
        constrained=min(max(total, 0.0), 1.0),
        c1=c1,
        c2=c2,
    )


def constrained_allocation(cont, prefs, x, tau):
    """Optimal weight with no borrowing and no short sales: clip(total, 0, 1)."""
    return allocation(cont, prefs, x, tau).constrained


def allocation_slope(cont, gamma, tau):
    """d(alpha)/dX = 1/(gamma sigma) + C2(tau) zeta rho / sigma."""
    slope = 1.0 / (gamma * cont.sigma)
    if gamma == 1:
        return slope
    c2 = c2_at(riccati_coefficients(cont, gamma), tau)
    return slope + c2 * cont.zeta * cont.rho / cont.sigma


def expected_x(cont, x0, t):
    """E[X_t | X_0 = x0] for the OU Sharpe ratio."""
    return cont.theta + (x0 - cont.theta) * math.exp(-cont.kappa * t)


def expected_path(cont, prefs, x0, steps=None, constrained=True):
    """Optimal weight along the expected Sharpe-ratio path, at t = 0, 1, ..., T.

    Returns a list of ``(t, alpha)`` with alpha evaluated at E[X_t | x0] and
    time-to-go T - t.
    """
    T = prefs.horizon_T
    if steps is None:
        steps = int(round(T))
    out = []
    for i in range(steps + 1):
        t = T * i / steps if steps else 0.0
        d = allocation(cont, prefs, expected_x(cont, x0, t), max(T - t, 0.0))
        out.append((t, d.constrained if constrained else d.total))
    return out


def riccati_ode_oracle(coeffs, cont, tau, steps=10_000):
    """Integrate the C1/C2 system with classical RK4 from tau = 0 to ``tau``.

    Test oracle for :func:`c1_at` and :func:`c2_at`; shares no code with them.
    """
    if steps < 1000:
        raise InvalidParams("oracle needs at least 1000 steps", field="steps")
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    kt = cont.kappa * cont.theta

    def rhs(c1, c2):
        return kt * c2 + (0.5 * b + a * c2) * c1, a * c2 * c2 + b * c2 + c

    c1 = c2 = 0.0
    if tau == 0:
        return c1, c2
    h = tau / steps
    for _ in range(steps):
        k1 = rhs(c1, c2)
        k2 = rhs(c1 + 0.5 * h * k1[0], c2 + 0.5 * h * k1[1])
        k3 = rhs(c1 + 0.5 * h * k2[0], c2 + 0.5 * h * k2[1])
        k4 = rhs(c1 + h * k3[0], c2 + h * k3[1])
        c1 += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        c2 += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return c1, c2


SWEEP_FIELDS = ("myopic", "hedging", "total", "constrained")


def sweep(kind, grid, cont, *, x, gamma=None, horizon=None, field="hedging"):
    """Evaluate one allocation component along a grid of gamma or horizon.

    ``kind="gamma"`` holds the horizon fixed (tau = horizon) and varies risk
    aversion; ``kind="horizon"`` holds gamma fixed and varies T with tau = T.
    Returns a list of ``(grid value, component value)`` pairs.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidParams("sweep grid is empty", field="grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParams("sweep grid must be strictly ascending", field="grid")
    if field not in SWEEP_FIELDS:
        raise InvalidParams(f"unknown component {field!r}", field="field")
    rows = []
    for g in grid:
        if kind == "gamma":
            prefs = Preferences(gamma=g, horizon_T=horizon)
            d = allocation(cont, prefs, x, horizon)
        elif kind == "horizon":
            prefs = Preferences(gamma=gamma, horizon_T=g)
            d = allocation(cont, prefs, x, g)
        else:
            raise InvalidParams(f"unknown sweep kind {kind!r}", field="kind")
        rows.append((g, getattr(d, field)))
    return rows


def linear_relation_factor(coeffs, cont, tau):
    """Factor k(tau) with C1 = k C2, i.e. (2 kappa theta / delta)(1 - e^{-delta tau/2})^2 / (1 - e^{-delta tau}).

    Rewriting with growing exponentials, (1 - e^{u/2})^2 / (1 - e^{u}), flips
    the sign, so that form must carry a leading minus.
    """
    if not tau > 0:
        raise InvalidParams("linear relation is undefined at tau = 0", field="tau")
    h = math.expm1(-0.5 * coeffs.delta * tau)
    e = -math.expm1(-coeffs.delta * tau)
    return 2.0 * cont.kappa * cont.theta / coeffs.delta * h * h / e


def evaluate_grid(cont, gammas, horizons, xs):
    """Full allocation decompositions for every (T, gamma, x) combination.

    Returns an object array indexed ``[horizon, gamma, x]``; cells whose gamma
    has no normal solution hold the :class:`NonNormalRegime` instance.
    """
    out = np.empty((len(horizons), len(gammas), len(xs)), dtype=object)
    for i, T in enumerate(horizons):
        for j, g in enumerate(gammas):
            prefs = Preferences(gamma=g, horizon_T=T)
            for k, x in enumerate(xs):
                try:
                    out[i, j, k] = allocation(cont, prefs, x, T)
                except NonNormalRegime as exc:
                    out[i, j, k] = exc
    return out
