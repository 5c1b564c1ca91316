"""Bridge between the quarterly VAR(1) and the continuous-time model.

Continuous model (time unit: one quarter)::

    dP/P = (sigma X + r) dt + sigma dB_p
    dX   = kappa (theta - X) dt + zeta dB_x,      dB_p dB_x = rho dt

X is the Sharpe ratio. The VAR predictor z maps to X through the affine
relation X = sigma/2 + (a_r + b_r z)/sigma.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDistribution, InvalidParams
from .normal import norm_ppf
from .var_kernel import validate, z_unconditional


@dataclass(frozen=True)
class ContinuousParams:
    r: float
    theta: float
    kappa: float
    sigma: float
    zeta: float
    rho: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParams("sigma must be positive", field="sigma")
        if not self.zeta >= 0:
            raise InvalidParams("zeta must be non-negative", field="zeta")
        if not self.kappa > 0:
            raise InvalidParams("kappa must be positive", field="kappa")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidParams("rho must lie in [-1, 1]", field="rho")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class XDistribution:
    mean: float
    variance: float

    @property
    def std(self):
        return math.sqrt(self.variance)


def recover_continuous(params):
    """Continuous-time parameters implied by quarterly VAR estimates (dt = 1)."""
    validate(params)
    s_r = params.sigma_r
    s_z = params.sigma_z
    theta = params.a_z * params.b_r / (s_r * (1.0 - params.b_z)) + (
        params.a_r + 0.5 * params.var_r
    ) / s_r
    return ContinuousParams(
        r=params.rf_quarterly,
        theta=theta,
        kappa=-math.log(params.b_z),
        sigma=s_r,
        zeta=params.b_r * s_z / s_r,
        rho=params.cov_rz / (s_r * s_z),
    )


def x_distribution(params):
    """Unconditional normal law of the quarterly point observation of X."""
    validate(params)
    theta = recover_continuous(params).theta
    variance = params.b_r**2 * params.var_z / ((1.0 - params.b_z**2) * params.var_r)
    return XDistribution(theta, variance)


def x_percentile(dist, p):
    """p-th percentile of X, p given in percent."""
    if not 0.0 < p < 100.0:
        raise InvalidParams(f"percentile must lie in (0, 100), got {p!r}", field="p")
    if p == 50:
        return dist.mean
    if not dist.variance > 0:
        raise DegenerateDistribution(
            f"X distribution has variance {dist.variance!r}; only the median is defined"
        )
    return dist.mean + norm_ppf(p / 100.0) * math.sqrt(dist.variance)


def z_to_x(params, z):
    s_r = params.sigma_r
    return 0.5 * s_r + (params.a_r + params.b_r * z) / s_r


def x_to_z(params, x):
    s_r = params.sigma_r
    return ((x - 0.5 * s_r) * s_r - params.a_r) / params.b_r


def z_percentile(params, p):
    """Predictor value whose image under :func:`z_to_x` is the p-th X percentile."""
    return x_to_z(params, x_percentile(x_distribution(params), p))


@dataclass(frozen=True)
class ExactMoments:
    """Conditional moments of one step of length dt of the exact discretisation.

    The state is (L, X) with L the cumulative log price net of r t, so
    ``L' = L + intercept[0] + transition[0, 1] X + U_p`` and
    ``X' = intercept[1] + transition[1, 1] X + U_x``.
    """

    dt: float
    var_x: float
    cov_x_return: float
    var_return: float
    transition: np.ndarray
    intercept: np.ndarray

    @property
    def covariance(self):
        """Innovation covariance ordered (return, X)."""
        return np.array(
            [[self.var_return, self.cov_x_return], [self.cov_x_return, self.var_x]]
        )


def exact_moments(cont, dt):
    if not dt > 0:
        raise InvalidParams(f"dt must be positive, got {dt!r}", field="dt")
    if not cont.kappa > 0:
        raise InvalidParams("kappa must be positive", field="kappa")
    k, s, z, rho, th = cont.kappa, cont.sigma, cont.zeta, cont.rho, cont.theta
    e1 = -math.expm1(-k * dt)  # 1 - exp(-k dt)
    e2 = -math.expm1(-2.0 * k * dt)  # 1 - exp(-2 k dt)

    var_x = z * z * e2 / (2.0 * k)
    cov = rho * s * z * e1 / k + s * z * z * e1 / k**2 - s * z * z * e2 / (2.0 * k**2)
    var_ret = (
        (s * s + 2.0 * rho * z * s * s / k + z * z * s * s / k**2) * dt
        - 2.0 * rho * z * s * s * e1 / k**2
        - 2.0 * z * z * s * s * e1 / k**3
        + z * z * s * s * e2 / (2.0 * k**3)
    )
    transition = np.array([[1.0, e1 * s / k], [0.0, 1.0 - e1]])
    intercept = np.array([(s * th - 0.5 * s * s) * dt - e1 * s * th / k, e1 * th])
    return ExactMoments(dt, var_x, cov, var_ret, transition, intercept)


def simulate_exact(cont, dt, n_paths, seed, x0=None, substeps=1):
    """Simulate the continuous model over ``dt`` by composing exact steps.

    The interval is split into ``substeps`` equal steps, each advanced with
    the exact transition of :func:`exact_moments`. Returns ``(log_return, x)``
    at the end of the interval: the log price change net of r dt, and X.
    """
    if int(substeps) != substeps or substeps < 1:
        raise InvalidParams("substeps must be a positive integer", field="substeps")
    m = exact_moments(cont, dt / substeps)
    cov = m.covariance
    l11 = math.sqrt(cov[0, 0])
    l21 = cov[1, 0] / l11
    l22 = math.sqrt(max(cov[1, 1] - l21 * l21, 0.0))
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = np.full(n_paths, cont.theta if x0 is None else x0, dtype=float)
    ret = np.zeros(n_paths)
    for _ in range(int(substeps)):
        e = rng.standard_normal((2, n_paths))
        u_p = l11 * e[0]
        u_x = l21 * e[0] + l22 * e[1]
        ret += m.intercept[0] + m.transition[0, 1] * x + u_p
        x = m.intercept[1] + m.transition[1, 1] * x + u_x
    return ret, x


def x_unconditional_from_z(params):
    """Moments of X obtained by pushing the stationary z law through z_to_x."""
    mz, vz = z_unconditional(params)
    return XDistribution(z_to_x(params, mz), vz * params.b_r**2 / params.var_r)
