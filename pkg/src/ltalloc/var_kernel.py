"""Restricted VAR(1) for quarterly log excess returns and the log dividend yield.

    r_{t+1} = a_r + b_r z_t + eps_r
    z_{t+1} = a_z + b_z z_t + eps_z,     (eps_r, eps_z) ~ N(0, [[var_r, cov_rz], [cov_rz, var_z]])

Random numbers
--------------
Paths are generated in fixed blocks of ``PATH_BLOCK`` consecutive path
indices. Block ``b`` draws from its own Philox-4x64-10 counter stream with
``key = seed`` and the top word of the 256-bit counter set to ``b``, so any
worker can regenerate any block independently and the output does not depend
on how blocks are distributed. Within a block, normals come from numpy's
ziggurat sampler as an array of shape ``(horizon, 2, PATH_BLOCK)``
(truncated for a final partial block); index 0 of
the middle axis drives the return shock, index 1 the predictor shock.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidParams, NonPositiveCount

PATH_BLOCK = 1024


@dataclass(frozen=True)
class DiscreteVarParams:
    rf_quarterly: float
    a_r: float
    b_r: float
    a_z: float
    b_z: float
    var_r: float
    var_z: float
    cov_rz: float

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InvalidParams("expected a JSON object of VAR estimates")
        names = [f.name for f in fields(cls)]
        unknown = sorted(set(data) - set(names))
        if unknown:
            raise InvalidParams("unknown field", field=unknown[0])
        values = {}
        for name in names:
            if name not in data:
                raise InvalidParams("missing field", field=name)
            v = data[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParams(f"expected a number, got {v!r}", field=name)
            if not math.isfinite(v):
                raise InvalidParams("value is not finite", field=name)
            values[name] = float(v)
        return cls(**values)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"malformed JSON ({exc.msg} at line {exc.lineno})")
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @property
    def sigma_r(self):
        return math.sqrt(self.var_r)

    @property
    def sigma_z(self):
        return math.sqrt(self.var_z)

    @property
    def correlation(self):
        return self.cov_rz / math.sqrt(self.var_r * self.var_z)


# Brandt, Goyal, Santa-Clara and Stroud (2005) quarterly estimates.
BRANDT_PARAMS = DiscreteVarParams(
    rf_quarterly=0.015,
    a_r=0.227,
    b_r=0.060,
    a_z=-0.155,
    b_z=0.958,
    var_r=0.0060,
    var_z=0.0049,
    cov_rz=-0.0051,
)


def validate(params):
    """Return ``params`` unchanged if every invariant holds, else raise InvalidParams."""
    if not params.var_r > 0:
        raise InvalidParams("variance must be positive", field="var_r")
    if not params.var_z > 0:
        raise InvalidParams("variance must be positive", field="var_z")
    if params.cov_rz**2 > params.var_r * params.var_z:
        raise InvalidParams(
            "covariance: |cov_rz| exceeds sqrt(var_r * var_z), correlation outside [-1, 1]",
            field="cov_rz",
        )
    if not abs(params.b_z) < 1:
        raise InvalidParams("nonstationary predictor: |b_z| must be < 1", field="b_z")
    if not params.b_z > 0:
        raise InvalidParams("b_z must be positive for parameter recovery", field="b_z")
    if not params.b_r > 0:
        raise InvalidParams("b_r must be positive for parameter recovery", field="b_r")
    return params


def z_unconditional(params):
    """Stationary mean and variance of the AR(1) predictor."""
    if not abs(params.b_z) < 1:
        raise InvalidParams("nonstationary predictor: |b_z| must be < 1", field="b_z")
    mean = params.a_z / (1.0 - params.b_z)
    var = params.var_z / (1.0 - params.b_z**2)
    return mean, var


def innovation_factor(params):
    """Lower-triangular L with L @ L.T equal to the innovation covariance."""
    l11 = math.sqrt(params.var_r)
    l21 = params.cov_rz / l11
    # clamp: cov_rz**2 == var_r*var_z can round to a tiny negative
    l22 = math.sqrt(max(params.var_z - l21 * l21, 0.0))
    return l11, l21, l22


@dataclass
class PathBatch:
    """Simulated paths, stored column-major so each time step is contiguous.

    ``excess_log_returns[:, t]`` is the log excess return realised over
    quarter ``t`` (from ``t`` to ``t + 1``); ``predictor[:, t]`` is z at the
    start of quarter ``t``.
    """

    n_paths: int
    horizon: int
    excess_log_returns: np.ndarray
    predictor: np.ndarray
    seed: int

    def innovations(self, params):
        """Recover the (eps_r, eps_z) shocks, each of shape (n_paths, horizon)."""
        z = self.predictor
        eps_r = self.excess_log_returns - params.a_r - params.b_r * z[:, :-1]
        eps_z = z[:, 1:] - params.a_z - params.b_z * z[:, :-1]
        return eps_r, eps_z

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path", "t", "predictor", "excess_log_return"])
            for i in range(self.n_paths):
                w.writerow([i, 0, repr(float(self.predictor[i, 0])), ""])
                for t in range(1, self.horizon + 1):
                    w.writerow(
                        [
                            i,
                            t,
                            repr(float(self.predictor[i, t])),
                            repr(float(self.excess_log_returns[i, t - 1])),
                        ]
                    )

    def save(self, path):
        np.savez(
            path,
            excess_log_returns=self.excess_log_returns,
            predictor=self.predictor,
            seed=np.int64(self.seed),
        )

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            r = np.asfortranarray(data["excess_log_returns"])
            z = np.asfortranarray(data["predictor"])
            seed = int(data["seed"])
        return cls(r.shape[0], r.shape[1], r, z, seed)


def _block_normals(seed, block, horizon, size):
    # always a full block, so a path's draws never depend on n_paths
    bitgen = np.random.Philox(key=seed, counter=[0, 0, 0, block])
    e = np.random.Generator(bitgen).standard_normal((horizon, 2, PATH_BLOCK))
    return e[:, :, :size]


def simulate_paths(params, n_paths, horizon, z0, seed, noiseless=False):
    """Simulate ``n_paths`` independent VAR paths of ``horizon`` quarters from z0.

    ``noiseless=True`` zeroes every innovation (the deterministic recursion),
    which is handy for tests.
    """
    validate(params)
    if int(n_paths) != n_paths or n_paths < 1:
        raise NonPositiveCount(f"n_paths must be a positive integer, got {n_paths!r}")
    if int(horizon) != horizon or horizon < 1:
        raise NonPositiveCount(f"horizon must be a positive integer, got {horizon!r}")
    if int(seed) != seed or seed < 0:
        raise InvalidParams("seed must be a non-negative integer", field="seed")
    n_paths, horizon, seed = int(n_paths), int(horizon), int(seed)

    l11, l21, l22 = innovation_factor(params)
    r = np.empty((n_paths, horizon), order="F")
    z = np.empty((n_paths, horizon + 1), order="F")
    z[:, 0] = z0

    for block, start in enumerate(range(0, n_paths, PATH_BLOCK)):
        stop = min(start + PATH_BLOCK, n_paths)
        if noiseless:
            e = np.zeros((horizon, 2, stop - start))
        else:
            e = _block_normals(seed, block, horizon, stop - start)
        zt = z[start:stop, 0]
        for t in range(horizon):
            eps_r = l11 * e[t, 0]
            eps_z = l21 * e[t, 0] + l22 * e[t, 1]
            r[start:stop, t] = params.a_r + params.b_r * zt + eps_r
            zt = params.a_z + params.b_z * zt + eps_z
            z[start:stop, t + 1] = zt

    if not (np.isfinite(r).all() and np.isfinite(z).all()):
        raise InvalidParams("simulation produced non-finite values")
    return PathBatch(n_paths, horizon, r, z, seed)
