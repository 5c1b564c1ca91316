import dataclasses
import math

import numpy as np
import pytest

from ltalloc.errors import InvalidParams, NonPositiveCount
from ltalloc.var_kernel import (
    BRANDT_PARAMS,
    DiscreteVarParams,
    PathBatch,
    simulate_paths,
    validate,
    z_unconditional,
)
from ltalloc import aggregation as agg


def test_table1_params_valid():
    assert validate(BRANDT_PARAMS) is BRANDT_PARAMS


@pytest.mark.parametrize(
    "change, field, word",
    [
        ({"b_z": 1.0}, "b_z", "nonstationary"),
        ({"b_z": -1.2}, "b_z", "nonstationary"),
        ({"cov_rz": -0.01}, "cov_rz", "covariance"),
        ({"var_r": 0.0}, "var_r", "variance"),
        ({"var_z": -1.0}, "var_z", "variance"),
        ({"b_r": 0.0}, "b_r", "positive"),
        ({"b_z": -0.5}, "b_z", "positive"),
    ],
)
def test_invalid_params_name_the_invariant(change, field, word):
    bad = dataclasses.replace(BRANDT_PARAMS, **change)
    with pytest.raises(InvalidParams) as exc:
        validate(bad)
    assert exc.value.field == field
    assert word in str(exc.value)


def test_json_round_trip():
    text = BRANDT_PARAMS.to_json()
    assert DiscreteVarParams.from_json(text) == BRANDT_PARAMS


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"rf_quarterly": 0.015}', "a_r"),
        ('{"rf_quarterly": "x", "a_r": 1, "b_r": 1, "a_z": 1, "b_z": 0.5, "var_r": 1, "var_z": 1, "cov_rz": 0}', "rf_quarterly"),
        ('{"rf_quarterly": 0.01, "a_r": 1, "b_r": 1, "a_z": 1, "b_z": 0.5, "var_r": 1, "var_z": 1, "cov_rz": 0, "extra": 2}', "extra"),
    ],
)
def test_json_errors_name_field(text, field):
    with pytest.raises(InvalidParams) as exc:
        DiscreteVarParams.from_json(text)
    assert exc.value.field == field


def test_malformed_json():
    with pytest.raises(InvalidParams, match="malformed JSON"):
        DiscreteVarParams.from_json("{not json")


def test_z_unconditional_table1():
    mean, var = z_unconditional(BRANDT_PARAMS)
    # -.155 / .042 and .0049 / (1 - .958^2)
    assert mean == pytest.approx(-3.690476190, abs=1e-8)
    assert var == pytest.approx(0.0049 / 0.082236, rel=1e-12)
    assert var == pytest.approx(0.059584, abs=2e-6)


def test_z_unconditional_trivial_cases():
    p = dataclasses.replace(BRANDT_PARAMS, a_z=0.0)
    assert z_unconditional(p)[0] == 0.0
    p = dataclasses.replace(BRANDT_PARAMS, b_z=0.0)
    assert z_unconditional(p) == (BRANDT_PARAMS.a_z, BRANDT_PARAMS.var_z)


def test_shapes_and_layout():
    z30 = agg.z_percentile(BRANDT_PARAMS, 30)
    b = simulate_paths(BRANDT_PARAMS, 100_000, 10, z30, seed=3)
    assert b.excess_log_returns.shape == (100_000, 10)
    assert b.predictor.shape == (100_000, 11)
    assert b.excess_log_returns.flags.f_contiguous
    assert (b.predictor[:, 0] == z30).all()
    assert np.isfinite(b.excess_log_returns).all()


def test_deterministic_given_seed():
    a = simulate_paths(BRANDT_PARAMS, 3000, 5, -3.7, seed=11)
    b = simulate_paths(BRANDT_PARAMS, 3000, 5, -3.7, seed=11)
    c = simulate_paths(BRANDT_PARAMS, 3000, 5, -3.7, seed=12)
    assert np.array_equal(a.excess_log_returns, b.excess_log_returns)
    assert np.array_equal(a.predictor, b.predictor)
    assert not np.array_equal(a.predictor, c.predictor)


def test_paths_do_not_depend_on_batch_size():
    # block-keyed streams: the first paths are identical whatever n_paths is
    small = simulate_paths(BRANDT_PARAMS, 1500, 4, -3.7, seed=5)
    large = simulate_paths(BRANDT_PARAMS, 5000, 4, -3.7, seed=5)
    assert np.array_equal(small.predictor, large.predictor[:1500])


def test_noiseless_recursion():
    p = BRANDT_PARAMS
    b = simulate_paths(p, 4, 6, 0.3, seed=0, noiseless=True)
    z = 0.3
    for t in range(6):
        assert np.all(b.excess_log_returns[:, t] == p.a_r + p.b_r * z)
        z = p.a_z + p.b_z * z
        assert np.all(b.predictor[:, t + 1] == z)


def test_stationary_moments_within_4_se():
    p = BRANDT_PARAMS
    mean, var = z_unconditional(p)
    n, T = 100_000, 10
    b = simulate_paths(p, n, T, mean, seed=21)
    zT = b.predictor[:, T]
    # conditional on z0 = mean, z_T has mean `mean` and variance var (1 - b_z^(2T))
    v_T = var * (1 - p.b_z ** (2 * T))
    assert abs(zT.mean() - mean) < 4 * math.sqrt(v_T / n)
    se_var = v_T * math.sqrt(2 / n)
    assert abs(zT.var() - v_T) < 4 * se_var


def test_long_run_law_is_unconditional():
    # after 300 quarters b_z^(2T) < 1e-11: z_T follows the stationary law
    p = BRANDT_PARAMS
    mean, var = z_unconditional(p)
    n = 100_000
    zT = simulate_paths(p, n, 300, mean, seed=8).predictor[:, -1]
    assert abs(zT.mean() - mean) < 4 * math.sqrt(var / n)
    assert abs(zT.var() - var) < 4 * var * math.sqrt(2 / n)


def test_innovation_correlation():
    p = BRANDT_PARAMS
    b = simulate_paths(p, 100_000, 10, -3.69, seed=4)
    er, ez = b.innovations(p)
    corr = np.corrcoef(er.ravel(), ez.ravel())[0, 1]
    assert abs(corr - p.correlation) < 0.01
    assert er.var() == pytest.approx(p.var_r, rel=0.01)
    assert ez.var() == pytest.approx(p.var_z, rel=0.01)


@pytest.mark.parametrize("n, T", [(0, 5), (5, 0), (-1, 3), (2.5, 3)])
def test_bad_counts(n, T):
    with pytest.raises(NonPositiveCount):
        simulate_paths(BRANDT_PARAMS, n, T, 0.0, seed=0)


def test_invalid_params_rejected_by_simulation():
    with pytest.raises(InvalidParams):
        simulate_paths(dataclasses.replace(BRANDT_PARAMS, b_z=1.0), 5, 5, 0.0, seed=0)


def test_csv_and_npz_dump(tmp_path):
    b = simulate_paths(BRANDT_PARAMS, 3, 2, -3.7, seed=1)
    path = tmp_path / "paths.csv"
    b.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "path,t,predictor,excess_log_return"
    assert len(lines) == 1 + 3 * 3
    row = lines[2].split(",")
    assert (int(row[0]), int(row[1])) == (0, 1)
    assert float(row[3]) == b.excess_log_returns[0, 0]

    b.save(tmp_path / "paths.npz")
    back = PathBatch.load(tmp_path / "paths.npz")
    assert np.array_equal(back.excess_log_returns, b.excess_log_returns)
    assert back.seed == 1 and back.horizon == 2
