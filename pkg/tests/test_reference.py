import math

import numpy as np
import pytest

from ou_selfnorm.errors import DomainError
from ou_selfnorm.functionals import rows_extremum
from ou_selfnorm.reference import (
    ou_cov,
    sample_bm,
    sample_bm_rows,
    sample_ou,
    sample_ou_rows,
    uniform_grid,
)
from ou_selfnorm.sampling import RngStream
from ou_selfnorm.stats import KS_C_5PCT, cov_report, ks_two_sample

N = 10**5


def test_ou_cov_closed_form():
    assert ou_cov(0.3, 0.3) == 1.0
    assert ou_cov(0.0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert ou_cov(1.0, 0.0) == ou_cov(0.0, 1.0)


def test_single_point_grids():
    assert sample_bm([0.0], RngStream(1)).values.tolist() == [0.0]
    assert sample_ou([2.0], RngStream(1)).values.shape == (1,)


def test_uniform_grid_includes_stop():
    g = uniform_grid(0.0, 1.0, 0.005)
    assert len(g) == 201 and g[0] == 0.0 and g[-1] == 1.0
    with pytest.raises(DomainError):
        uniform_grid(0.0, 1.0, 0.0)


def test_ou_lag_one_correlation():
    rows = sample_ou_rows([0.0, 1.0], RngStream(2), N)
    r = np.corrcoef(rows[:, 0], rows[:, 1])[0, 1]
    rho = math.exp(-0.5)
    assert abs(r - rho) <= 4 * (1 - rho**2) / math.sqrt(N)


def test_ou_stationary_variance_everywhere():
    g = uniform_grid(0.0, 2.0, 0.25)
    rows = sample_ou_rows(g, RngStream(3), N)
    var = rows.var(axis=0, ddof=1)
    assert np.all(np.abs(var - 1) <= 4 * math.sqrt(2 / N))


def test_ou_autocorrelation_is_exact_ar1():
    step = 0.1
    g = uniform_grid(0.0, 1.0, step)
    rows = sample_ou_rows(g, RngStream(4), N)
    rho = math.exp(-step / 2)
    for k in (1, 3, 10):
        r = np.corrcoef(rows[:, 0], rows[:, k])[0, 1]
        assert abs(r - rho**k) <= 4 * (1 - rho ** (2 * k)) / math.sqrt(N), k


def test_ou_irregular_grid_covariance():
    g = [0.0, 0.01, 0.5, 2 * math.log(2)]
    rows = sample_ou_rows(g, RngStream(5), N)
    rep = cov_report(rows[:, 0], rows[:, 3], 0.0, g[3])
    assert rep.target == pytest.approx(0.5)
    assert rep.pass_


def test_grid_refinement_consistency():
    n = 5000
    coarse = sample_ou_rows(uniform_grid(0, 1, 0.01), RngStream(6, 0), n)
    fine = sample_ou_rows(uniform_grid(0, 1, 0.005), RngStream(6, 1), n)
    a = rows_extremum(uniform_grid(0, 1, 0.01), coarse, 0, 1, "max")
    b = rows_extremum(uniform_grid(0, 1, 0.005), fine, 0, 1, "max")
    crit_1pct = 1.628 * math.sqrt(2 / n)
    assert ks_two_sample(a, b).statistic < crit_1pct


def test_bm_variance_and_covariance():
    rows = sample_bm_rows([0.0, 0.5, 1.0], RngStream(7), N)
    assert np.all(rows[:, 0] == 0.0)
    assert abs(rows[:, 2].var(ddof=1) - 1) <= 4 * math.sqrt(2 / N)
    c = np.cov(rows[:, 1], rows[:, 2])[0, 1]
    prod = (rows[:, 1] - rows[:, 1].mean()) * (rows[:, 2] - rows[:, 2].mean())
    assert abs(c - 0.5) <= 4 * prod.std(ddof=1) / math.sqrt(N)


def test_bm_requires_zero_start():
    with pytest.raises(DomainError):
        sample_bm([0.1, 1.0], RngStream(1))


@pytest.mark.parametrize("grid", [[], [0.0, 0.0], [1.0, 0.5]])
def test_bad_grids(grid):
    with pytest.raises(DomainError):
        sample_ou(grid, RngStream(1))


def test_ou_reproducible():
    g = uniform_grid(0, 1, 0.1)
    assert sample_ou(g, RngStream(9, 9)).values.tobytes() == sample_ou(g, RngStream(9, 9)).values.tobytes()


def test_ks_critical_constant():
    assert KS_C_5PCT == 1.358
