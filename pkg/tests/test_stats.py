import numpy as np
import pytest
from scipy import stats as sps

from planeseek.stats import chi2_cdf, chi2_ppf, chi2_sf, pearson


@pytest.mark.parametrize("dof", [1, 2, 3, 6, 10])
@pytest.mark.parametrize("p", [0.05, 0.5, 0.9, 0.95, 0.99])
def test_chi2_ppf_against_scipy(dof, p):
    assert chi2_ppf(p, dof) == pytest.approx(sps.chi2.ppf(p, dof), abs=1e-8)


def test_chi2_95_6dof_value():
    # the demonstration-filter threshold
    assert chi2_ppf(0.95, 6) == pytest.approx(12.591587243743977, abs=1e-3)


@pytest.mark.parametrize("x", [0.5, 2.0, 6.0, 12.0, 30.0])
def test_chi2_cdf_sf_against_scipy(x):
    for dof in (2, 6, 7):
        assert chi2_cdf(x, dof) == pytest.approx(sps.chi2.cdf(x, dof), abs=1e-10)
        assert chi2_sf(x, dof) == pytest.approx(sps.chi2.sf(x, dof), abs=1e-10)


def test_chi2_ppf_domain():
    with pytest.raises(ValueError):
        chi2_ppf(0.0, 6)
    with pytest.raises(ValueError):
        chi2_ppf(1.0, 6)


def test_pearson_perfect_and_degenerate():
    x = np.arange(10.0)
    r, flag = pearson(x, 2 * x + 1)
    assert r == pytest.approx(1.0)
    assert not flag
    r, flag = pearson(np.ones(10), x)
    assert r == 0.0
    assert flag


def test_pearson_matches_numpy():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=50), rng.normal(size=50)
    r, _ = pearson(x, y)
    assert r == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
