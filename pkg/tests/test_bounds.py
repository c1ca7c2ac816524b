import math
import time

import numpy as np
import pytest

from anytime_codes.bounds import (
    R_GRID_POINTS,
    binary_entropy,
    epsilon_star,
    inv_entropy_smaller_root,
    kl,
    region_sweep,
    sahai_check,
    stabilizable_lambda_max,
    theta_star,
    tighter_bsc_thresholds,
    union_bound_thresholds,
)
from anytime_codes.channel import ChannelModel


def test_entropy_kernels():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))
    for x in np.linspace(0.01, 0.99, 99):
        assert kl(float(x), float(x)) == pytest.approx(0.0, abs=1e-15)
    assert kl(0.0, 0.5) == kl(1.0, 0.5) == 1.0
    assert kl(0.1, 0.3) > 0
    with pytest.raises(ValueError):
        binary_entropy(1.5)
    with pytest.raises(ValueError):
        kl(0.2, 0.0)


def test_kl_by_summation():
    for x, y in ((0.1, 0.3), (0.7, 0.2), (0.0, 0.4)):
        terms = [a * math.log2(a / b) for a, b in ((x, y), (1 - x, 1 - y)) if a > 0]
        assert kl(x, y) == pytest.approx(sum(terms))


def test_inverse_entropy_round_trip():
    ys = np.linspace(0.0, 1.0, 1000)
    errs = [abs(binary_entropy(inv_entropy_smaller_root(float(y))) - y) for y in ys]
    assert max(errs) < 1e-9
    assert all(0.0 <= inv_entropy_smaller_root(float(y)) <= 0.5 for y in ys)
    assert inv_entropy_smaller_root(1.0) == 0.5
    assert inv_entropy_smaller_root(0.6) == pytest.approx(0.14610, abs=1e-5)
    assert binary_entropy(inv_entropy_smaller_root(0.6)) == pytest.approx(0.6, abs=1e-10)


def test_inverse_entropy_is_smaller_root():
    for y in (0.1, 0.5, 0.9):
        x = inv_entropy_smaller_root(y)
        assert binary_entropy(1.0 - x) == pytest.approx(y)
        assert x <= 1.0 - x


def _theta_by_grid(R):
    x = np.linspace(1e-7, 1.0, 2_000_001)
    h = -x * np.log2(x) - (1 - x) * np.log2(np.clip(1 - x, 1e-300, None))
    return float(np.max((h - (1 - R)) / x))


@pytest.mark.parametrize("R", [0.2, 0.4, 0.6])
def test_theta_star_grid_oracle(R):
    assert abs(theta_star(R) - _theta_by_grid(R)) < 1e-6


def test_theta_star_values():
    assert theta_star(0.5) == pytest.approx(1.27155, abs=1e-5)
    assert theta_star(1e-9) == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        theta_star(1.0)


def test_union_thresholds_section_six():
    th = union_bound_thresholds(0.3, 0.5)
    assert abs(th.R_max - 0.621488) < 1e-4
    assert th.R_max == pytest.approx(1 - math.log2(1.3))
    assert th.beta_of_R(0.4) == pytest.approx(0.11419, abs=1e-4)
    assert th.provenance == "union-bound"


def test_union_thresholds_useless_channel():
    assert union_bound_thresholds(1 - 1e-12, 0.5).R_max == pytest.approx(0.0, abs=1e-9)


def test_union_beta_shape():
    for zeta, p in ((0.3, 0.5), (0.1, 0.3), (0.6, 0.7)):
        th = union_bound_thresholds(zeta, p)
        rates = np.linspace(0.0, th.R_max, 200)[1:-1]
        betas = [th.beta_of_R(float(r)) for r in rates]
        assert all(b > 0 for b in betas)
        assert all(b2 < b1 for b1, b2 in zip(betas, betas[1:]))
        assert th.beta_of_R(th.R_max - 1e-9) < 1e-6
        assert th.beta_of_R(th.R_max + 0.01) == 0.0
        # the two Corollary conditions meet at R_max
        inner = math.log2(1 / zeta) + math.log2((1 - p) ** (-(1 - th.R_max)) - 1)
        assert inner == pytest.approx(0.0, abs=1e-9)


def test_theta_star_below_log_zeta_iff_rate_below_threshold():
    for zeta in (0.1, 0.3, 0.7):
        r_max = 1 - math.log2(1 + zeta)
        for R in np.linspace(0.01, 0.99, 99):
            if abs(R - r_max) < 1e-9:
                continue
            assert (theta_star(float(R)) < math.log2(1 / zeta)) == (R < r_max)


def test_tighter_bsc_values():
    th = tighter_bsc_thresholds(0.05)
    assert th.R_max == pytest.approx(0.53100, abs=1e-5)
    assert th.provenance == "tighter-BSC"
    rates = np.linspace(0, th.R_max, 50)[1:-1]
    betas = [th.beta_of_R(float(r)) for r in rates]
    assert all(b > 0 for b in betas) and all(b2 < b1 for b1, b2 in zip(betas, betas[1:]))
    with pytest.raises(ValueError):
        tighter_bsc_thresholds(0.3)


def test_epsilon_star():
    start = time.perf_counter()
    e = epsilon_star()
    assert time.perf_counter() - start < 1.0
    assert abs(e - 0.0753) < 5e-4
    lhs = 1 - binary_entropy(2 * e)
    rhs = 1 - 2 * math.log2(math.sqrt(e) + math.sqrt(1 - e))
    assert abs(lhs - rhs) < 1e-6


def test_tighter_rate_wins_exactly_below_epsilon_star():
    e_star = epsilon_star()
    for eps in np.linspace(0.005, 0.2, 80):
        eps = float(eps)
        if abs(eps - e_star) < 1e-6:
            continue
        zeta = 2 * math.sqrt(eps * (1 - eps))
        wins = tighter_bsc_thresholds(eps).R_max > union_bound_thresholds(zeta, 0.5).R_max
        assert wins == (eps < e_star)


def test_sahai_check():
    assert sahai_check(2, 1, 15, 0.4, 0.07)
    assert not sahai_check(2, 1, 15, 0.05, 0.07)
    assert not sahai_check(2, 1, 15, 0.4, 1 / 15)
    assert not sahai_check(2, 2, 15, 0.4, 0.1)
    assert sahai_check(-2, 1, 15, 0.4, 0.07)
    with pytest.raises(ValueError):
        sahai_check(1.0, 1, 15, 0.4, 0.07)


def test_region_bec_lambda_two_inside():
    pt = stabilizable_lambda_max(ChannelModel.bec(0.3), 0.5, 15, 1)
    assert 15 * math.log2(pt.lambda_max_nth_root) >= 1.0
    th = union_bound_thresholds(0.3)
    assert min(15 * 0.4, 15 * th.beta_of_R(0.4)) >= 1.0


def test_region_perfect_channel_limit():
    # beta grows only like log2(1/zeta), so the approach to 1 bit per use is slow
    vals = [stabilizable_lambda_max(ChannelModel.bec(10.0**-e), n=1, m=1).log2_lambda_max_per_use for e in (3, 9, 30, 100)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert 0.9 < vals[-1] < 1.0
    assert stabilizable_lambda_max(ChannelModel.bec(0.0)).lambda_max_nth_root == 2.0


@pytest.mark.parametrize("kind,grid", [("bec", np.linspace(0.01, 0.9, 40)), ("bsc", np.linspace(0.005, 0.45, 40))])
def test_region_monotone_in_noise(kind, grid):
    pts = region_sweep(kind, grid, n=15, m=2, npoints=128)
    vals = [pt.lambda_max_nth_root for pt in pts]
    assert all(v >= 1.0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_bsc_tighter_curve_continuous_at_crossover():
    e = epsilon_star()
    below = stabilizable_lambda_max(ChannelModel.bsc(e - 1e-7), n=1, m=2, use_tighter=True)
    above = stabilizable_lambda_max(ChannelModel.bsc(e + 1e-7), n=1, m=2, use_tighter=True)
    # one grid step in R moves the objective by at most R_max/(R_GRID_POINTS+1)
    assert abs(below.log2_lambda_max_per_use - above.log2_lambda_max_per_use) < 1.0 / R_GRID_POINTS
    for eps in (0.01, 0.05, 0.07):
        plain = stabilizable_lambda_max(ChannelModel.bsc(eps), m=2)
        tight = stabilizable_lambda_max(ChannelModel.bsc(eps), m=2, use_tighter=True)
        assert tight.lambda_max_nth_root >= plain.lambda_max_nth_root
