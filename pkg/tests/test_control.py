import math

import numpy as np
import pytest

from anytime_codes.channel import ChannelModel
from anytime_codes.code import CodeParams, sample_tz
from anytime_codes.control import (
    SUP_CAP,
    PlantParams,
    QuantizerConfig,
    closed_loop_sim,
    default_delta,
    dequantize,
    open_loop_sim,
    performance_curve,
    quantize,
    random_walk_demo,
    sizing,
)

SECTION6 = PlantParams(2.0, 60.0, 2.0)


def test_sizing_section_six():
    cfg = sizing(2, 60, 2, 2)
    assert (cfg.L, cfg.k) == (35, 6)
    assert sizing(2, 60, 2, 8).k == 4
    assert sizing(2, 0, 0, 1).L == 4
    with pytest.raises(ValueError):
        sizing(2, 60, 2, 1.5)


def test_default_delta_fits_k():
    for k in (3, 4, 5, 6):
        d = default_delta(2, 60, 2, k)
        assert sizing(2, 60, 2, d).k <= k
    assert default_delta(2, 60, 2, 6) == 2.0
    assert default_delta(2, 60, 2, 3) == 15.5
    with pytest.raises(ValueError):
        default_delta(2, 60, 2, 2)


def test_quantizer_geometry():
    cfg = QuantizerConfig(2.0, 35, 6)
    assert quantize(0.0, cfg) == (17, False)
    assert dequantize(17, cfg) == 0.0
    assert quantize(34.9, cfg) == (34, False)
    assert quantize(-35.0, cfg) == (0, False)
    assert quantize(40.0, cfg) == (34, True)
    assert quantize(-40.0, cfg) == (0, True)
    for y in np.linspace(-34.99, 34.99, 777):
        label, _ = quantize(float(y), cfg)
        assert abs(dequantize(label, cfg) - y) <= 1.0


def test_lattice_labels_wrap_and_resolve_near_prediction():
    cfg = QuantizerConfig(2.0, 35, 6, "lattice")
    for y in (-200.3, -36.0, 0.5, 40.0, 123.4):
        label, outside = quantize(y, cfg)
        assert outside == (abs(y) > 35)
        assert 0 <= label < 35
        # any prediction within half the label period picks the right bin
        for pred in (y - 30, y, y + 30):
            assert abs(dequantize(label, cfg, pred) - y) <= 1.0


def test_noiseless_loop_stays_at_zero():
    h = sample_tz(CodeParams(15, 6, 30), 0.5, 1)
    # odd L puts a bin center at zero
    trace = closed_loop_sim(PlantParams(2, 0, 0, x0=0.0), QuantizerConfig(1.0, 5, 6), h, ChannelModel.bec(0.0), 30, 0)
    assert np.all(trace.x == 0.0)
    assert np.all(trace.delay == 0)


def test_perfect_channel_bounds_and_deadbeat_identity():
    h = sample_tz(CodeParams(15, 6, 100), 0.5, 3)
    cfg = sizing(2, 60, 2, 2)
    for seed in range(100):
        plant = PlantParams(2, 60, 2, seed=seed)
        tr = closed_loop_sim(plant, cfg, h, ChannelModel.bec(0.0), 100, seed)
        assert tr.sup_abs_x <= cfg.half_range
        assert tr.clamped_count == 0
        assert np.all(np.abs(tr.x - tr.xhat) <= cfg.delta / 2 + plant.V / 2 + 1e-9)
        w = tr.x[1:] - 2 * tr.x[:-1] - tr.u[:-1]
        assert np.all(np.abs(w) <= plant.W / 2)
        np.testing.assert_allclose(tr.x[1:] - w, 2 * (tr.x[:-1] - tr.xhat[:-1]), atol=1e-9)


def test_labels_round_trip_on_perfect_channel():
    h = sample_tz(CodeParams(15, 6, 50), 0.5, 4)
    cfg = sizing(2, 60, 2, 2)
    tr = closed_loop_sim(PlantParams(2, 60, 2, seed=9), cfg, h, ChannelModel.bec(0.0), 50, 1)
    centers = np.array([dequantize(int(b), cfg) for b in tr.bin])
    np.testing.assert_allclose(centers, tr.xhat)


def test_trace_determinism_and_shape():
    h = sample_tz(CodeParams(15, 6, 60), 0.5, 5)
    cfg = sizing(2, 60, 2, 2)
    plant = PlantParams(2, 60, 2, seed=11)
    a = closed_loop_sim(plant, cfg, h, ChannelModel.bec(0.3), 60, 12)
    b = closed_loop_sim(plant, cfg, h, ChannelModel.bec(0.3), 60, 12)
    assert a.rows() == b.rows()
    assert len(a.rows()) == 60 and len(a.rows()[0]) == 8
    assert a.sup_abs_x == max(abs(r[1]) for r in a.rows())


def test_closed_loop_checks():
    h = sample_tz(CodeParams(15, 6, 20), 0.5, 5)
    cfg = sizing(2, 60, 2, 2)
    with pytest.raises(ValueError):
        closed_loop_sim(SECTION6, cfg, h, ChannelModel.bec(0.3), 21, 0)
    with pytest.raises(ValueError):
        closed_loop_sim(SECTION6, sizing(2, 60, 2, 8), h, ChannelModel.bec(0.3), 20, 0)
    with pytest.raises(ValueError):
        closed_loop_sim(SECTION6, cfg, h, ChannelModel.bsc(0.1), 20, 0)
    with pytest.raises(ValueError):
        PlantParams(1.0, 1, 1)


def test_open_loop():
    tr = open_loop_sim(PlantParams(2, 0, 0, x0=1.0), 40)
    assert np.array_equal(tr.x, 2.0 ** np.arange(40))
    big = open_loop_sim(PlantParams(2, 60, 2, seed=3), 100)
    assert 80 < math.log2(big.sup_abs_x) < 110


def test_open_loop_dominates_closed_loop():
    h = sample_tz(CodeParams(15, 6, 100), 0.5, 8)
    cfg = sizing(2, 60, 2, 2)
    for seed in range(5):
        plant = PlantParams(2, 60, 2, seed=seed)
        assert open_loop_sim(plant, 100).sup_abs_x >= closed_loop_sim(plant, cfg, h, ChannelModel.bec(0.3), 100, seed).sup_abs_x


def test_random_walk_perfect_channel():
    h = sample_tz(CodeParams(3, 1, 50), 0.5, 1)
    res = random_walk_demo(1.2, h, ChannelModel.bec(0.0), 50, 0)
    assert np.all(res.squared_error == 0)


def test_random_walk_error_by_brute_force():
    """Exact rational arithmetic on the unresolved tail of the sum."""
    from fractions import Fraction

    h = sample_tz(CodeParams(3, 1, 40), 0.5, 2)
    lam = Fraction(3, 2)
    res = random_walk_demo(1.5, h, ChannelModel.bec(0.4), 40, 5)
    w, delays = res.w[0], res.delays[0]
    for t in range(40):
        r = t + 1 - delays[t]
        x = sum(lam ** (t - j) * int(w[j]) for j in range(t + 1))
        xhat = sum(lam ** (t - j) * int(w[j]) for j in range(r))
        assert res.squared_error[t] == pytest.approx(float((x - xhat) ** 2), rel=1e-12, abs=1e-12)


def test_random_walk_good_vs_bad_code():
    good = sample_tz(CodeParams(3, 1, 600), 0.5, 3)
    small = random_walk_demo(1.2, good, ChannelModel.bec(0.2), 600, 1, trials=4)
    first, second = small.squared_error[:300].mean(), small.squared_error[300:].mean()
    assert second < 3 * first + 1
    # rate 1/2 at erasure rate 0.6 is above capacity, so delays grow without bound
    bad = sample_tz(CodeParams(2, 1, 300), 0.5, 3)
    large = random_walk_demo(4.0, bad, ChannelModel.bec(0.6), 300, 1, trials=2)
    assert large.running_mean[-1] > 1e6
    with pytest.raises(ValueError):
        random_walk_demo(1.2, sample_tz(CodeParams(4, 2, 5), 0.5, 0), ChannelModel.bec(0.1), 5, 0)


def test_performance_curve_small():
    cur = performance_curve([3, 6], SECTION6, ChannelModel.bec(0.3), 15, 40, 12, 5)
    assert set(cur) == {3, 6}
    for v in cur.values():
        assert len(v) == 12 and np.all(np.diff(v) >= 0) and v.max() <= SUP_CAP
    again = performance_curve([3, 6], SECTION6, ChannelModel.bec(0.3), 15, 40, 12, 5)
    assert all(np.array_equal(cur[k], again[k]) for k in cur)
