import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from routerplace import ChannelParams, UndefinedSinrError, ValidationError, distance, link_sinr, received_power

coords = st.floats(-1e3, 1e3, allow_nan=False)
points = st.tuples(coords, coords)


@pytest.mark.parametrize(
    "p, q, expected",
    [((0, 0), (3, 4), 5.0), ((1, 1), (1, 1), 0.0), ((-10, 0), (10, 0), 20.0)],
)
def test_distance(p, q, expected):
    assert distance(p, q) == expected


@pytest.mark.parametrize("bad", [(math.nan, 0), (0, math.inf), (1,), "ab"])
def test_distance_rejects_non_finite(bad):
    with pytest.raises(ValidationError):
        distance(bad, (0, 0))


@given(points, points, points)
def test_distance_is_a_metric(a, b, c):
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


@pytest.mark.parametrize(
    "p, d, eta, expected", [(1, 1, 2, 1.0), (1, 10, 2, 0.01), (2, 2, 3, 0.25)]
)
def test_received_power(p, d, eta, expected):
    assert received_power(p, d, ChannelParams(eta=eta)) == pytest.approx(expected, rel=1e-15)


def test_received_power_clamps_small_distances():
    params = ChannelParams(min_distance=0.1)
    assert received_power(1.0, 0.0, params) == received_power(1.0, 0.1, params) == pytest.approx(100.0)


@given(st.floats(0.1, 100), st.floats(0.01, 10), st.floats(0.5, 4))
def test_received_power_times_d_eta_is_power(d, p, eta):
    assert received_power(p, d, ChannelParams(eta=eta)) * d**eta == pytest.approx(p, rel=1e-12)


def test_no_interference_case():
    assert link_sinr((0, 0), (0, 2), 1.0, [], ChannelParams(p_n=0.05)) == pytest.approx(5.0, rel=1e-12)


def test_single_interferer_matches_hand_evaluation():
    # signal 1 * 10^-2, interference 1 * 10^-2 from (0, 10), noise 0.1
    value = link_sinr((-10, 0), (0, 0), 1.0, [((0, 10), 1.0)], ChannelParams(p_n=0.1))
    assert value == pytest.approx(0.01 / (0.01 + 0.1), rel=1e-12)
    assert value == pytest.approx(0.0909090909, rel=1e-9)


def test_interferer_order_is_irrelevant():
    params = ChannelParams(p_n=0.1)
    a, b = ((3, 4), 1.0), ((-3, 4), 1.0)
    assert link_sinr((0, -5), (0, 0), 1.0, [a, b], params) == link_sinr((0, -5), (0, 0), 1.0, [b, a], params)


def test_zero_noise_without_interferers_raises():
    with pytest.raises(UndefinedSinrError):
        link_sinr((0, 0), (1, 0), 1.0, [], ChannelParams(p_n=0.0))


def test_zero_noise_with_interferers_is_finite():
    v = link_sinr((0, 0), (1, 0), 1.0, [((5, 0), 1.0)], ChannelParams(p_n=0.0))
    assert v == pytest.approx(16.0)


@given(st.floats(1e-3, 1e3), points, points, points)
def test_common_power_scaling_leaves_sinr_unchanged(lam, tx, rx, other):
    base = ChannelParams(p_t=1.0, p_m=0.5, p_n=0.2)
    scaled = ChannelParams(p_t=lam, p_m=0.5 * lam, p_n=0.2 * lam)
    v1 = link_sinr(tx, rx, 1.0, [(other, 0.5)], base)
    v2 = link_sinr(tx, rx, lam, [(other, 0.5 * lam)], scaled)
    assert v2 == pytest.approx(v1, rel=1e-12)


@given(st.floats(0.01, 10), st.floats(0.01, 10), points)
def test_sinr_decreases_in_interferer_power_and_noise(p, extra, other):
    params = ChannelParams(p_n=0.1)
    louder = ChannelParams(p_n=0.1 + extra)
    v = link_sinr((0, 0), (1, 0), 1.0, [(other, p)], params)
    assert link_sinr((0, 0), (1, 0), 1.0, [(other, p + extra)], params) < v
    assert link_sinr((0, 0), (1, 0), 1.0, [(other, p)], louder) < v


@pytest.mark.parametrize(
    "kwargs", [{"eta": 0}, {"p_t": -1}, {"p_m": 0}, {"p_n": -0.1}, {"fading_sigma": -1}, {"min_distance": 0}, {"eta": math.nan}]
)
def test_channel_params_validation(kwargs):
    with pytest.raises(ValidationError):
        ChannelParams(**kwargs)


def test_fading_is_seeded_and_deterministic():
    params = ChannelParams(p_n=0.1, fading_sigma=4.0)
    args = ((0, 0), (3, 0), 1.0, [((0, 5), 1.0), ((5, 5), 1.0)], params)
    a = link_sinr(*args, rng=np.random.default_rng(3))
    b = link_sinr(*args, rng=np.random.default_rng(3))
    c = link_sinr(*args, rng=np.random.default_rng(4))
    assert a == b
    assert a != c
    with pytest.raises(ValueError):
        link_sinr(*args)
