import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import REFERENCE_STARTS, two_flow_state
from routerplace import (
    AnnealingPlacement,
    ChannelParams,
    DistributedPlacement,
    EndpointMobility,
    MobilityModel,
    ValidationError,
    global_cost,
)


@pytest.fixture
def start():
    return two_flow_state(REFERENCE_STARTS[1.0])


def quick_annealer(net, **kw):
    return AnnealingPlacement(flows=net, channel=ChannelParams(p_n=1.0), iterations=2000, alpha=0.95,
                              random_state=0, **kw)


def test_params_round_trip(two_flow):
    est = quick_annealer(two_flow)
    params = est.get_params()
    assert params["iterations"] == 2000 and params["flows"] is two_flow
    est.set_params(t0=0.5)
    assert est.t0 == 0.5
    c = clone(est)
    assert c.get_params()["t0"] == 0.5 and not hasattr(c, "state_")


def test_unfitted_raises(two_flow, start):
    with pytest.raises(NotFittedError):
        quick_annealer(two_flow).predict()
    with pytest.raises(NotFittedError):
        DistributedPlacement(flows=two_flow).transform(start)


def test_annealing_fit_attributes(two_flow, start, unit_channel):
    est = quick_annealer(two_flow).fit(start)
    assert est.cost_ == pytest.approx(global_cost(est.state_, unit_channel, two_flow))
    assert est.cost_ > global_cost(start, unit_channel, two_flow)
    assert est.robot_positions_.shape == (4, 2)
    assert est.link_sinrs_.shape == (6,)
    assert est.n_iter_ == 2000
    assert est.score() == est.cost_


def test_array_and_state_inputs_agree(two_flow, start):
    a = quick_annealer(two_flow).fit(start)
    b = quick_annealer(two_flow).fit(np.array(start.positions))
    np.testing.assert_array_equal(a.positions_, b.positions_)


def test_transform_keeps_endpoints_of_new_layout(two_flow, start):
    est = quick_annealer(two_flow).fit(start)
    moved = np.array(start.positions)
    moved[two_flow.index[1]] = (-9.0, 1.0)
    out = est.transform(moved)
    assert tuple(out[two_flow.index[1]]) == (-9.0, 1.0)
    for r in two_flow.robot_ids:
        assert tuple(out[two_flow.index[r]]) == tuple(est.positions_[two_flow.index[r]])


def test_fit_transform_returns_fitted_layout(two_flow, start):
    est = quick_annealer(two_flow)
    np.testing.assert_array_equal(est.fit_transform(start), est.positions_)


def test_predict_and_score_on_stacks(two_flow, start):
    est = quick_annealer(two_flow).fit(start)
    stack = np.stack([start.positions, est.positions_])
    sinrs = est.predict(stack)
    assert sinrs.shape == (2, 6)
    np.testing.assert_allclose(sinrs[1], est.link_sinrs_, rtol=1e-12)
    scores = est.score(stack)
    assert scores[1] == pytest.approx(est.cost_) and scores[0] < scores[1]


@pytest.mark.parametrize("bad", [np.zeros((7, 2)), np.zeros((8, 3)), np.full((8, 2), np.nan)])
def test_bad_layouts_rejected(two_flow, bad):
    with pytest.raises(ValidationError):
        quick_annealer(two_flow).fit(bad)


def test_missing_topology():
    with pytest.raises(ValidationError):
        AnnealingPlacement().fit(np.zeros((2, 2)))


def test_bad_channel(two_flow, start):
    with pytest.raises(ValidationError):
        AnnealingPlacement(flows=two_flow, channel={"p_n": 1}).fit(start)


def test_distributed_fit(two_flow, start, unit_channel):
    est = DistributedPlacement(flows=two_flow, channel=unit_channel).fit(start)
    assert est.stop_reason_ in ("converged", "cycle")
    assert est.cost_ > global_cost(start, unit_channel, two_flow)
    assert est.n_iter_ == len(est.trace_) - 1


def test_distributed_random_state_overrides_mobility_seed(two_flow, start, unit_channel):
    mob = MobilityModel({1: EndpointMobility("random_walk", 0.3)}, stop_iteration=20, seed=1)
    kw = dict(flows=two_flow, channel=unit_channel, mobility=mob)
    a = DistributedPlacement(**kw, random_state=5).fit(start)
    b = DistributedPlacement(**kw, random_state=5).fit(start)
    c = DistributedPlacement(**kw, random_state=6).fit(start)
    np.testing.assert_array_equal(a.positions_, b.positions_)
    assert not np.array_equal(a.positions_, c.positions_)


def test_distributed_rejects_bad_mobility(two_flow, start):
    with pytest.raises(ValidationError):
        DistributedPlacement(flows=two_flow, mobility={"1": "walk"}).fit(start)
