import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from routerplace import ChannelParams, FlowSpec, Network, NetworkState  # noqa: E402
from oracles import TWO_FLOW_ENDPOINTS  # noqa: E402

# Max-min optimum of the two-flow sample (unit powers, eta=2) per noise level,
# from oracles.maximin_two_flow with 40 SLSQP starts.
MAXIMIN_OPTIMUM = {
    0.6: 0.0327721,
    1.0: 0.0207149,
    2.0: 0.0107866,
    3.0: 0.00729136,
    4.0: 0.00550686,
    10.0: 0.00223086,
}

# Initial robot configurations (x2,y2), (x3,y3), (x6,y6), (x7,y7) of the reference rows.
REFERENCE_STARTS = {
    0.6: [(0, 0), (0, 2), (0, 0), (0.5, 0)],
    1.0: [(0, 0), (2, 0), (0, 0), (0, 0)],
    2.0: [(0, -1), (0, 1), (0, 0), (0, 0)],
    3.0: [(0, 0), (3, 0), (0, 1), (-1, 0)],
    4.0: [(0, 2), (0, 0), (0, 0), (-1, 0)],
    10.0: [(0, 0), (0, 0), (0, 0), (0, 0)],
}
REFERENCE_TARGET = {0.6: 0.0327, 1.0: 0.0200, 2.0: 0.0108, 3.0: 0.0073, 4.0: 0.0055, 10.0: 0.0022}


def two_flow_state(robots):
    pos = dict(TWO_FLOW_ENDPOINTS)
    pos.update(zip((2, 3, 6, 7), robots))
    return NetworkState.from_mapping(pos)


@pytest.fixture
def two_flow():
    return Network([FlowSpec(1, 1, 4, (2, 3)), FlowSpec(2, 5, 8, (6, 7))])


@pytest.fixture
def unit_channel():
    return ChannelParams(p_n=1.0)
