"""Flow topology, interference sets and the max-min SINR objective.

A :class:`Network` is the immutable, compiled form of a list of
:class:`FlowSpec` objects. It precomputes the link list and the interferer
mask so that the vectorized evaluators (:func:`link_sinrs`,
:func:`flow_cost`, :func:`global_cost`) are cheap enough to sit inside the
optimizer loops. :func:`link_sinr_in_state` is the scalar, composable route
through :func:`routerplace.channel.link_sinr`; both routes agree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import ChannelParams, Position, UndefinedSinrError, link_sinr
from .validation import ValidationError, check_count, check_points


class NodeRole(enum.Enum):
    TRANSMITTER = "transmitter"
    RECEIVER = "receiver"
    ROBOT = "robot"

    @property
    def transmits(self) -> bool:
        return self is not NodeRole.RECEIVER


@dataclass(frozen=True)
class FlowSpec:
    """One transmitter/receiver pair and its ordered chain of robots."""

    flow_id: int
    tx: int
    rx: int
    robots: tuple[int, ...] = ()
    tx_mobile: bool = False
    rx_mobile: bool = False

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(int(r) for r in self.robots))
        nodes = self.nodes
        if len(set(nodes)) != len(nodes):
            raise ValidationError(f"flows[{self.flow_id}]", f"node ids repeat within the flow: {nodes}")

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.tx, *self.robots, self.rx)


@dataclass(frozen=True)
class Link:
    flow_id: int
    index: int  # 1-based, counted from the flow's transmitter
    tx_node: int
    rx_node: int


def build_links(flow: FlowSpec) -> list[Link]:
    nodes = flow.nodes
    return [
        Link(flow.flow_id, j + 1, nodes[j], nodes[j + 1])
        for j in range(len(nodes) - 1)
    ]


def node_roles(flows: Sequence[FlowSpec]) -> dict[int, NodeRole]:
    roles: dict[int, NodeRole] = {}
    for flow in flows:
        for nid, role in [(flow.tx, NodeRole.TRANSMITTER), (flow.rx, NodeRole.RECEIVER)] + [
            (r, NodeRole.ROBOT) for r in flow.robots
        ]:
            if nid in roles:
                raise ValidationError("flows", f"node {nid} appears in more than one place")
            roles[nid] = role
    return roles


def interferers(link: Link, flows) -> frozenset[int]:
    """Every transmitting node except the link's own two endpoints."""
    flows = flows.flows if isinstance(flows, Network) else flows
    roles = node_roles(flows)
    return frozenset(
        nid
        for nid, role in roles.items()
        if role.transmits and nid not in (link.tx_node, link.rx_node)
    )


class Network:
    """Compiled topology over a fixed set of flows.

    Node ids are kept in ascending order; every :class:`NetworkState` used
    with this network stores its positions in that order.
    """

    def __init__(self, flows: Sequence[FlowSpec]):
        flows = tuple(sorted(flows, key=lambda f: f.flow_id))
        if not flows:
            raise ValidationError("flows", "at least one flow is required")
        flow_ids = [f.flow_id for f in flows]
        if len(set(flow_ids)) != len(flow_ids):
            raise ValidationError("flows", f"duplicate flow ids: {flow_ids}")
        self.flows = flows
        self.roles = node_roles(flows)
        self.node_ids = tuple(sorted(self.roles))
        self.index = {nid: k for k, nid in enumerate(self.node_ids)}
        self.robot_ids = tuple(n for n in self.node_ids if self.roles[n] is NodeRole.ROBOT)
        self.links = tuple(link for f in flows for link in build_links(f))

        self._flow_pos = {f.flow_id: k for k, f in enumerate(flows)}
        self.link_tx = np.array([self.index[l.tx_node] for l in self.links])
        self.link_rx = np.array([self.index[l.rx_node] for l in self.links])
        self.link_flow = np.array([self._flow_pos[l.flow_id] for l in self.links])
        transmits = np.array([self.roles[n].transmits for n in self.node_ids])
        mask = np.tile(transmits, (len(self.links), 1))
        mask[np.arange(len(self.links)), self.link_tx] = False
        mask[np.arange(len(self.links)), self.link_rx] = False
        self.interference_mask = mask
        self.transmit_mask = transmits
        bounds = np.cumsum([0] + [len(f.robots) + 1 for f in flows])
        self._flow_slices = {
            f.flow_id: slice(bounds[k], bounds[k + 1]) for k, f in enumerate(flows)
        }

    def __repr__(self):
        return f"Network(n_flows={len(self.flows)}, n_nodes={len(self.node_ids)})"

    def flow(self, flow_id: int) -> FlowSpec:
        try:
            return self.flows[self._flow_pos[flow_id]]
        except KeyError:
            raise ValidationError("flow_id", f"no flow with id {flow_id}") from None

    def flow_links(self, flow_id: int) -> tuple[Link, ...]:
        return self.links[self.flow_slice(flow_id)]

    def flow_slice(self, flow_id: int) -> slice:
        self.flow(flow_id)
        return self._flow_slices[flow_id]

    def flow_of(self, node_id: int) -> int:
        for f in self.flows:
            if node_id in f.nodes:
                return f.flow_id
        raise ValidationError("node_id", f"unknown node {node_id}")

    def powers(self, params: ChannelParams) -> np.ndarray:
        return np.array(
            [
                params.p_t if self.roles[n] is NodeRole.TRANSMITTER
                else params.p_m if self.roles[n] is NodeRole.ROBOT
                else 0.0
                for n in self.node_ids
            ]
        )


def as_network(flows) -> Network:
    return flows if isinstance(flows, Network) else Network(flows)


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Positions of every node at one instant.

    ``positions`` is a read-only ``(n_nodes, 2)`` array ordered like
    ``node_ids`` (ascending).
    """

    node_ids: tuple[int, ...]
    positions: np.ndarray
    iteration: int = 0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(int(n) for n in self.node_ids)
        if list(ids) != sorted(set(ids)):
            raise ValidationError("node_ids", "must be unique and ascending")
        pos = check_points(self.positions, "positions", n=len(ids)).copy()
        pos.setflags(write=False)
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "iteration", check_count(self.iteration, "iteration"))
        object.__setattr__(self, "_index", {n: k for k, n in enumerate(ids)})

    @classmethod
    def from_mapping(cls, positions: Mapping[int, tuple], iteration: int = 0) -> "NetworkState":
        ids = sorted(positions)
        return cls(tuple(ids), [tuple(positions[n]) for n in ids], iteration)

    def position(self, node_id: int) -> Position:
        x, y = self.positions[self._index[node_id]]
        return Position(float(x), float(y))

    def as_dict(self) -> dict[int, Position]:
        return {n: self.position(n) for n in self.node_ids}

    def with_positions(self, updates: Mapping[int, tuple], iteration: int | None = None) -> "NetworkState":
        pos = self.positions.copy()
        for nid, p in updates.items():
            pos[self._index[nid]] = p
        return NetworkState(self.node_ids, pos, self.iteration if iteration is None else iteration)

    def robot_positions(self, network: Network) -> np.ndarray:
        """The optimization variable: robot coordinates, ascending robot id."""
        return self.positions[[self._index[r] for r in network.robot_ids]]

    def __eq__(self, other):
        if not isinstance(other, NetworkState):
            return NotImplemented
        return (
            self.node_ids == other.node_ids
            and self.iteration == other.iteration
            and np.array_equal(self.positions, other.positions)
        )

    __hash__ = None


def check_state(state: NetworkState, network: Network) -> NetworkState:
    if not isinstance(state, NetworkState):
        raise ValidationError("state", f"expected NetworkState, got {type(state).__name__}")
    if state.node_ids != network.node_ids:
        missing = set(network.node_ids) - set(state.node_ids)
        raise ValidationError(
            "state", f"node ids do not match the network (missing {sorted(missing)})"
        )
    return state


def sinr_batch(
    positions: np.ndarray,
    network: Network,
    params: ChannelParams,
    links: slice | np.ndarray = slice(None),
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Vectorized SINR for a stack of layouts.

    ``positions`` has shape ``(..., n_nodes, 2)``; the result has shape
    ``(..., n_selected_links)``.
    """
    powers = network.powers(params)
    tx = network.link_tx[links]
    rx = network.link_rx[links]
    mask = network.interference_mask[links]
    rx_pos = positions[..., rx, :]  # (..., L, 2)
    diff = positions[..., None, :, :] - rx_pos[..., :, None, :]  # (..., L, n, 2)
    dist = np.hypot(diff[..., 0], diff[..., 1])
    gain = np.maximum(dist, params.min_distance) ** (-params.eta)
    if params.fading_sigma > 0:
        if rng is None:
            raise ValueError("fading_sigma > 0 requires a seeded rng")
        gain = gain * 10.0 ** (rng.normal(0.0, params.fading_sigma, size=gain.shape) / 10.0)
    received = gain * powers
    signal = np.take_along_axis(
        received, np.broadcast_to(tx[:, None], received.shape[:-1] + (1,)), axis=-1
    )[..., 0]
    interference = np.where(mask, received, 0.0).sum(axis=-1)
    denominator = interference + params.p_n
    if np.any(denominator == 0.0):
        raise UndefinedSinrError("a link has no interference and zero noise power")
    return signal / denominator


def link_sinrs(state: NetworkState, params: ChannelParams, flows, rng=None) -> np.ndarray:
    """SINR of every link, in ``network.links`` order."""
    network = as_network(flows)
    check_state(state, network)
    return sinr_batch(state.positions, network, params, rng=rng)


def link_sinr_in_state(link: Link, state: NetworkState, params: ChannelParams, flows, rng=None) -> float:
    network = as_network(flows)
    check_state(state, network)
    powers = dict(zip(network.node_ids, network.powers(params)))
    others = sorted(interferers(link, network.flows))
    return link_sinr(
        state.position(link.tx_node),
        state.position(link.rx_node),
        powers[link.tx_node],
        [(state.position(k), powers[k]) for k in others],
        params,
        rng=rng,
    )


def flow_cost(flow_id: int, state: NetworkState, params: ChannelParams, flows) -> float:
    """Minimum link SINR within one flow."""
    network = as_network(flows)
    check_state(state, network)
    sl = network.flow_slice(flow_id)
    return float(sinr_batch(state.positions, network, params, links=sl).min())


def flow_costs(state: NetworkState, params: ChannelParams, flows) -> np.ndarray:
    """Per-flow minimum SINR, ascending flow id."""
    network = as_network(flows)
    sinrs = link_sinrs(state, params, network)
    return np.array([sinrs[network.flow_slice(f.flow_id)].min() for f in network.flows])


def global_cost(state: NetworkState, params: ChannelParams, flows) -> float:
    """The maximized objective: minimum SINR over every link of every flow."""
    return float(link_sinrs(state, params, flows).min())


def bottleneck_links(
    flow_id: int, state: NetworkState, params: ChannelParams, flows, sinrs=None
) -> tuple[Link, Link | None]:
    """Lowest- and second-lowest-SINR links of a flow, ties to the lower index.

    ``sinrs`` may carry a precomputed full link-SINR vector (a STAT snapshot).
    """
    network = as_network(flows)
    sl = network.flow_slice(flow_id)
    if sinrs is None:
        sinrs = link_sinrs(state, params, network)
    values = np.asarray(sinrs)[sl]
    order = np.argsort(values, kind="stable")
    links = network.links[sl]
    pseudo = links[order[1]] if len(order) > 1 else None
    return links[order[0]], pseudo
