"""Decentralized placement control, simulated on a deterministic schedule.

Each iteration has two phases. In the first, every node measures the SINR of
its incoming link and shares it inside its flow, so each flow learns which of
its links are the bottleneck (lowest SINR) and the pseudo-bottleneck (second
lowest). In the second, robots at either end of those links try ``K``
equally spaced points on a circle of radius ``delta`` around themselves,
keeping the rest of the network frozen, and move to the point that
maximizes their flow's cost if that beats the current cost.

The exchange is modeled as an atomic snapshot taken at the start of each
iteration. Moves are applied one robot at a time (flows ascending, then node
id ascending), so later decisions see earlier moves.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .channel import ChannelParams, Position
from .network import (
    Link,
    Network,
    NetworkState,
    NodeRole,
    as_network,
    bottleneck_links,
    check_state,
    flow_costs,
    link_sinrs,
    sinr_batch,
)
from .validation import (
    ValidationError,
    check_count,
    check_finite,
    check_positive,
    check_random_state,
)


@dataclass(frozen=True)
class ControllerParams:
    """Tuning of the decentralized controller.

    ``cycle_window`` is how many past layouts are remembered for limit-cycle
    detection (0 disables it). Flows that keep undoing each other's moves
    revisit a layout within this window; the controller then idles as if
    converged.
    """

    delta: float = 0.25
    candidate_count: int = 36
    max_iterations: int = 2000
    change_threshold: float = 1e-6
    cycle_window: int = 64

    def __post_init__(self):
        check_positive(self.delta, "delta")
        check_count(self.candidate_count, "candidate_count", minimum=3)
        check_count(self.max_iterations, "max_iterations")
        check_positive(self.change_threshold, "change_threshold", allow_zero=True)
        check_count(self.cycle_window, "cycle_window")


@dataclass(frozen=True)
class SinrReport:
    flow_id: int
    link_index: int
    sinr: float
    reporter: int  # receiving node of the link, which measures it
    iteration: int


@dataclass(frozen=True)
class MoveDecision:
    """Outcome of one robot's decision; ``target is None`` means stay."""

    robot: int
    target: Position | None
    flow_cost: float

    @property
    def action(self) -> str:
        return "stay" if self.target is None else "move"


@dataclass(frozen=True)
class EndpointMobility:
    mode: str = "static"
    step: float = 0.2

    def __post_init__(self):
        if self.mode not in ("static", "random_walk"):
            raise ValidationError("mode", f"must be 'static' or 'random_walk', got {self.mode!r}")
        check_positive(self.step, "step", allow_zero=True)


@dataclass(frozen=True)
class MobilityModel:
    """Random-walk mobility for flow endpoints.

    Endpoints not listed in ``endpoints`` are static. Walks are active on
    iterations ``start_iteration <= k < stop_iteration`` (no upper bound when
    ``stop_iteration`` is None), every ``period`` iterations. ``bounds`` is
    ``(xmin, ymin, xmax, ymax)``.
    """

    endpoints: Mapping[int, EndpointMobility] = field(default_factory=dict)
    bounds: tuple[float, float, float, float] = (-12.0, -12.0, 12.0, 12.0)
    seed: int = 0
    start_iteration: int = 0
    stop_iteration: int | None = None
    period: int = 1

    def __post_init__(self):
        object.__setattr__(self, "endpoints", dict(sorted(self.endpoints.items())))
        xmin, ymin, xmax, ymax = (check_finite(b, "bounds") for b in self.bounds)
        if not (xmin <= xmax and ymin <= ymax):
            raise ValidationError("bounds", f"empty rectangle {self.bounds}")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        check_count(self.start_iteration, "start_iteration")
        if self.stop_iteration is not None:
            check_count(self.stop_iteration, "stop_iteration")
        check_count(self.period, "period", minimum=1)

    @property
    def walkers(self) -> list[int]:
        return [n for n, e in self.endpoints.items() if e.mode == "random_walk"]

    def active(self, iteration: int) -> bool:
        if not self.walkers or iteration < self.start_iteration:
            return False
        if self.stop_iteration is not None and iteration >= self.stop_iteration:
            return False
        return (iteration - self.start_iteration) % self.period == 0

    def pending(self, iteration: int) -> bool:
        """Whether any walk can still happen at or after ``iteration``."""
        if not self.walkers:
            return False
        return self.stop_iteration is None or iteration < self.stop_iteration


def stat_round(state: NetworkState, params: ChannelParams, flows) -> dict[int, list[SinrReport]]:
    network = as_network(flows)
    sinrs = link_sinrs(state, params, network)
    reports: dict[int, list[SinrReport]] = {}
    for link, value in zip(network.links, sinrs):
        reports.setdefault(link.flow_id, []).append(
            SinrReport(link.flow_id, link.index, float(value), link.rx_node, state.iteration)
        )
    return reports


def candidate_points(center, delta: float, K: int) -> list[Position]:
    """``K`` points on the circle of radius ``delta``, counter-clockwise from +x."""
    check_positive(delta, "delta")
    check_count(K, "K", minimum=3)
    cx = check_finite(center[0], "center.x")
    cy = check_finite(center[1], "center.y")
    angles = 2.0 * np.pi * np.arange(K) / K
    return [Position(cx + delta * math.cos(a), cy + delta * math.sin(a)) for a in angles]


def modal_decide(
    robot: int,
    flow_id: int,
    state: NetworkState,
    params: ChannelParams,
    ctrl: ControllerParams,
    flows,
) -> MoveDecision:
    """Best candidate point for ``robot`` judged by its own flow's cost.

    All other nodes stay where they are. The robot moves only on a strict
    improvement; ties between candidates go to the lowest angle index.
    """
    network = as_network(flows)
    check_state(state, network)
    if robot not in network.flow(flow_id).robots:
        raise ValidationError("robot", f"node {robot} is not a robot of flow {flow_id}")
    row = network.index[robot]
    sl = network.flow_slice(flow_id)
    current = float(sinr_batch(state.positions, network, params, links=sl).min())

    candidates = np.array(candidate_points(state.positions[row], ctrl.delta, ctrl.candidate_count))
    layouts = np.repeat(state.positions[None], len(candidates), axis=0)
    layouts[:, row] = candidates
    costs = sinr_batch(layouts, network, params, links=sl).min(axis=1)
    best = int(np.argmax(costs))
    if costs[best] > current:
        x, y = candidates[best]
        return MoveDecision(robot, Position(float(x), float(y)), float(costs[best]))
    return MoveDecision(robot, None, current)


def _link_robots(link: Link | None, network: Network) -> list[int]:
    if link is None:
        return []
    ends = (link.tx_node, link.rx_node)
    return sorted(n for n in ends if network.roles[n] is NodeRole.ROBOT)


def controller_step(
    state: NetworkState,
    params: ChannelParams,
    ctrl: ControllerParams,
    flows,
    decisions: list | None = None,
) -> tuple[NetworkState, bool]:
    """One sensing + decision iteration over every flow.

    Applied :class:`MoveDecision` objects are appended to ``decisions`` when
    a list is given.
    """
    network = as_network(flows)
    check_state(state, network)
    snapshot = link_sinrs(state, params, network)
    moved_any = False
    for flow in network.flows:
        bottleneck, pseudo = bottleneck_links(flow.flow_id, state, params, network, sinrs=snapshot)
        consulted: set[int] = set()
        flow_moved = False
        for group in (_link_robots(bottleneck, network), _link_robots(pseudo, network)):
            if flow_moved:
                break
            for robot in group:
                if robot in consulted:
                    continue
                consulted.add(robot)
                decision = modal_decide(robot, flow.flow_id, state, params, ctrl, network)
                if decision.target is not None:
                    state = state.with_positions({robot: decision.target})
                    flow_moved = True
                    if decisions is not None:
                        decisions.append(decision)
        moved_any |= flow_moved
    return state, moved_any


def mobility_step(state: NetworkState, mobility: MobilityModel, rng) -> NetworkState:
    """Displace each random-walk endpoint by at most its step, clipped to bounds."""
    rng = check_random_state(rng)
    updates = {}
    xmin, ymin, xmax, ymax = mobility.bounds
    for node, spec in mobility.endpoints.items():
        if spec.mode != "random_walk":
            continue
        theta = 2.0 * math.pi * rng.random()
        length = spec.step * rng.random()
        x, y = state.position(node)
        nx = min(max(x + length * math.cos(theta), xmin), xmax)
        ny = min(max(y + length * math.sin(theta), ymin), ymax)
        updates[node] = (nx, ny)
    if not updates:
        return state
    return state.with_positions(updates)


@dataclass(frozen=True)
class DistributedRecord:
    iteration: int
    state: NetworkState
    flow_costs: tuple[float, ...]
    global_cost: float
    moved: bool  # any robot moved during this iteration
    endpoint_moved: bool  # an endpoint moved by more than change_threshold afterwards
    decisions: tuple[MoveDecision, ...] = ()
    active: bool = False  # the controller ran (it idles while converged)


@dataclass
class DistributedTrace:
    """Iteration 0 is the initial layout; later records follow each iteration."""

    records: list[DistributedRecord] = field(default_factory=list)
    stop_reason: str = "budget"  # "converged", "cycle" or "budget"
    cycles: int = 0  # limit cycles detected during the run

    @property
    def converged(self) -> bool:
        return self.stop_reason == "converged"

    def __len__(self):
        return len(self.records)

    @property
    def flow_costs(self) -> np.ndarray:
        return np.array([r.flow_costs for r in self.records])

    @property
    def global_costs(self) -> np.ndarray:
        return np.array([r.global_cost for r in self.records])

    @property
    def states(self) -> list[NetworkState]:
        return [r.state for r in self.records]


def _check_mobility(mobility: MobilityModel, network: Network):
    for node in mobility.endpoints:
        role = network.roles.get(node)
        if role is None:
            raise ValidationError("mobility", f"unknown node {node}")
        if role is NodeRole.ROBOT:
            raise ValidationError("mobility", f"node {node} is a robot, not an endpoint")


def run_distributed(
    initial: NetworkState,
    params: ChannelParams,
    ctrl: ControllerParams,
    mobility: MobilityModel | None,
    flows,
    seed=None,
) -> tuple[NetworkState, DistributedTrace]:
    """Repeat :func:`controller_step` until nothing moves or the budget runs out.

    After every iteration the mobility model may move endpoints. The run
    stops once an iteration moves no robot, no endpoint moved beyond
    ``ctrl.change_threshold`` and no further endpoint motion is scheduled.
    While converged the controller idles; an endpoint displacement beyond the
    threshold wakes it up again. A detected limit cycle latches the same way
    (``trace.stop_reason == "cycle"`` if the run ends there).
    """
    network = as_network(flows)
    check_state(initial, network)
    mobility = mobility or MobilityModel()
    _check_mobility(mobility, network)
    rng = check_random_state(mobility.seed if seed is None else seed)

    def record(state, moved, endpoint_moved, decisions=(), active=False):
        costs = flow_costs(state, params, network)
        return DistributedRecord(
            state.iteration, state, tuple(float(c) for c in costs), float(costs.min()),
            moved, endpoint_moved, tuple(decisions), active,
        )

    state = initial
    trace = DistributedTrace([record(state, False, False)])
    history = deque([initial.positions], maxlen=ctrl.cycle_window or 1)
    latched = cycling = False
    for it in range(1, ctrl.max_iterations + 1):
        decisions: list[MoveDecision] = []
        moved = False
        if not latched:
            state, moved = controller_step(state, params, ctrl, network, decisions)
            cycling = moved and ctrl.cycle_window > 0 and any(
                np.abs(state.positions - old).max() <= 1e-9 for old in history
            )
            trace.cycles += cycling
            history.append(state.positions)
        after = mobility_step(state, mobility, rng) if mobility.active(it) else state
        shift = np.hypot(*(after.positions - state.positions).T).max(initial=0.0)
        endpoint_moved = bool(shift > ctrl.change_threshold)
        state = NetworkState(after.node_ids, after.positions, it)
        trace.records.append(record(state, moved, endpoint_moved, decisions, not latched))
        if endpoint_moved:
            history.clear()
            history.append(state.positions)
        latched = (cycling or not moved) and not endpoint_moved
        if latched and not mobility.pending(it + 1):
            trace.stop_reason = "cycle" if cycling else "converged"
            break
    return state, trace
