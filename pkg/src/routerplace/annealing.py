"""Centralized simulated annealing over robot positions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .network import NetworkState, as_network, check_state, sinr_batch
from .validation import ValidationError, check_count, check_open_unit, check_positive, check_random_state


@dataclass(frozen=True)
class AnnealingSchedule:
    """Geometric cooling schedule.

    With ``cost_scale="log"`` (default) the Metropolis rule compares
    ``log(cost)``, so ``t0`` is a relative drop: at temperature 0.1 a move
    losing 10% of the objective is accepted with probability about e^-1,
    whatever the noise level. With ``cost_scale="linear"`` costs are compared
    directly and the starting temperature is ``t0`` times the initial cost.

    The neighbourhood radius shrinks with temperature,
    ``step_radius * (T / T_start) ** radius_power``, floored at
    ``min_step_radius``; ``radius_power = 0`` keeps it fixed.
    """

    t0: float = 0.3
    alpha: float = 0.9977
    iterations: int = 40000
    step_radius: float = 1.0
    steps_per_temperature: int = 10
    min_step_radius: float = 0.01
    radius_power: float = 0.5
    cost_scale: str = "log"

    def __post_init__(self):
        check_positive(self.t0, "t0")
        check_open_unit(self.alpha, "alpha")
        check_count(self.iterations, "iterations")
        check_positive(self.step_radius, "step_radius")
        check_count(self.steps_per_temperature, "steps_per_temperature", minimum=1)
        check_positive(self.min_step_radius, "min_step_radius", allow_zero=True)
        check_positive(self.radius_power, "radius_power", allow_zero=True)
        if self.cost_scale not in ("log", "linear"):
            raise ValidationError("cost_scale", f"must be 'log' or 'linear', got {self.cost_scale!r}")

    def temperature(self, k: int, scale: float = 1.0) -> float:
        return scale * self.t0 * self.alpha ** (k // self.steps_per_temperature)

    def radius(self, k: int) -> float:
        shrink = self.alpha ** (self.radius_power * (k // self.steps_per_temperature))
        return max(self.step_radius * shrink, min(self.min_step_radius, self.step_radius))


@dataclass(frozen=True)
class AnnealRecord:
    iteration: int
    global_cost: float
    accepted: bool
    temperature: float
    best_cost: float


@dataclass
class AnnealTrace:
    """Per-iteration log of one annealing run.

    ``records`` has one entry per iteration. ``states`` holds snapshots of
    the chain's current layout every ``record_every`` iterations (each state
    carries its iteration number); ``last_state`` is the chain's final
    layout, whereas :func:`anneal` returns the best one.
    """

    records: list[AnnealRecord] = field(default_factory=list)
    states: list[NetworkState] = field(default_factory=list)
    last_state: NetworkState | None = None

    def __len__(self):
        return len(self.records)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.global_cost for r in self.records])

    @property
    def best_costs(self) -> np.ndarray:
        return np.array([r.best_cost for r in self.records])

    @property
    def acceptance_rate(self) -> float:
        if not self.records:
            return float("nan")
        return sum(r.accepted for r in self.records) / len(self.records)


def _displace(positions, robot_rows, step_radius, rng):
    row = robot_rows[rng.integers(len(robot_rows))]
    r = step_radius * math.sqrt(rng.random())
    theta = 2.0 * math.pi * rng.random()
    out = positions.copy()
    out[row, 0] += r * math.cos(theta)
    out[row, 1] += r * math.sin(theta)
    return out


def propose_neighbor(state: NetworkState, step_radius: float, rng, flows) -> NetworkState:
    """Move one uniformly chosen robot to a uniform point of the disc around it."""
    network = as_network(flows)
    check_state(state, network)
    check_positive(step_radius, "step_radius", allow_zero=True)
    rng = check_random_state(rng)
    if not network.robot_ids:
        return state
    rows = [network.index[r] for r in network.robot_ids]
    return NetworkState(state.node_ids, _displace(state.positions, rows, step_radius, rng), state.iteration)


def metropolis_accept(c_old: float, c_new: float, temperature: float, rng) -> bool:
    """Metropolis rule for a maximized objective.

    Improvements are accepted without touching ``rng``; anything else is
    accepted with probability ``exp(-(c_old - c_new) / temperature)``.
    """
    check_positive(temperature, "temperature")
    if c_new > c_old:
        return True
    return bool(rng.random() < math.exp(-(c_old - c_new) / temperature))


def _safe_log(c: float) -> float:
    return math.log(c) if c > 0 else -math.inf


def anneal(
    initial: NetworkState,
    schedule: AnnealingSchedule,
    params: ChannelParams,
    flows,
    seed=None,
    record_every: int = 1,
) -> tuple[NetworkState, AnnealTrace]:
    """Run the annealing chain and return the best layout visited plus its trace.

    ``record_every`` sets the snapshot stride for ``trace.states``; 0 keeps
    no snapshots. The final iteration is always snapshotted when enabled.
    """
    network = as_network(flows)
    check_state(initial, network)
    rng = check_random_state(seed)
    rows = [network.index[r] for r in network.robot_ids]

    def cost(pos):
        return float(sinr_batch(pos, network, params).min())

    if schedule.cost_scale == "log":
        energy, scale = _safe_log, 1.0
    else:
        energy, scale = float, None

    current = np.array(initial.positions)
    c_current = cost(current)
    best, c_best = current, c_current
    if scale is None:
        scale = c_current if c_current > 0 else 1.0
    trace = AnnealTrace()
    for k in range(schedule.iterations):
        temperature = schedule.temperature(k, scale)
        accepted = False
        if rows:
            candidate = _displace(current, rows, schedule.radius(k), rng)
            c_candidate = cost(candidate)
            accepted = metropolis_accept(energy(c_current), energy(c_candidate), temperature, rng)
            if accepted:
                current, c_current = candidate, c_candidate
                if c_current > c_best:
                    best, c_best = current, c_current
        trace.records.append(AnnealRecord(k, c_current, accepted, temperature, c_best))
        if record_every and ((k + 1) % record_every == 0 or k + 1 == schedule.iterations):
            trace.states.append(NetworkState(initial.node_ids, current, k + 1))
    n = schedule.iterations
    trace.last_state = NetworkState(initial.node_ids, current, n)
    return NetworkState(initial.node_ids, best, n), trace
