"""scikit-learn style wrappers around the two placement optimizers.

The topology and the radio model are constructor parameters. ``X`` is a
layout: an ``(n_nodes, 2)`` array of node positions in ascending node-id
order, or a :class:`~routerplace.network.NetworkState`.

    >>> est = AnnealingPlacement(flows=scenario.network(), channel=scenario.channel,
    ...                          random_state=0)
    >>> placed = est.fit_transform(scenario.initial_state())
    >>> est.cost_            # max-min SINR reached
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .annealing import AnnealingSchedule, anneal
from .channel import ChannelParams
from .distributed import ControllerParams, MobilityModel, run_distributed
from .network import Network, NetworkState, as_network, check_state, sinr_batch
from .validation import ValidationError, check_points


class _PlacementEstimator(TransformerMixin, BaseEstimator):
    def _network(self) -> Network:
        if self.flows is None:
            raise ValidationError("flows", "a topology is required")
        return as_network(self.flows)

    def _channel(self) -> ChannelParams:
        channel = ChannelParams() if self.channel is None else self.channel
        if not isinstance(channel, ChannelParams):
            raise ValidationError("channel", f"expected ChannelParams, got {type(channel).__name__}")
        return channel

    def _validate_X(self, X, network: Network) -> NetworkState:
        if isinstance(X, NetworkState):
            return check_state(X, network)
        pts = check_points(X, "X", n=len(network.node_ids))
        return NetworkState(network.node_ids, pts)

    def _finish(self, state, network, channel, trace, n_iter, started):
        self.state_ = state
        self.positions_ = np.array(state.positions)
        self.robot_positions_ = state.robot_positions(network)
        self.link_sinrs_ = sinr_batch(state.positions, network, channel)
        self.cost_ = float(self.link_sinrs_.min())
        self.trace_ = trace
        self.n_iter_ = n_iter
        self.network_ = network
        self.fit_time_ = time.perf_counter() - started
        return self

    def transform(self, X):
        """Put the fitted robot positions into layout ``X``.

        Endpoints keep the coordinates they have in ``X``.
        """
        check_is_fitted(self, "state_")
        state = self._validate_X(X, self.network_)
        rows = [self.network_.index[r] for r in self.network_.robot_ids]
        out = np.array(state.positions)
        out[rows] = self.positions_[rows]
        return out

    def predict(self, X=None):
        """Per-link SINR of layout ``X`` (the fitted layout if omitted).

        ``X`` may also be a stack of layouts, shape ``(..., n_nodes, 2)``.
        """
        check_is_fitted(self, "state_")
        if X is None:
            return self.link_sinrs_.copy()
        if isinstance(X, NetworkState):
            X = X.positions
        arr = np.asarray(X, dtype=float)
        if arr.ndim < 2 or arr.shape[-2:] != (len(self.network_.node_ids), 2) or not np.all(np.isfinite(arr)):
            raise ValidationError("X", f"expected finite layouts of shape (..., {len(self.network_.node_ids)}, 2)")
        return sinr_batch(arr, self.network_, self._channel())

    def score(self, X=None, y=None):
        """Global cost (minimum link SINR) of ``X``, or of the fitted layout."""
        check_is_fitted(self, "state_")
        if X is None:
            return self.cost_
        costs = np.min(self.predict(X), axis=-1)
        return float(costs) if costs.ndim == 0 else costs


class AnnealingPlacement(_PlacementEstimator):
    """Centralized simulated-annealing placement of the robots.

    Parameters mirror :class:`~routerplace.annealing.AnnealingSchedule`;
    ``record_every`` is the state snapshot stride of ``trace_``.

    Attributes
    ----------
    state_ : best layout found.
    cost_ : its global cost.
    link_sinrs_ : its per-link SINRs, in ``network.links`` order.
    trace_ : :class:`~routerplace.annealing.AnnealTrace`.
    """

    def __init__(
        self,
        flows=None,
        channel=None,
        t0=0.3,
        alpha=0.9977,
        iterations=40000,
        step_radius=1.0,
        steps_per_temperature=10,
        min_step_radius=0.01,
        radius_power=0.5,
        cost_scale="log",
        record_every=100,
        random_state=None,
    ):
        self.flows = flows
        self.channel = channel
        self.t0 = t0
        self.alpha = alpha
        self.iterations = iterations
        self.step_radius = step_radius
        self.steps_per_temperature = steps_per_temperature
        self.min_step_radius = min_step_radius
        self.radius_power = radius_power
        self.cost_scale = cost_scale
        self.record_every = record_every
        self.random_state = random_state

    def schedule(self) -> AnnealingSchedule:
        return AnnealingSchedule(
            self.t0, self.alpha, self.iterations, self.step_radius,
            self.steps_per_temperature, self.min_step_radius, self.radius_power, self.cost_scale,
        )

    def fit(self, X, y=None):
        started = time.perf_counter()
        network, channel = self._network(), self._channel()
        initial = self._validate_X(X, network)
        schedule = self.schedule()
        state, trace = anneal(
            initial, schedule, channel, network, seed=self.random_state, record_every=self.record_every
        )
        return self._finish(state, network, channel, trace, schedule.iterations, started)


class DistributedPlacement(_PlacementEstimator):
    """Decentralized bottleneck-driven placement (see :mod:`routerplace.distributed`).

    ``mobility`` is an optional :class:`~routerplace.distributed.MobilityModel`
    for the flow endpoints; ``random_state`` overrides its seed.
    """

    def __init__(
        self,
        flows=None,
        channel=None,
        delta=0.25,
        candidate_count=36,
        max_iterations=2000,
        change_threshold=1e-6,
        cycle_window=64,
        mobility=None,
        random_state=None,
    ):
        self.flows = flows
        self.channel = channel
        self.delta = delta
        self.candidate_count = candidate_count
        self.max_iterations = max_iterations
        self.change_threshold = change_threshold
        self.cycle_window = cycle_window
        self.mobility = mobility
        self.random_state = random_state

    def controller(self) -> ControllerParams:
        return ControllerParams(
            self.delta, self.candidate_count, self.max_iterations,
            self.change_threshold, self.cycle_window,
        )

    def fit(self, X, y=None):
        started = time.perf_counter()
        network, channel = self._network(), self._channel()
        initial = self._validate_X(X, network)
        mobility = self.mobility
        if mobility is not None and not isinstance(mobility, MobilityModel):
            raise ValidationError("mobility", f"expected MobilityModel, got {type(mobility).__name__}")
        state, trace = run_distributed(
            initial, channel, self.controller(), mobility, network, seed=self.random_state
        )
        self.stop_reason_ = trace.stop_reason
        return self._finish(state, network, channel, trace, len(trace) - 1, started)
