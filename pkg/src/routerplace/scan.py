"""Objective surface along the flows' straight transmitter-receiver lines."""

from __future__ import annotations

import numpy as np

from .channel import ChannelParams
from .network import NetworkState, as_network, check_state, sinr_batch
from .validation import ValidationError, check_count


def scan_surface(
    state: NetworkState,
    params: ChannelParams,
    flows,
    robots: tuple[int, int],
    samples: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Global cost with two robots slid along their flows' tx-rx segments.

    Robot ``robots[0]`` sits at ``tx + t_a (rx - tx)`` of its flow and
    ``robots[1]`` likewise with ``t_b``; ``t`` runs over ``samples`` evenly
    spaced values in [0, 1]. Every other node keeps its position in
    ``state``.

    Returns ``(t, grid)`` with ``grid[i, j]`` the global cost at
    ``t_a = t[i]``, ``t_b = t[j]``.
    """
    network = as_network(flows)
    check_state(state, network)
    samples = check_count(samples, "samples", minimum=1)
    if len(robots) != 2 or robots[0] == robots[1]:
        raise ValidationError("robots", f"expected two distinct robot ids, got {robots!r}")
    for r in robots:
        if r not in network.robot_ids:
            raise ValidationError("robots", f"node {r} is not a robot of this scenario")
    fa, fb = (network.flow(network.flow_of(r)) for r in robots)
    if fa.flow_id == fb.flow_id:
        raise ValidationError("robots", f"robots {robots} belong to the same flow {fa.flow_id}")

    t = np.linspace(0.0, 1.0, samples) if samples > 1 else np.zeros(1)
    ends = []
    for f in (fa, fb):
        tx, rx = np.asarray(state.position(f.tx)), np.asarray(state.position(f.rx))
        ends.append(tx[None, :] + t[:, None] * (rx - tx)[None, :])
    layouts = np.repeat(np.array(state.positions)[None, None], samples, axis=0)
    layouts = np.repeat(layouts, samples, axis=1)
    layouts[:, :, network.index[robots[0]]] = ends[0][:, None, :]
    layouts[:, :, network.index[robots[1]]] = ends[1][None, :, :]
    grid = sinr_batch(layouts, network, params).min(axis=-1)
    return t, grid


def strict_local_maxima(grid) -> list[tuple[int, int, float]]:
    """Interior grid points strictly above all eight neighbours."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValidationError("grid", f"expected a 2-D array, got shape {grid.shape}")
    found = []
    for i in range(1, grid.shape[0] - 1):
        for j in range(1, grid.shape[1] - 1):
            window = grid[i - 1:i + 2, j - 1:j + 2].ravel()
            centre = window[4]
            if np.all(centre > np.delete(window, 4)):
                found.append((i, j, float(centre)))
    return found
