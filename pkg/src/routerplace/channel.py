"""Planar geometry and path-loss / SINR primitives.

All powers are linear (not dB). Distances below ``min_distance`` are clamped
so that ``d ** -eta`` stays finite for coincident nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .validation import ValidationError, check_finite, check_positive


class Position(NamedTuple):
    x: float
    y: float


class UndefinedSinrError(ArithmeticError):
    """Raised when a link has neither interference nor noise."""


@dataclass(frozen=True)
class ChannelParams:
    """Radio parameters shared by every link.

    Parameters
    ----------
    eta : path-loss exponent.
    p_t : transmit power of flow transmitters.
    p_m : transmit power of robotic routers.
    p_n : noise power, identical on every link.
    fading_sigma : standard deviation of log-normal fading in dB. Zero
        disables fading.
    min_distance : distance clamp in meters.
    """

    eta: float = 2.0
    p_t: float = 1.0
    p_m: float = 1.0
    p_n: float = 1.0
    fading_sigma: float = 0.0
    min_distance: float = 0.1

    def __post_init__(self):
        check_positive(self.eta, "eta")
        check_positive(self.p_t, "p_t")
        check_positive(self.p_m, "p_m")
        check_positive(self.p_n, "p_n", allow_zero=True)
        check_positive(self.fading_sigma, "fading_sigma", allow_zero=True)
        check_positive(self.min_distance, "min_distance")


def _as_position(p, field: str) -> Position:
    try:
        x, y = p
    except (TypeError, ValueError):
        raise ValidationError(field, f"expected an (x, y) pair, got {p!r}") from None
    return Position(check_finite(x, f"{field}.x"), check_finite(y, f"{field}.y"))


def distance(p, q) -> float:
    p = _as_position(p, "p")
    q = _as_position(q, "q")
    return math.hypot(p.x - q.x, p.y - q.y)


def received_power(p_tx: float, d: float, params: ChannelParams) -> float:
    """Mean power received at distance ``d`` from a source of power ``p_tx``."""
    if d < 0:
        raise ValidationError("d", f"distance must be >= 0, got {d!r}")
    return p_tx * max(d, params.min_distance) ** (-params.eta)


def _fading_gain(params: ChannelParams, rng: np.random.Generator | None) -> float:
    if params.fading_sigma == 0:
        return 1.0
    if rng is None:
        raise ValueError("fading_sigma > 0 requires a seeded rng")
    return 10.0 ** (rng.normal(0.0, params.fading_sigma) / 10.0)


def link_sinr(
    tx_pos,
    rx_pos,
    tx_power: float,
    interferer_list: Iterable[tuple],
    params: ChannelParams,
    rng: np.random.Generator | None = None,
) -> float:
    """SINR at ``rx_pos`` for a signal sent from ``tx_pos``.

    ``interferer_list`` holds ``(position, power)`` pairs. With fading
    enabled one dB draw is taken for the signal and then one per interferer,
    in list order.
    """
    rx = _as_position(rx_pos, "rx_pos")
    signal = received_power(tx_power, distance(tx_pos, rx), params)
    signal *= _fading_gain(params, rng)
    interference = 0.0
    n_interferers = 0
    for pos, power in interferer_list:
        gain = _fading_gain(params, rng)
        interference += received_power(power, distance(pos, rx), params) * gain
        n_interferers += 1
    denominator = interference + params.p_n
    if denominator == 0.0:
        if n_interferers == 0:
            raise UndefinedSinrError("no interferers and zero noise power: SINR is unbounded")
        raise UndefinedSinrError("interference underflowed to zero with zero noise power")
    return signal / denominator
