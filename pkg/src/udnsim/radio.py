"""Downlink link budget: pathloss, received power, noise, and SINR.

The pathloss model is the urban macro formula 128.1 + 37.6*log10(d_km).
SINR is assembled in the linear milliwatt domain from the serving cell's
received power, thermal noise for the configured bandwidth, and full-buffer
interference from every other small cell within communication range of the
vehicle. No shadowing or fast fading is modelled; measurement-level noise is
applied by the handover layer, not here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from udnsim.deployment import ScnSite
from udnsim.errors import ConfigurationError

log = logging.getLogger(__name__)

DEFAULT_VUE_ANTENNA_HEIGHT_M = 1.5


@dataclass(frozen=True)
class RadioParams:
    """Radio-layer constants (defaults follow the simulated city scenario)."""

    carrier_frequency_ghz: float = 6.0      # informational only
    bandwidth_hz: float = 1e7
    tx_power_dbm: float = 30.0
    scn_antenna_gain_dbi: float = 15.0
    rx_antenna_gain_dbi: float = 0.0
    noise_figure_db: float = 7.0
    communication_range_m: float = 300.0
    sinr_min_db: float = -7.0
    vue_antenna_height_m: float = DEFAULT_VUE_ANTENNA_HEIGHT_M

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ConfigurationError(f"bandwidth must be positive, got {self.bandwidth_hz}")
        if not self.communication_range_m > 0:
            raise ConfigurationError(
                f"communication range must be positive, got {self.communication_range_m}")


def db_to_linear(db):
    """dB (or dBm) to linear ratio (or mW)."""
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0) if isinstance(db, np.ndarray) \
        else 10.0 ** (db / 10.0)


def linear_to_db(linear):
    """Linear ratio (or mW) to dB (or dBm)."""
    return 10.0 * (np.log10(linear) if isinstance(linear, np.ndarray) else math.log10(linear))


def pathloss_db(distance_m):
    """Pathloss in dB at the given link distance in metres.

    Distances below 1 m are clamped to 1 m before the km conversion.
    Accepts scalars or numpy arrays.
    """
    if isinstance(distance_m, np.ndarray):
        clamped = np.maximum(distance_m, 1.0)
        return 128.1 + 37.6 * np.log10(clamped / 1000.0)
    if distance_m < 1.0:
        log.debug("pathloss distance %.3g m clamped to 1 m", distance_m)
        distance_m = 1.0
    return 128.1 + 37.6 * math.log10(distance_m / 1000.0)


def noise_power_dbm(params: RadioParams) -> float:
    """Thermal noise floor plus noise figure: -174 dBm/Hz + 10*log10(bw) + NF."""
    return -174.0 + 10.0 * math.log10(params.bandwidth_hz) + params.noise_figure_db


def rx_power_dbm(params: RadioParams, distance_m):
    """Received power: tx power plus antenna gains minus pathloss."""
    return (params.tx_power_dbm + params.scn_antenna_gain_dbi
            + params.rx_antenna_gain_dbi - pathloss_db(distance_m))


def link_distance_3d(vue_pos, site: ScnSite, params: RadioParams) -> float:
    """Slant distance between the VUE antenna and the site antenna, metres."""
    dx = site.x - vue_pos[0]
    dy = site.y - vue_pos[1]
    dz = site.height - params.vue_antenna_height_m
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _rx_linear_all(vue_pos, sites: list[ScnSite], params: RadioParams) -> np.ndarray:
    pos = np.array([[s.x, s.y, s.height] for s in sites], dtype=np.float64)
    dx = pos[:, 0] - vue_pos[0]
    dy = pos[:, 1] - vue_pos[1]
    dz = pos[:, 2] - params.vue_antenna_height_m
    dist3d = np.sqrt(dx * dx + dy * dy + dz * dz)
    return db_to_linear(rx_power_dbm(params, dist3d))


def sinr_db(vue_pos, serving: ScnSite, all_sites: list[ScnSite], params: RadioParams) -> float:
    """Downlink SINR of the VUE against its serving cell, in dB.

    Interference sums the received power of every other site whose ground
    distance is within communication range; pathloss always uses the 3D
    distance between the 1.5 m VUE antenna and the site antenna.
    """
    if serving not in all_sites:
        raise ValueError(f"serving site id={serving.id} not among the deployment sites")
    rx_lin = _rx_linear_all(vue_pos, all_sites, params)
    pos = np.array([[s.x, s.y] for s in all_sites], dtype=np.float64)
    ground = np.hypot(pos[:, 0] - vue_pos[0], pos[:, 1] - vue_pos[1])
    in_range = ground <= params.communication_range_m
    idx = all_sites.index(serving)
    total_in_range = float(np.sum(rx_lin[in_range]))
    signal = float(rx_lin[idx])
    interference = total_in_range - signal if in_range[idx] else total_in_range
    noise_mw = db_to_linear(noise_power_dbm(params))
    return linear_to_db(signal / (noise_mw + interference))
