"""Small-cell layout: Poisson Point Process sampling and geometric queries.

Sites are dropped uniformly over the area with a Poisson-distributed count,
all carrying identical height/power/gain. The screening cone used by the
prediction-aided handover is also defined here, together with the distance,
bearing, and cone-membership primitives the rest of the simulator shares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from udnsim.errors import ConfigurationError

DEFAULT_SCN_HEIGHT_M = 15.0
DEFAULT_TX_POWER_DBM = 30.0
DEFAULT_ANTENNA_GAIN_DBI = 15.0


@dataclass(frozen=True)
class Area:
    """Rectangular simulation area, metres. Default is the 1000 m x 1000 m city."""

    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigurationError(f"degenerate area {self.width} x {self.height}")

    @property
    def km2(self) -> float:
        return self.width * self.height / 1e6


@dataclass(frozen=True)
class ScnSite:
    """One small-cell node. All sites in a deployment share height/power/gain."""

    id: int
    x: float
    y: float
    height: float = DEFAULT_SCN_HEIGHT_M
    tx_power: float = DEFAULT_TX_POWER_DBM
    antenna_gain: float = DEFAULT_ANTENNA_GAIN_DBI


@dataclass(frozen=True)
class ScreeningCone:
    """Forward wedge along a heading: apex, axis, half-angle (deg), radius (m)."""

    apex: tuple[float, float]
    axis_heading: float
    half_angle: float
    radius: float

    def __post_init__(self):
        if not (0.0 < self.half_angle < 180.0):
            raise ConfigurationError(f"cone half-angle {self.half_angle} outside (0, 180)")
        if not self.radius > 0:
            raise ConfigurationError(f"cone radius {self.radius} must be positive")


def sample_ppp_deployment(
    density_per_km2: float,
    area: Area,
    seed: int,
    *,
    height: float = DEFAULT_SCN_HEIGHT_M,
    tx_power: float = DEFAULT_TX_POWER_DBM,
    antenna_gain: float = DEFAULT_ANTENNA_GAIN_DBI,
) -> list[ScnSite]:
    """Sample a small-cell layout from a homogeneous PPP.

    The site count is Poisson(density * area_km2) and positions are i.i.d.
    uniform over the area. Identical (density, area, seed) give an identical
    site list.
    """
    if not density_per_km2 > 0:
        raise ConfigurationError(f"density must be positive, got {density_per_km2}")
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(density_per_km2 * area.km2))
    xs = rng.uniform(0.0, area.width, size=count)
    ys = rng.uniform(0.0, area.height, size=count)
    return [
        ScnSite(id=i, x=float(xs[i]), y=float(ys[i]),
                height=height, tx_power=tx_power, antenna_gain=antenna_gain)
        for i in range(count)
    ]


def _xy(obj) -> tuple[float, float]:
    if isinstance(obj, ScnSite):
        return obj.x, obj.y
    x, y = obj
    return float(x), float(y)


def distance_2d(p, q) -> float:
    """Euclidean ground distance between two points or sites, metres."""
    px, py = _xy(p)
    qx, qy = _xy(q)
    return math.hypot(qx - px, qy - py)


def bearing(origin, target) -> float:
    """Angle of the origin->target vector, degrees CCW from +x, in [0, 360)."""
    ox, oy = _xy(origin)
    tx, ty = _xy(target)
    if ox == tx and oy == ty:
        raise ValueError("bearing undefined for coincident points")
    deg = math.degrees(math.atan2(ty - oy, tx - ox))
    return deg % 360.0


def angular_difference(a: float, b: float) -> float:
    """Wrap-around absolute difference between two headings, in [0, 180]."""
    d = abs(a - b) % 360.0
    return 360.0 - d if d > 180.0 else d


def screening_angle(velocity_kmh: float) -> float:
    """Full opening of the screening cone in degrees: 50/sqrt(V) + 18."""
    if not velocity_kmh > 0:
        raise ConfigurationError(f"velocity must be positive, got {velocity_kmh}")
    return 50.0 / math.sqrt(velocity_kmh) + 18.0


def in_screening_cone(cone: ScreeningCone, site) -> bool:
    """True iff the site lies within the cone's radius and angular wedge.

    A site exactly at the apex counts as inside (its bearing is undefined).
    """
    d = distance_2d(cone.apex, site)
    if d > cone.radius:
        return False
    if d == 0.0:
        return True
    return angular_difference(bearing(cone.apex, site), cone.axis_heading) <= cone.half_angle


DEPLOYMENT_CSV_HEADER = "id,x,y,height,tx_power,gain"


def save_deployment_csv(sites: list[ScnSite], path) -> None:
    """Write one row per site so a fixed layout can be replayed."""
    with open(path, "w") as fh:
        fh.write(DEPLOYMENT_CSV_HEADER + "\n")
        for s in sites:
            fh.write(f"{s.id},{s.x!r},{s.y!r},{s.height!r},{s.tx_power!r},{s.antenna_gain!r}\n")


def load_deployment_csv(path) -> list[ScnSite]:
    sites = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != DEPLOYMENT_CSV_HEADER:
            raise ConfigurationError(f"unexpected deployment header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            sid, x, y, h, p, g = line.split(",")
            sites.append(ScnSite(id=int(sid), x=float(x), y=float(y), height=float(h),
                                 tx_power=float(p), antenna_gain=float(g)))
    ids = [s.id for s in sites]
    if ids != list(range(len(sites))):
        raise ConfigurationError("site ids must be dense from 0 in file order")
    return sites


def site_array(sites: list[ScnSite]) -> np.ndarray:
    """(K, 2) array of site ground positions, ordered by id."""
    return np.array([[s.x, s.y] for s in sites], dtype=np.float64).reshape(len(sites), 2)
