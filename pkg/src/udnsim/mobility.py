"""Road network, constant-speed vehicle motion, and trajectory dataset generation.

Three routes share a west-to-east approach segment that ends at junction A,
then diverge: route 0 continues straight east, route 1 turns north, route 2
turns south. Vehicles traverse their route at constant speed in discrete
tics; the labelled (x, y, period, t_ms, route) samples they produce replace
an external traffic simulator as the classifier training corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from udnsim.errors import ConfigurationError

KMH_TO_M_PER_MS = 1.0 / 3600.0   # km/h -> metres per millisecond

DEFAULT_HORIZON_MS = 70_000.0
DEFAULT_TIC_MS = 10.0
DEFAULT_PERIOD_DURATION_MS = 3_600_000.0
DEFAULT_PERIOD_LABELS = ("07:00-08:00", "08:00-09:00", "17:00-18:00")
# Each time period favours one route; the 7-8 AM row is the 1400/400/200 split,
# the other two mirror it onto routes 1 and 2.
DEFAULT_DEMAND_COUNTS = (
    {0: 1400, 1: 400, 2: 200},
    {0: 400, 1: 1400, 2: 200},
    {0: 200, 1: 400, 2: 1400},
)

DATASET_CSV_HEADER = "x,y,period,t_ms,route"


@dataclass(frozen=True)
class Route:
    """A polyline route with arc-length queries. Waypoints are metres."""

    route_id: int
    waypoints: np.ndarray                  # (k, 2) float64
    cum_lengths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=np.float64)
        if wp.ndim != 2 or wp.shape[0] < 2 or wp.shape[1] != 2:
            raise ConfigurationError(f"route {self.route_id} needs >=2 waypoints")
        seg = np.hypot(np.diff(wp[:, 0]), np.diff(wp[:, 1]))
        if np.any(seg == 0.0):
            raise ConfigurationError(f"route {self.route_id} has duplicate consecutive waypoints")
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "cum_lengths", np.concatenate(([0.0], np.cumsum(seg))))

    @property
    def length(self) -> float:
        return float(self.cum_lengths[-1])

    def _segment_index(self, s: float) -> int:
        # segment i covers [cum[i], cum[i+1]); s == length maps to the last segment
        i = int(np.searchsorted(self.cum_lengths, s, side="right")) - 1
        return min(max(i, 0), len(self.waypoints) - 2)

    def position_at(self, s: float) -> tuple[float, float]:
        """Point at arc length s (clamped to [0, length])."""
        s = min(max(s, 0.0), self.length)
        i = self._segment_index(s)
        a, b = self.waypoints[i], self.waypoints[i + 1]
        seg_len = self.cum_lengths[i + 1] - self.cum_lengths[i]
        f = (s - self.cum_lengths[i]) / seg_len
        return float(a[0] + f * (b[0] - a[0])), float(a[1] + f * (b[1] - a[1]))

    def heading_at(self, s: float) -> float:
        """Heading of the segment containing arc length s, degrees in [0, 360)."""
        i = self._segment_index(min(max(s, 0.0), self.length))
        a, b = self.waypoints[i], self.waypoints[i + 1]
        return math.degrees(math.atan2(b[1] - a[1], b[0] - a[0])) % 360.0

    def positions_at(self, s: np.ndarray) -> np.ndarray:
        """Vectorised position_at: (n,) arc lengths -> (n, 2) points."""
        s = np.clip(np.asarray(s, dtype=np.float64), 0.0, self.length)
        i = np.clip(np.searchsorted(self.cum_lengths, s, side="right") - 1,
                    0, len(self.waypoints) - 2)
        a = self.waypoints[i]
        b = self.waypoints[i + 1]
        seg_len = (self.cum_lengths[i + 1] - self.cum_lengths[i])[:, None]
        f = ((s - self.cum_lengths[i])[:, None]) / seg_len
        return a + f * (b - a)

    def nearest_arclength(self, point) -> float:
        """Arc length of the closest point on the route to `point`.

        Equidistant segments resolve to the smallest arc length.
        """
        p = np.asarray(point, dtype=np.float64)
        a = self.waypoints[:-1]
        b = self.waypoints[1:]
        ab = b - a
        seg_len2 = np.sum(ab * ab, axis=1)
        t = np.clip(np.sum((p - a) * ab, axis=1) / seg_len2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d2 = np.sum((proj - p) ** 2, axis=1)
        i = int(np.argmin(d2))   # first minimum -> smallest arc length
        return float(self.cum_lengths[i] + t[i] * math.sqrt(seg_len2[i]))


@dataclass(frozen=True)
class RouteNetwork:
    """Exactly three routes sharing a common approach that ends at junction A."""

    routes: tuple[Route, Route, Route]
    junction: tuple[float, float]

    def __post_init__(self):
        if len(self.routes) != 3 or [r.route_id for r in self.routes] != [0, 1, 2]:
            raise ConfigurationError("network needs routes with ids 0, 1, 2 in order")
        prefix_len = self.routes[0].nearest_arclength(self.junction)
        for r in self.routes:
            s = r.nearest_arclength(self.junction)
            jx, jy = r.position_at(s)
            if math.hypot(jx - self.junction[0], jy - self.junction[1]) > 1e-9:
                raise ConfigurationError(f"junction not on route {r.route_id}")
            if abs(s - prefix_len) > 1e-9:
                raise ConfigurationError("routes disagree on the junction arc length")

    @property
    def junction_arclength(self) -> float:
        return self.routes[0].nearest_arclength(self.junction)


def build_route_network(area_width: float = 1000.0, area_height: float = 1000.0) -> RouteNetwork:
    """Default three-route network inside the standard 1000 m x 1000 m area.

    Common approach (0, 500) -> junction A (100, 500); route 0 continues east,
    route 1 turns north then east, route 2 mirrors it to the south. Lengths
    are 950/1000/1000 m.
    """
    if area_width < 1000.0 or area_height < 1000.0:
        raise ConfigurationError("default route network needs at least a 1000 m x 1000 m area")
    mid = 500.0
    junction = (100.0, mid)
    r0 = Route(0, np.array([(0.0, mid), junction, (950.0, mid)]))
    r1 = Route(1, np.array([(0.0, mid), junction, (100.0, 800.0), (700.0, 800.0)]))
    r2 = Route(2, np.array([(0.0, mid), junction, (100.0, 200.0), (700.0, 200.0)]))
    return RouteNetwork(routes=(r0, r1, r2), junction=junction)


@dataclass(frozen=True)
class TimePeriodDemand:
    """VUE counts per route for one time-of-day period."""

    period_label: str
    counts: dict[int, int]

    def __post_init__(self):
        if set(self.counts) - {0, 1, 2}:
            raise ConfigurationError(f"demand has unknown route ids: {sorted(self.counts)}")
        if any(c < 0 for c in self.counts.values()):
            raise ConfigurationError("demand counts must be non-negative")
        if sum(self.counts.values()) == 0:
            raise ConfigurationError(f"period {self.period_label!r} has no VUEs")

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def default_demands() -> list[TimePeriodDemand]:
    return [TimePeriodDemand(label, dict(counts))
            for label, counts in zip(DEFAULT_PERIOD_LABELS, DEFAULT_DEMAND_COUNTS)]


@dataclass(frozen=True)
class VuePlan:
    """Assignment of one vehicle: route, departure offset within its period, speed."""

    vue_id: int
    route_id: int
    depart_ms: float
    velocity_kmh: float
    period_index: int = 0


@dataclass
class VueState:
    """Mutable kinematic state of one vehicle on its route."""

    plan: VuePlan
    route: Route
    s: float = 0.0
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    finished: bool = False

    def __post_init__(self):
        self.x, self.y = self.route.position_at(self.s)
        self.heading = self.route.heading_at(self.s)
        self.finished = self.s >= self.route.length


def sample_departures(
    demand: TimePeriodDemand,
    velocity_kmh: float,
    seed: int,
    *,
    period_index: int = 0,
    period_duration_ms: float = DEFAULT_PERIOD_DURATION_MS,
    id_offset: int = 0,
) -> list[VuePlan]:
    """One VuePlan per demanded vehicle, departure times uniform in the period.

    Plans are ordered by route id then departure; ids are dense from id_offset.
    """
    rng = np.random.default_rng(seed)
    plans = []
    vid = id_offset
    for route_id in sorted(demand.counts):
        n = demand.counts[route_id]
        departs = np.sort(rng.uniform(0.0, period_duration_ms, size=n))
        for d in departs:
            plans.append(VuePlan(vue_id=vid, route_id=route_id, depart_ms=float(d),
                                 velocity_kmh=velocity_kmh, period_index=period_index))
            vid += 1
    return plans


def advance_vue(vue: VueState, dt_ms: float) -> VueState:
    """Move the vehicle dt_ms forward along its polyline at constant speed."""
    if not dt_ms > 0:
        raise ValueError(f"dt must be positive, got {dt_ms}")
    vue.s = min(vue.s + vue.plan.velocity_kmh * KMH_TO_M_PER_MS * dt_ms, vue.route.length)
    vue.x, vue.y = vue.route.position_at(vue.s)
    vue.heading = vue.route.heading_at(vue.s)
    vue.finished = vue.s >= vue.route.length
    return vue


@dataclass
class TrajectoryDataset:
    """Columnar (x, y, period, t_ms, route) samples. route is the class label."""

    x: np.ndarray
    y: np.ndarray
    period: np.ndarray
    t_ms: np.ndarray
    route: np.ndarray

    def __post_init__(self):
        n = len(self.x)
        for name in ("y", "period", "t_ms", "route"):
            if len(getattr(self, name)) != n:
                raise ValueError("dataset columns have mismatched lengths")

    @property
    def n_rows(self) -> int:
        return len(self.x)

    def features(self) -> np.ndarray:
        """(n, 4) feature matrix in the fixed column order x, y, period, t_ms."""
        return np.column_stack([self.x, self.y,
                                self.period.astype(np.float64),
                                self.t_ms]).astype(np.float64)

    def labels(self) -> np.ndarray:
        return self.route.astype(np.int64)

    def subset(self, idx: np.ndarray) -> "TrajectoryDataset":
        return TrajectoryDataset(self.x[idx], self.y[idx], self.period[idx],
                                 self.t_ms[idx], self.route[idx])

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(DATASET_CSV_HEADER + "\n")
            for i in range(self.n_rows):
                fh.write(f"{float(self.x[i])!r},{float(self.y[i])!r},"
                         f"{int(self.period[i])},{float(self.t_ms[i])!r},"
                         f"{int(self.route[i])}\n")

    @classmethod
    def load_csv(cls, path) -> "TrajectoryDataset":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != DATASET_CSV_HEADER:
                raise ConfigurationError(f"unexpected dataset header {header!r}")
            cols = ([], [], [], [], [])
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                for c, v in zip(cols, parts):
                    c.append(v)
        return cls(
            x=np.array(cols[0], dtype=np.float64),
            y=np.array(cols[1], dtype=np.float64),
            period=np.array(cols[2], dtype=np.int64),
            t_ms=np.array(cols[3], dtype=np.float64),
            route=np.array(cols[4], dtype=np.int64),
        )


def sample_tics(length_m: float, velocity_kmh: float, sample_every: int,
                horizon_ms: float, tic_ms: float) -> np.ndarray:
    """Sampling tic indices k*sample_every while the vehicle is still moving.

    Tic T spans (T-1, T]; T is sampled only if the vehicle had not completed
    its route before the tic began, so the arrival tic is the last possible
    sample.
    """
    horizon_tics = int(round(horizon_ms / tic_ms))
    ks = np.arange(1, horizon_tics // sample_every + 1)
    tic_idx = ks * sample_every
    v_m_per_tic = velocity_kmh * KMH_TO_M_PER_MS * tic_ms
    still_moving = (tic_idx - 1) * v_m_per_tic < length_m
    return tic_idx[still_moving]


def generate_dataset(
    network: RouteNetwork,
    demands: list[TimePeriodDemand],
    velocity_kmh: float,
    sample_every: int,
    seed: int,
    *,
    jitter_sigma_m: float = 2.0,
    horizon_ms: float = DEFAULT_HORIZON_MS,
    tic_ms: float = DEFAULT_TIC_MS,
    period_duration_ms: float = DEFAULT_PERIOD_DURATION_MS,
) -> TrajectoryDataset:
    """Simulate every planned vehicle for up to the horizon and collect samples.

    Positions are sampled every `sample_every` tics and labelled with the
    vehicle's route. Gaussian jitter (sigma = jitter_sigma_m) is added to the
    sampled coordinates only; ground-truth motion stays on the polyline.
    """
    if sample_every < 1:
        raise ConfigurationError(f"sample_every must be >= 1, got {sample_every}")
    xs, ys, periods, ts, labels = [], [], [], [], []
    vid = 0
    for p_idx, demand in enumerate(demands):
        plans = sample_departures(
            demand, velocity_kmh, _mix_seed(seed, p_idx), period_index=p_idx,
            period_duration_ms=period_duration_ms, id_offset=vid)
        vid += len(plans)
        for plan in plans:
            route = network.routes[plan.route_id]
            tic_idx = sample_tics(route.length, velocity_kmh, sample_every,
                                  horizon_ms, tic_ms)
            if tic_idx.size == 0:
                continue
            t_elapsed = tic_idx.astype(np.float64) * tic_ms
            pos = route.positions_at(velocity_kmh * KMH_TO_M_PER_MS * t_elapsed)
            xs.append(pos[:, 0])
            ys.append(pos[:, 1])
            periods.append(np.full(len(tic_idx), p_idx, dtype=np.int64))
            ts.append(plan.depart_ms + t_elapsed)
            labels.append(np.full(len(tic_idx), plan.route_id, dtype=np.int64))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if jitter_sigma_m > 0:
        jit_rng = np.random.default_rng(_mix_seed(seed, 0xA11CE))
        x = x + jit_rng.normal(0.0, jitter_sigma_m, size=len(x))
        y = y + jit_rng.normal(0.0, jitter_sigma_m, size=len(y))
    return TrajectoryDataset(x=x, y=y, period=np.concatenate(periods),
                             t_ms=np.concatenate(ts), route=np.concatenate(labels))


def _mix_seed(seed: int, tag: int) -> int:
    """Derive a stream-specific seed; see udnsim.seeding for the mixer."""
    from udnsim.seeding import derive_seed
    return derive_seed(seed, tag)
