"""Campaign orchestration: seeded iterations over TTT, velocity, and predictors.

Each iteration samples a fresh deployment and VUE stream from a seed derived
only from (master seed, iteration index), so every grid cell sees the same
sequence of scenarios and reduction ratios are paired comparisons. Results
are emitted as a long-format CSV plus an aggregate table with means and
reduction ratios against the conventional (predictor "none") baseline.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from udnsim.deployment import Area, sample_ppp_deployment
from udnsim.engine import (DEFAULT_RLF_WINDOW_TICS, EngineParams,
                           IterationResult, build_tables, engine_params_from,
                           run_fast, run_reference)
from udnsim.errors import ConfigurationError
from udnsim.mobility import (DEFAULT_PERIOD_DURATION_MS, RouteNetwork,
                             TimePeriodDemand, build_route_network,
                             default_demands, sample_departures)
from udnsim.radio import RadioParams
from udnsim.seeding import derive_seed, iteration_seed

PREDICTOR_KINDS = ("none", "oracle", "svm", "dtc", "rfc")

RESULTS_CSV_HEADER = ("predictor,velocity_kmh,ttt_tics,iteration,"
                      "ho_times,rlf_count,ho_avg_sinr_db")
AGGREGATE_CSV_HEADER = ("predictor,velocity_kmh,ttt_tics,iterations,"
                        "mean_ho_times,mean_rlf_count,mean_ho_avg_sinr_db,"
                        "reduction_vs_none_pct")

_TAG_DEPLOY = 0xD3
_TAG_DEPART = 0xDA
_TAG_NOISE = 0x4E


@dataclass(frozen=True)
class MlParams:
    train_fraction: float = 0.75
    svm_epochs: int = 40
    svm_learning_rate: float = 0.5
    svm_regularization: float = 1e-4
    dtc_max_depth: int | None = None
    dtc_min_samples_leaf: int = 1
    rfc_n_trees: int = 100
    rfc_max_depth: int | None = None
    rfc_min_samples_leaf: int = 1
    rfc_feature_subsample: str | None = "sqrt"


@dataclass(frozen=True)
class SimConfig:
    """Resolved scenario configuration (defaults mirror the shipped config)."""

    area: Area = field(default_factory=Area)
    density_per_km2: float = 50.0
    scn_height_m: float = 15.0
    radio: RadioParams = field(default_factory=RadioParams)
    velocity_kmh: float = 40.0
    ttt_tics: int = 4
    predictor: str = "none"
    horizon_ms: float = 70_000.0
    tic_ms: float = 10.0
    iterations: int = 100
    master_seed: int = 11
    load_factor: float = 0.05
    demands: tuple = field(default_factory=lambda: tuple(default_demands()))
    period_duration_ms: float = DEFAULT_PERIOD_DURATION_MS
    hysteresis_db: float = 3.0
    exec_time_tics: int = 25
    screening_distance_m: float = 300.0
    measurement_noise_db: float = 2.0
    rlf_window_tics: int = DEFAULT_RLF_WINDOW_TICS
    best_cio_db: float = 0.0
    current_cio_db: float = 0.0
    sample_every_tics: int = 500
    jitter_sigma_m: float = 2.0
    ml: MlParams = field(default_factory=MlParams)

    def __post_init__(self):
        n_tics = self.horizon_ms / self.tic_ms
        if abs(n_tics - round(n_tics)) > 1e-9:
            raise ConfigurationError(
                f"horizon {self.horizon_ms} ms not divisible by tic {self.tic_ms} ms")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.ttt_tics < 1:
            raise ConfigurationError(f"ttt must be >= 1 tic, got {self.ttt_tics}")
        if not 0 < self.load_factor <= 1:
            raise ConfigurationError(f"load_factor must be in (0, 1], got {self.load_factor}")
        if self.predictor not in PREDICTOR_KINDS:
            raise ConfigurationError(f"unknown predictor {self.predictor!r}")
        if self.measurement_noise_db < 0:
            raise ConfigurationError("measurement noise sigma must be >= 0")

    def network(self) -> RouteNetwork:
        return build_route_network(self.area.width, self.area.height)

    def engine_params(self, velocity_kmh=None, ttt=None) -> EngineParams:
        base = engine_params_from(
            self.radio, velocity_kmh or self.velocity_kmh, ttt or self.ttt_tics,
            self.tic_ms, hysteresis_db=self.hysteresis_db,
            exec_time_tics=self.exec_time_tics, rlf_window_tics=self.rlf_window_tics,
            screening_distance_m=self.screening_distance_m,
            measurement_noise=self.measurement_noise_db)
        return replace(base, cio_gain=self.best_cio_db - self.current_cio_db,
                       prediction_jitter_m=self.jitter_sigma_m)

    def scaled_demands(self) -> list[TimePeriodDemand]:
        scaled = []
        for d in self.demands:
            counts = {r: int(np.rint(c * self.load_factor)) for r, c in d.counts.items()}
            if sum(counts.values()) > 0:
                scaled.append(TimePeriodDemand(d.period_label, counts))
        if not scaled:
            raise ConfigurationError(
                f"load_factor {self.load_factor} scales every demand to zero VUEs")
        return scaled


def sample_iteration_plans(config: SimConfig, seed: int, velocity_kmh: float):
    """The VUE stream for one iteration: scaled demands, all periods."""
    plans = []
    for p_idx, demand in enumerate(config.scaled_demands()):
        plans.extend(sample_departures(
            demand, velocity_kmh, derive_seed(seed, _TAG_DEPART, p_idx),
            period_index=p_idx, period_duration_ms=config.period_duration_ms,
            id_offset=len(plans)))
    return plans


def run_simulation(config: SimConfig, seed: int, predictor=None, *,
                   velocity_kmh=None, ttt=None, engine: str = "fast",
                   collect_events: bool = False, trace=None) -> IterationResult:
    """One seeded iteration: fresh deployment, VUE stream, full tic loop."""
    velocity = velocity_kmh or config.velocity_kmh
    sites = sample_ppp_deployment(
        config.density_per_km2, config.area, derive_seed(seed, _TAG_DEPLOY),
        height=config.scn_height_m, tx_power=config.radio.tx_power_dbm,
        antenna_gain=config.radio.scn_antenna_gain_dbi)
    if not sites:
        return IterationResult(0, 0, float("nan"), np.zeros(0, np.int64),
                               np.zeros(0, np.int64))
    network = config.network()
    tables = build_tables(sites, network, velocity, config.horizon_ms,
                          config.tic_ms, config.radio)
    plans = sample_iteration_plans(config, seed, velocity)
    params = config.engine_params(velocity_kmh=velocity, ttt=ttt)
    noise_seed = derive_seed(seed, _TAG_NOISE)
    if engine == "fast":
        return run_fast(tables, plans, predictor, params, noise_seed,
                        collect_events=collect_events)
    if engine == "reference":
        return run_reference(tables, plans, predictor, params, noise_seed,
                             network, config.radio, collect_events=collect_events,
                             trace=trace)
    raise ConfigurationError(f"unknown engine {engine!r}")


@dataclass(frozen=True)
class CampaignRow:
    predictor: str
    velocity_kmh: float
    ttt_tics: int
    iteration: int
    ho_times: int
    rlf_count: int
    ho_avg_sinr_db: float

    def csv_row(self) -> str:
        return (f"{self.predictor},{self.velocity_kmh!r},{self.ttt_tics},"
                f"{self.iteration},{self.ho_times},{self.rlf_count},"
                f"{self.ho_avg_sinr_db!r}")


def run_campaign(config: SimConfig, *, ttt_values, velocities, predictors,
                 models: dict | None = None, iterations: int | None = None,
                 progress=None) -> list[CampaignRow]:
    """Averageable long-format results over the full grid.

    Deployments and link tables are shared across (ttt, predictor) cells
    within an iteration, and across predictors the measurement noise stream
    is identical, so cells differ only in the knob under study. models maps
    trained predictor kinds to fitted classifiers; "none" and "oracle" need
    no entry.
    """
    from udnsim.ml.oracle import OracleRoutePredictor

    models = dict(models or {})
    models.setdefault("oracle", OracleRoutePredictor())
    iters = iterations or config.iterations
    for kind in predictors:
        if kind not in PREDICTOR_KINDS:
            raise ConfigurationError(f"unknown predictor {kind!r}")
        if kind not in ("none", "oracle") and kind not in models:
            raise ConfigurationError(f"predictor {kind!r} requested but no model supplied")

    network = config.network()
    results = {}
    for i in range(iters):
        seed = iteration_seed(config.master_seed, i)
        sites = sample_ppp_deployment(
            config.density_per_km2, config.area, derive_seed(seed, _TAG_DEPLOY),
            height=config.scn_height_m, tx_power=config.radio.tx_power_dbm,
            antenna_gain=config.radio.scn_antenna_gain_dbi)
        noise_seed = derive_seed(seed, _TAG_NOISE)
        for velocity in velocities:
            plans = sample_iteration_plans(config, seed, velocity)
            tables = (build_tables(sites, network, velocity, config.horizon_ms,
                                   config.tic_ms, config.radio)
                      if sites else None)
            for ttt in ttt_values:
                params = config.engine_params(velocity_kmh=velocity, ttt=ttt)
                for kind in predictors:
                    predictor = None if kind == "none" else models[kind]
                    if tables is None:
                        res = IterationResult(0, 0, float("nan"),
                                              np.zeros(0, np.int64),
                                              np.zeros(0, np.int64))
                    else:
                        res = run_fast(tables, plans, predictor, params, noise_seed)
                    results[(kind, velocity, ttt, i)] = res
                    if progress is not None:
                        progress(kind, velocity, ttt, i, res)

    rows = []
    for kind in predictors:
        for velocity in velocities:
            for ttt in ttt_values:
                for i in range(iters):
                    res = results[(kind, velocity, ttt, i)]
                    rows.append(CampaignRow(kind, float(velocity), int(ttt), i,
                                            res.ho_times, res.rlf_count,
                                            res.ho_avg_sinr_db))
    return rows


def reduction_ratio(baseline: float, with_mp: float) -> float:
    """Percent reduction of handovers relative to the baseline mean."""
    if baseline == 0:
        raise ValueError("reduction ratio undefined for a zero baseline")
    return 100.0 * (baseline - with_mp) / baseline


def aggregate_rows(rows: list[CampaignRow]) -> list[dict]:
    """Per-cell means plus reduction vs the 'none' cell at the same grid point."""
    cells = {}
    for r in rows:
        cells.setdefault((r.predictor, r.velocity_kmh, r.ttt_tics), []).append(r)
    out = []
    for (kind, velocity, ttt), cell in cells.items():
        ho = np.array([r.ho_times for r in cell], dtype=np.float64)
        rlf = np.array([r.rlf_count for r in cell], dtype=np.float64)
        sinrs = np.array([r.ho_avg_sinr_db for r in cell], dtype=np.float64)
        with np.errstate(invalid="ignore"):
            mean_sinr = float(np.nanmean(sinrs)) if np.any(~np.isnan(sinrs)) else float("nan")
        out.append({
            "predictor": kind, "velocity_kmh": velocity, "ttt_tics": ttt,
            "iterations": len(cell), "mean_ho_times": float(ho.mean()),
            "mean_rlf_count": float(rlf.mean()), "mean_ho_avg_sinr_db": mean_sinr,
        })
    baselines = {(c["velocity_kmh"], c["ttt_tics"]): c["mean_ho_times"]
                 for c in out if c["predictor"] == "none"}
    for c in out:
        base = baselines.get((c["velocity_kmh"], c["ttt_tics"]))
        if c["predictor"] != "none" and base:
            c["reduction_vs_none_pct"] = reduction_ratio(base, c["mean_ho_times"])
        else:
            c["reduction_vs_none_pct"] = float("nan")
    return out


def write_results_csv(rows: list[CampaignRow], path) -> None:
    with open(path, "w") as fh:
        fh.write(RESULTS_CSV_HEADER + "\n")
        for r in rows:
            fh.write(r.csv_row() + "\n")


def read_results_csv(path) -> list[CampaignRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != RESULTS_CSV_HEADER:
            raise ConfigurationError(f"unexpected results header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            kind, v, ttt, i, hot, rlf, sinr = line.split(",")
            rows.append(CampaignRow(kind, float(v), int(ttt), int(i), int(hot),
                                    int(rlf), float(sinr)))
    return rows


def write_aggregate_csv(aggregates: list[dict], path) -> None:
    with open(path, "w") as fh:
        fh.write(AGGREGATE_CSV_HEADER + "\n")
        for c in aggregates:
            fh.write(f"{c['predictor']},{c['velocity_kmh']!r},{c['ttt_tics']},"
                     f"{c['iterations']},{c['mean_ho_times']!r},"
                     f"{c['mean_rlf_count']!r},{c['mean_ho_avg_sinr_db']!r},"
                     f"{c['reduction_vs_none_pct']!r}\n")


def summary_table(aggregates: list[dict]) -> str:
    """Human-readable reduction summary, one line per grid cell."""
    lines = [f"{'predictor':>9} {'velocity':>8} {'ttt':>4} {'mean_ho':>10} "
             f"{'mean_rlf':>9} {'reduction%':>10}"]
    for c in aggregates:
        red = c["reduction_vs_none_pct"]
        red_s = f"{red:10.2f}" if red == red else " " * 10
        lines.append(f"{c['predictor']:>9} {c['velocity_kmh']:8.0f} "
                     f"{c['ttt_tics']:>4} {c['mean_ho_times']:10.2f} "
                     f"{c['mean_rlf_count']:9.2f} {red_s}")
    return "\n".join(lines)


@dataclass
class SimReport:
    """Summary of run_simulation over several seeds at one grid point."""

    config: SimConfig
    predictor: str
    iterations: int
    ho_times_total: int
    rlf_total: int
    ho_avg_sinr_db: float
    per_iteration: list
    wall_time_s: float


def simulate_many(config: SimConfig, predictor=None, *, iterations=None) -> SimReport:
    start = time.time()
    iters = iterations or config.iterations
    per_iter = []
    sinr_sum = 0.0
    sinr_n = 0
    for i in range(iters):
        res = run_simulation(config, iteration_seed(config.master_seed, i), predictor)
        per_iter.append((res.ho_times, res.rlf_count, res.ho_avg_sinr_db))
        if res.ho_avg_sinr_db == res.ho_avg_sinr_db:
            sinr_sum += res.ho_avg_sinr_db * res.ho_times
            sinr_n += res.ho_times
    return SimReport(
        config=config, predictor=config.predictor, iterations=iters,
        ho_times_total=sum(p[0] for p in per_iter),
        rlf_total=sum(p[1] for p in per_iter),
        ho_avg_sinr_db=sinr_sum / sinr_n if sinr_n else float("nan"),
        per_iteration=per_iter, wall_time_s=time.time() - start)
