"""Per-tic simulation engines: a compiled fast path and a scalar reference.

Both engines consume the same precomputed scenario tables (per-route
positions and link budgets over the horizon, valid because vehicles on a
route traverse it identically at constant speed) and must produce identical
handover counts, RLF counts, and event streams. The fast path runs the whole
per-tic pipeline in a numba kernel; the reference path drives the plain
candidate_sets/select_target/HandoverFsm implementations and exists to pin
the kernel's semantics in tests and to emit debug traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from udnsim import handover as ho
from udnsim.deployment import ScnSite, screening_angle
from udnsim.mobility import (KMH_TO_M_PER_MS, RouteNetwork, VuePlan, VueState)
from udnsim.radio import RadioParams, db_to_linear, noise_power_dbm, rx_power_dbm
from udnsim.seeding import derive_seed, measurement_noise_db, position_jitter_m

EVENT_CODES = {ho.EVENT_NONE: 0, ho.EVENT_TRIGGERED: 1,
               ho.EVENT_EXECUTED: 2, ho.EVENT_BLOCKED: 3}

DEFAULT_RLF_WINDOW_TICS = 50
_JITTER_STREAM_TAG = 0x11


@dataclass(frozen=True)
class EngineParams:
    """Per-run scalar knobs shared by both engines."""

    ttt: int
    hysteresis_db: float
    sinr_min_db: float
    exec_time_tics: int
    rlf_window_tics: int
    screening_distance_m: float
    communication_range_m: float
    noise_mw: float
    measurement_noise_db: float
    half_angle_deg: float          # screening_angle(velocity) / 2
    tic_ms: float
    cio_gain: float = 0.0          # best_cio - current_cio, 0 without load balancing
    prediction_jitter_m: float = 0.0   # positioning noise on classifier inputs


@dataclass
class ScenarioTables:
    """Pure-function caches over (deployment, route network, velocity, horizon)."""

    sites: list
    n_tics: int
    route_pos: np.ndarray          # (3, T+1, 2)
    rx_lin: np.ndarray             # (3, T+1, K) linear mW over 3D distance
    ground_dist: np.ndarray        # (3, T+1, K)
    in_range: np.ndarray           # (3, T+1, K) bool
    total_in_range: np.ndarray     # (3, T+1)
    bearing_deg: np.ndarray        # (3, T+1, K); 0 where ground_dist == 0
    axis_deg: np.ndarray           # (3, T+1, 3) cone axis per predicted route


def build_tables(sites: list, network: RouteNetwork, velocity_kmh: float,
                 horizon_ms: float, tic_ms: float, params: RadioParams) -> ScenarioTables:
    n_tics = int(round(horizon_ms / tic_ms))
    k = len(sites)
    xs = np.array([s.x for s in sites])
    ys = np.array([s.y for s in sites])
    hs = np.array([s.height for s in sites])
    t_ms = np.arange(n_tics + 1, dtype=np.float64) * tic_ms
    arc = velocity_kmh * KMH_TO_M_PER_MS * t_ms

    route_pos = np.empty((3, n_tics + 1, 2))
    rx_lin = np.empty((3, n_tics + 1, k))
    ground = np.empty((3, n_tics + 1, k))
    bearing = np.zeros((3, n_tics + 1, k))
    axis = np.empty((3, n_tics + 1, 3))
    for r, route in enumerate(network.routes):
        pos = route.positions_at(arc)
        route_pos[r] = pos
        dx = xs[None, :] - pos[:, 0:1]
        dy = ys[None, :] - pos[:, 1:2]
        g = np.hypot(dx, dy)
        ground[r] = g
        dz = hs[None, :] - params.vue_antenna_height_m
        dist3d = np.sqrt(dx * dx + dy * dy + dz * dz)
        rx_lin[r] = db_to_linear(rx_power_dbm(params, dist3d))
        nz = g > 0
        bearing[r][nz] = np.degrees(np.arctan2(dy[nz], dx[nz])) % 360.0
        for pr, pred_route in enumerate(network.routes):
            s_near = _nearest_arclengths(pred_route, pos)
            axis[r, :, pr] = _headings_at(pred_route, s_near)

    in_range = ground <= params.communication_range_m
    total = np.sum(rx_lin * in_range, axis=2)
    return ScenarioTables(sites=sites, n_tics=n_tics, route_pos=route_pos,
                          rx_lin=rx_lin, ground_dist=ground, in_range=in_range,
                          total_in_range=total, bearing_deg=bearing, axis_deg=axis)


def _nearest_arclengths(route, points: np.ndarray) -> np.ndarray:
    """Vectorised Route.nearest_arclength over (n, 2) points."""
    a = route.waypoints[:-1]
    ab = route.waypoints[1:] - a
    seg_len2 = np.sum(ab * ab, axis=1)
    # (n, segs) clamped projection parameter
    t = (points[:, None, :] - a[None, :, :]) * ab[None, :, :]
    t = np.clip(t.sum(axis=2) / seg_len2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d2 = np.sum((proj - points[:, None, :]) ** 2, axis=2)
    i = np.argmin(d2, axis=1)   # first minimum -> smallest arc length
    rows = np.arange(len(points))
    return route.cum_lengths[i] + t[rows, i] * np.sqrt(seg_len2[i])


def _headings_at(route, arcs: np.ndarray) -> np.ndarray:
    s = np.clip(arcs, 0.0, route.length)
    i = np.clip(np.searchsorted(route.cum_lengths, s, side="right") - 1,
                0, len(route.waypoints) - 2)
    ab = route.waypoints[i + 1] - route.waypoints[i]
    return np.degrees(np.arctan2(ab[:, 1], ab[:, 0])) % 360.0


def initial_serving(tables: ScenarioTables) -> int:
    """Highest-SINR in-range site at the route origin (all routes share it).

    Falls back to the globally strongest site when nothing is in range;
    attachment is not a handover and is not counted.
    """
    rx = tables.rx_lin[0, 0]
    mask = tables.in_range[0, 0]
    if mask.any():
        masked = np.where(mask, rx, -np.inf)
        return int(np.argmax(masked))
    return int(np.argmax(rx))


@dataclass
class IterationResult:
    """Outcome of one simulated iteration (one deployment, one VUE stream)."""

    ho_times: int
    rlf_count: int
    ho_avg_sinr_db: float
    ho_times_per_vue: np.ndarray
    rlf_per_vue: np.ndarray
    events: np.ndarray | None = None   # (n_tics, n_vues) int8 codes, if collected


@njit(cache=True)
def _ang_diff(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return 360.0 - d if d > 180.0 else d


@njit(cache=True)
def _noise_u64(seed, vue, site, tic, sigma):
    return measurement_noise_db(np.uint64(seed), np.uint64(vue), np.uint64(site),
                                np.uint64(tic), sigma)


@njit(cache=True)
def _jitter_features(seed, t, sigma, xs, ys):
    for v in range(xs.shape[0]):
        dx, dy = position_jitter_m(np.uint64(seed), np.uint64(v), np.uint64(t), sigma)
        xs[v] += dx
        ys[v] += dy


@njit(cache=True)
def _step_tick(t, route_ids, serving, predictions,
               hist, hist_len, hist_idx, trigger, timer, exec_rem,
               ho_times, rlf_timer, rlf_count, ho_sinr_sum, ho_sinr_cnt,
               rx_lin, in_range, total_lin, ground, bearing, axis,
               half_angle, cone_radius, noise_mw, sinr_min, hys, cio_gain,
               ttt, exec_time, rlf_window, sigma, noise_seed, events):
    n = route_ids.shape[0]
    k = rx_lin.shape[2]
    for v in range(n):
        r = route_ids[v]
        serv = serving[v]
        s_pow = rx_lin[r, t, serv]
        if in_range[r, t, serv]:
            interf = total_lin[r, t] - s_pow
        else:
            interf = total_lin[r, t]
        true_serv = 10.0 * math.log10(s_pow / (noise_mw + interf))
        meas_serv = true_serv + _noise_u64(noise_seed, v, serv, t, sigma)

        pred = predictions[v]
        # best predicted (kj) and best unpredicted (ki) candidates
        kj_id = -1
        kj = -np.inf
        ki_id = -1
        ki = -np.inf
        ki_true = 0.0
        kj_true = 0.0
        for s in range(k):
            if s == serv or not in_range[r, t, s]:
                continue
            p = rx_lin[r, t, s]
            true_s = 10.0 * math.log10(p / (noise_mw + total_lin[r, t] - p))
            meas_s = true_s + _noise_u64(noise_seed, v, s, t, sigma)
            if pred < 0:
                in_cone = True
            else:
                g = ground[r, t, s]
                if g > cone_radius:
                    in_cone = False
                elif g == 0.0:
                    in_cone = True
                else:
                    in_cone = _ang_diff(bearing[r, t, s], axis[r, t, pred]) <= half_angle
            if in_cone:
                if meas_s > kj:
                    kj = meas_s
                    kj_id = s
                    kj_true = true_s
            else:
                if meas_s > ki:
                    ki = meas_s
                    ki_id = s
                    ki_true = true_s

        # target selection mirroring handover.select_target
        tgt_id = serv
        tgt_score = meas_serv
        tgt_true = true_serv
        if kj_id >= 0 or ki_id >= 0:
            if kj_id >= 0:
                if kj > tgt_score or (kj == tgt_score and kj_id < tgt_id):
                    tgt_id = kj_id
                    tgt_score = kj
                    tgt_true = kj_true
            if ki_id >= 0:
                ki_eff = ki
                if kj_id >= 0 and ki > kj and ki > meas_serv:
                    ki_eff = ki - (ki - max(kj, meas_serv)) * 3.0
                if ki_eff > tgt_score or (ki_eff == tgt_score and ki_id < tgt_id):
                    tgt_id = ki_id
                    tgt_score = ki_eff
                    tgt_true = ki_true

        # trigger state machine (handover.HandoverFsm.step)
        hist[v, hist_idx[v]] = meas_serv
        hist_idx[v] = (hist_idx[v] + 1) % 10
        if hist_len[v] < 10:
            hist_len[v] += 1
        event = 0
        if exec_rem[v] > 0:
            exec_rem[v] -= 1
            event = 3
        elif hist_len[v] < 10:
            event = 0
        elif tgt_id == serv:
            trigger[v] = 0
            timer[v] = 0
        else:
            avg = 0.0
            for i in range(10):
                avg += hist[v, i]
            avg /= 10.0
            if tgt_score > sinr_min and (tgt_score - avg + cio_gain) > hys:
                trigger[v] = 1
                timer[v] += 1
                if timer[v] == ttt:
                    serving[v] = tgt_id
                    exec_rem[v] = exec_time
                    ho_times[v] += 1
                    trigger[v] = 0
                    timer[v] = 0
                    hist_len[v] = 0
                    hist_idx[v] = 0
                    ho_sinr_sum[v] += tgt_true
                    ho_sinr_cnt[v] += 1
                    event = 2
                else:
                    event = 1
            else:
                trigger[v] = 0
                timer[v] = 0

        # radio-link failure bookkeeping on the true serving SINR
        if event == 2:
            rlf_timer[v] = 0
        elif true_serv < sinr_min:
            rlf_timer[v] += 1
            if rlf_timer[v] == rlf_window:
                best_id = -1
                best_pow = -np.inf
                for s in range(k):
                    if in_range[r, t, s] and rx_lin[r, t, s] > best_pow:
                        best_pow = rx_lin[r, t, s]
                        best_id = s
                rlf_timer[v] = 0
                if best_id >= 0:
                    rlf_count[v] += 1
                    serving[v] = best_id
                    trigger[v] = 0
                    timer[v] = 0
                    exec_rem[v] = 0
                    hist_len[v] = 0
                    hist_idx[v] = 0
        else:
            rlf_timer[v] = 0
        events[v] = event


def run_fast(tables: ScenarioTables, plans: list[VuePlan], predictor,
             params: EngineParams, noise_seed: int,
             collect_events: bool = False) -> IterationResult:
    """Simulate all planned VUEs over the horizon with the compiled kernel.

    predictor is None (conventional mode), an OracleRoutePredictor, or a
    fitted classifier with predict(). Predictions refresh every tic.
    """
    from udnsim.ml.oracle import OracleRoutePredictor

    n = len(plans)
    if n == 0 or len(tables.sites) == 0:
        return IterationResult(0, 0, float("nan"), np.zeros(0, np.int64),
                               np.zeros(0, np.int64))
    route_ids = np.array([p.route_id for p in plans], dtype=np.int64)
    periods = np.array([p.period_index for p in plans], dtype=np.float64)
    departs = np.array([p.depart_ms for p in plans], dtype=np.float64)

    serving = np.full(n, initial_serving(tables), dtype=np.int64)
    hist = np.zeros((n, 10))
    hist_len = np.zeros(n, dtype=np.int64)
    hist_idx = np.zeros(n, dtype=np.int64)
    trigger = np.zeros(n, dtype=np.int64)
    timer = np.zeros(n, dtype=np.int64)
    exec_rem = np.zeros(n, dtype=np.int64)
    ho_times = np.zeros(n, dtype=np.int64)
    rlf_timer = np.zeros(n, dtype=np.int64)
    rlf_count = np.zeros(n, dtype=np.int64)
    ho_sinr_sum = np.zeros(n)
    ho_sinr_cnt = np.zeros(n, dtype=np.int64)
    events_tick = np.zeros(n, dtype=np.int8)
    all_events = np.zeros((tables.n_tics, n), dtype=np.int8) if collect_events else None

    oracle = isinstance(predictor, OracleRoutePredictor)
    cone_radius = min(params.screening_distance_m, params.communication_range_m)
    none_pred = np.full(n, -1, dtype=np.int64)
    jitter_seed = np.uint64(derive_seed(noise_seed, _JITTER_STREAM_TAG))
    noise_seed = np.uint64(noise_seed)

    for t in range(1, tables.n_tics + 1):
        if predictor is None:
            predictions = none_pred
        elif oracle:
            predictions = route_ids
        else:
            feats = np.empty((n, 4))
            feats[:, 0] = tables.route_pos[route_ids, t, 0]
            feats[:, 1] = tables.route_pos[route_ids, t, 1]
            feats[:, 2] = periods
            feats[:, 3] = departs + t * params.tic_ms
            if params.prediction_jitter_m > 0:
                _jitter_features(np.uint64(jitter_seed), t, params.prediction_jitter_m,
                                 feats[:, 0], feats[:, 1])
            predictions = predictor.predict(feats).astype(np.int64)
        _step_tick(t, route_ids, serving, predictions,
                   hist, hist_len, hist_idx, trigger, timer, exec_rem,
                   ho_times, rlf_timer, rlf_count, ho_sinr_sum, ho_sinr_cnt,
                   tables.rx_lin, tables.in_range, tables.total_in_range,
                   tables.ground_dist, tables.bearing_deg, tables.axis_deg,
                   params.half_angle_deg, cone_radius, params.noise_mw,
                   params.sinr_min_db, params.hysteresis_db, params.cio_gain,
                   params.ttt, params.exec_time_tics, params.rlf_window_tics,
                   params.measurement_noise_db, np.uint64(noise_seed), events_tick)
        if collect_events:
            all_events[t - 1] = events_tick

    total_cnt = int(ho_sinr_cnt.sum())
    avg = float(ho_sinr_sum.sum() / total_cnt) if total_cnt else float("nan")
    return IterationResult(int(ho_times.sum()), int(rlf_count.sum()), avg,
                           ho_times, rlf_count, all_events)


def run_reference(tables: ScenarioTables, plans: list[VuePlan], predictor,
                  params: EngineParams, noise_seed: int, network: RouteNetwork,
                  radio: RadioParams, collect_events: bool = False,
                  trace=None) -> IterationResult:
    """Scalar twin of run_fast built on the plain handover primitives.

    Slow; intended for conformance tests, tiny scenarios, and debug traces.
    trace, when given, is a callable receiving per-tic rows
    (tic, vue_id, serving, target, best_sinr, avg_sinr, event).
    """
    from udnsim.ml.oracle import OracleRoutePredictor

    n = len(plans)
    if n == 0 or len(tables.sites) == 0:
        return IterationResult(0, 0, float("nan"), np.zeros(0, np.int64),
                               np.zeros(0, np.int64))
    sites = tables.sites
    oracle = isinstance(predictor, OracleRoutePredictor)
    serving0 = initial_serving(tables)
    fsms = [ho.HandoverFsm(serving_scn=serving0, ttt=params.ttt,
                           ho_hys=params.hysteresis_db, sinr_min=params.sinr_min_db,
                           best_cio=params.cio_gain, current_cio=0.0,
                           ho_exec_time=params.exec_time_tics) for _ in plans]
    rlf_timer = [0] * n
    rlf_count = np.zeros(n, dtype=np.int64)
    ho_sinr_sum = 0.0
    ho_sinr_cnt = 0
    all_events = np.zeros((tables.n_tics, n), dtype=np.int8) if collect_events else None

    vues = [VueState(plan=p, route=network.routes[p.route_id]) for p in plans]
    jitter_seed = np.uint64(derive_seed(noise_seed, _JITTER_STREAM_TAG))
    noise_seed = np.uint64(noise_seed)
    for t in range(1, tables.n_tics + 1):
        for v, plan in enumerate(plans):
            r = plan.route_id
            x, y = tables.route_pos[r, t]
            vue = vues[v]
            vue.s = min(plan.velocity_kmh * KMH_TO_M_PER_MS * (t * params.tic_ms),
                        vue.route.length)
            vue.x, vue.y = x, y
            fsm = fsms[v]
            serv = fsm.serving_scn

            s_pow = tables.rx_lin[r, t, serv]
            if tables.in_range[r, t, serv]:
                interf = tables.total_in_range[r, t] - s_pow
            else:
                interf = tables.total_in_range[r, t]
            true_serv = 10.0 * math.log10(s_pow / (params.noise_mw + interf))
            meas_serv = true_serv + _noise_u64(noise_seed, v, serv, t,
                                               params.measurement_noise_db)

            if predictor is None:
                pred = None
            elif oracle:
                pred = r
            else:
                dx, dy = position_jitter_m(np.uint64(jitter_seed), np.uint64(v),
                                           np.uint64(t), params.prediction_jitter_m)
                feats = np.array([[x + dx, y + dy, float(plan.period_index),
                                   plan.depart_ms + t * params.tic_ms]])
                pred = int(predictor.predict(feats)[0])

            cands = ho.candidate_sets(vue, sites[serv], sites, pred, network, radio,
                                      screening_distance_m=params.screening_distance_m)
            sinr_of = {}
            true_of = {serv: true_serv}
            for s in cands.predicted + cands.unpredicted:
                p_lin = tables.rx_lin[r, t, s.id]
                true_s = 10.0 * math.log10(
                    p_lin / (params.noise_mw + tables.total_in_range[r, t] - p_lin))
                true_of[s.id] = true_s
                sinr_of[s.id] = true_s + _noise_u64(noise_seed, v, s.id, t,
                                                    params.measurement_noise_db)
            target, best_sinr = ho.select_target(cands, sinr_of, meas_serv)
            event = fsm.step(target, best_sinr, meas_serv)
            if event == ho.EVENT_EXECUTED:
                ho_sinr_sum += true_of[target.id]
                ho_sinr_cnt += 1
                rlf_timer[v] = 0
            elif true_serv < params.sinr_min_db:
                rlf_timer[v] += 1
                if rlf_timer[v] == params.rlf_window_tics:
                    rlf_timer[v] = 0
                    in_range_ids = np.flatnonzero(tables.in_range[r, t])
                    if len(in_range_ids):
                        best = in_range_ids[np.argmax(tables.rx_lin[r, t, in_range_ids])]
                        rlf_count[v] += 1
                        fsm.serving_scn = int(best)
                        fsm.ho_trigger = 0
                        fsm.ho_timer = 0
                        fsm.ho_exec_remaining = 0
                        fsm.clear_history()
            else:
                rlf_timer[v] = 0
            if collect_events:
                all_events[t - 1, v] = EVENT_CODES[event]
            if trace is not None:
                avg = fsm.avg_sinr if fsm.hist_len >= ho.SINR_HISTORY_LEN else float("nan")
                trace(t, v, fsm.serving_scn, target.id, best_sinr, avg, event)

    ho_times = np.array([f.ho_times for f in fsms], dtype=np.int64)
    avg = ho_sinr_sum / ho_sinr_cnt if ho_sinr_cnt else float("nan")
    return IterationResult(int(ho_times.sum()), int(rlf_count.sum()), float(avg),
                           ho_times, rlf_count, all_events)


def engine_params_from(radio: RadioParams, velocity_kmh: float, ttt: int,
                       tic_ms: float,
                       hysteresis_db: float = ho.DEFAULT_HYSTERESIS_DB,
                       exec_time_tics: int = ho.DEFAULT_EXEC_TIME_TICS,
                       rlf_window_tics: int = DEFAULT_RLF_WINDOW_TICS,
                       screening_distance_m: float = ho.DEFAULT_SCREENING_DISTANCE_M,
                       measurement_noise: float = 2.0) -> EngineParams:
    return EngineParams(
        ttt=ttt,
        hysteresis_db=hysteresis_db,
        sinr_min_db=radio.sinr_min_db,
        exec_time_tics=exec_time_tics,
        rlf_window_tics=rlf_window_tics,
        screening_distance_m=screening_distance_m,
        communication_range_m=radio.communication_range_m,
        noise_mw=db_to_linear(noise_power_dbm(radio)),
        measurement_noise_db=measurement_noise,
        half_angle_deg=screening_angle(velocity_kmh) / 2.0,
        tic_ms=tic_ms,
    )
