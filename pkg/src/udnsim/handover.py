"""Handover candidate screening, SINR-offset penalty, and trigger state machine.

Conventional mode considers every in-range cell a candidate and targets the
best SINR. Prediction mode splits candidates into a screening cone oriented
along the predicted route (predicted set) and the rest of the in-range cells
(unpredicted set); when the overall best measurement comes from an
unpredicted cell it is penalised by three times its lead so that an in-cone
cell or the serving cell wins target selection instead.

The trigger machine follows standard time-to-trigger semantics: the entry
condition must hold for ttt consecutive tics, a 25-tic execution window
blocks evaluation, and the serving-SINR history that defines avg_sinr is
cleared on every handover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from udnsim.deployment import (ScnSite, ScreeningCone, distance_2d,
                               in_screening_cone, screening_angle)
from udnsim.errors import ConfigurationError
from udnsim.mobility import RouteNetwork, VueState
from udnsim.radio import RadioParams

DEFAULT_SCREENING_DISTANCE_M = 300.0
DEFAULT_HYSTERESIS_DB = 3.0
DEFAULT_EXEC_TIME_TICS = 25
SINR_HISTORY_LEN = 10

EVENT_NONE = "none"
EVENT_TRIGGERED = "triggered"
EVENT_EXECUTED = "executed"
EVENT_BLOCKED = "blocked"


@dataclass
class CandidateSets:
    """Handover candidates around one VUE, serving cell excluded from both."""

    predicted: list[ScnSite]
    unpredicted: list[ScnSite]
    serving: ScnSite


def candidate_sets(
    vue: VueState,
    serving: ScnSite,
    sites: list[ScnSite],
    prediction,
    network: RouteNetwork,
    params: RadioParams,
    screening_distance_m: float = DEFAULT_SCREENING_DISTANCE_M,
) -> CandidateSets:
    """Split the in-range non-serving cells into predicted/unpredicted sets.

    prediction is a route id or None. Without a prediction every in-range
    cell is "predicted" (conventional mode). With one, the screening cone sits
    at the VUE with its axis along the predicted route at that route's nearest
    point to the VUE. Empty sets signal imminent radio-link failure, not an
    error.
    """
    pos = (vue.x, vue.y)
    in_range = [s for s in sites
                if s.id != serving.id and distance_2d(pos, s) <= params.communication_range_m]
    if prediction is None:
        return CandidateSets(predicted=in_range, unpredicted=[], serving=serving)
    route = network.routes[prediction]
    axis = route.heading_at(route.nearest_arclength(pos))
    cone = ScreeningCone(
        apex=pos,
        axis_heading=axis,
        half_angle=screening_angle(vue.plan.velocity_kmh) / 2.0,
        radius=min(screening_distance_m, params.communication_range_m),
    )
    predicted = [s for s in in_range if in_screening_cone(cone, s)]
    unpredicted = [s for s in in_range if not in_screening_cone(cone, s)]
    return CandidateSets(predicted=predicted, unpredicted=unpredicted, serving=serving)


def sinr_offset(ki: float, kj: float, kx: float) -> float:
    """Penalty applied to the best unpredicted SINR: (ki - max(kj, kx)) * 3."""
    return (ki - max(kj, kx)) * 3.0


def _best(sites: list[ScnSite], sinr_of: dict) -> tuple:
    best_site = None
    best_sinr = float("-inf")
    for s in sites:   # iterate as given; strict > keeps the lowest id on ties
        v = sinr_of[s.id]
        if v > best_sinr or (v == best_sinr and best_site is not None and s.id < best_site.id):
            best_site, best_sinr = s, v
    return best_site, best_sinr


def select_target(cands: CandidateSets, sinr_of: dict, serving_sinr: float):
    """Pick the handover target and its SINR from the screened candidates.

    sinr_of maps site id to the measured SINR of that candidate. When the best
    measurement is an unpredicted cell leading both the best predicted cell
    and the serving cell, the offset penalty demotes it below max(kj, kx), so
    it can never be returned in that situation. With no predicted candidates
    the conventional best-SINR rule applies over all in-range cells. Ties go
    to the lowest site id; the returned SINR is the target's unpenalised
    measurement (serving_sinr when the target is the serving cell).
    """
    predicted, unpredicted, serving = cands.predicted, cands.unpredicted, cands.serving
    if not predicted and not unpredicted:
        return serving, serving_sinr

    scored = [(serving, serving_sinr, serving_sinr)]
    scored += [(s, sinr_of[s.id], sinr_of[s.id]) for s in predicted]

    if unpredicted:
        ki_site, ki = _best(unpredicted, sinr_of)
        if predicted:
            _, kj = _best(predicted, sinr_of)
            if ki > kj and ki > serving_sinr:
                scored.append((ki_site, ki - sinr_offset(ki, kj, serving_sinr), ki))
            else:
                scored.append((ki_site, ki, ki))
        else:
            scored.append((ki_site, ki, ki))

    target, _, true_sinr = max(scored, key=lambda e: (e[1], -e[0].id))
    return target, true_sinr


@dataclass
class HandoverFsm:
    """Per-VUE trigger state. Step exactly once per tic after target selection."""

    serving_scn: int
    ttt: int
    ho_hys: float = DEFAULT_HYSTERESIS_DB
    sinr_min: float = -7.0
    best_cio: float = 0.0
    current_cio: float = 0.0
    ho_exec_time: int = DEFAULT_EXEC_TIME_TICS
    ho_trigger: int = 0
    ho_timer: int = 0
    ho_exec_remaining: int = 0
    ho_times: int = 0
    sinr_history: list = field(default_factory=lambda: [0.0] * SINR_HISTORY_LEN)
    hist_len: int = 0
    hist_idx: int = 0

    def __post_init__(self):
        if self.ttt < 1:
            raise ConfigurationError(f"ttt must be >= 1 tic, got {self.ttt}")

    def _push(self, value: float) -> None:
        self.sinr_history[self.hist_idx] = value
        self.hist_idx = (self.hist_idx + 1) % SINR_HISTORY_LEN
        if self.hist_len < SINR_HISTORY_LEN:
            self.hist_len += 1

    def clear_history(self) -> None:
        self.hist_len = 0
        self.hist_idx = 0

    @property
    def avg_sinr(self) -> float:
        """Mean of the full 10-sample history; only defined once it is full."""
        if self.hist_len < SINR_HISTORY_LEN:
            raise ValueError("avg_sinr undefined before 10 samples are collected")
        total = 0.0
        for i in range(SINR_HISTORY_LEN):   # fixed slot order, see engine kernel
            total += self.sinr_history[i]
        return total / SINR_HISTORY_LEN

    def step(self, target: ScnSite, best_sinr: float, serving_sinr: float) -> str:
        """Advance one tic; returns the event that occurred."""
        self._push(serving_sinr)
        if self.ho_exec_remaining > 0:
            self.ho_exec_remaining -= 1
            return EVENT_BLOCKED
        if self.hist_len < SINR_HISTORY_LEN:
            return EVENT_NONE
        if target.id == self.serving_scn:
            self.ho_trigger = 0
            self.ho_timer = 0
            return EVENT_NONE
        entered = (best_sinr > self.sinr_min
                   and (best_sinr - self.avg_sinr + self.best_cio - self.current_cio)
                   > self.ho_hys)
        if entered:
            self.ho_trigger = 1
            self.ho_timer += 1
            if self.ho_timer == self.ttt:
                self.serving_scn = target.id
                self.ho_exec_remaining = self.ho_exec_time
                self.ho_times += 1
                self.ho_trigger = 0
                self.ho_timer = 0
                self.clear_history()
                return EVENT_EXECUTED
            return EVENT_TRIGGERED
        self.ho_trigger = 0
        self.ho_timer = 0
        return EVENT_NONE
