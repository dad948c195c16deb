"""Deterministic seed derivation and counter-based measurement noise.

Every random stream in a simulation derives from the master seed through
splitmix64 mixing, and per-tic SINR measurement noise is a pure hash of
(iteration seed, vue, site, tic). That makes runs reproducible bit-for-bit,
independent of evaluation order, and keeps the noise stream identical across
predictor kinds so campaign comparisons are paired.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _splitmix64(x: np.uint64) -> np.uint64:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _mix(seed: np.uint64, a: np.uint64, b: np.uint64, c: np.uint64) -> np.uint64:
    h = _splitmix64(np.uint64(seed))
    h = _splitmix64(h ^ np.uint64(a))
    h = _splitmix64(h ^ np.uint64(b))
    h = _splitmix64(h ^ np.uint64(c))
    return h


@njit(cache=True)
def _uniform_from(h: np.uint64) -> np.float64:
    # 53 high bits -> (0, 1]; never exactly 0 so log() below is safe
    return (np.float64(h >> np.uint64(11)) + 1.0) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def measurement_noise_db(seed: np.uint64, vue: np.uint64, site: np.uint64,
                         tic: np.uint64, sigma_db: np.float64) -> np.float64:
    """Gaussian measurement error, a pure function of its key."""
    if sigma_db <= 0.0:
        return 0.0
    h1 = _mix(seed, vue, site, tic)
    h2 = _splitmix64(h1)
    u1 = _uniform_from(h1)
    u2 = _uniform_from(h2)
    return sigma_db * math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)


_JITTER_X_TAG = np.uint64(0xA11CE)
_JITTER_Y_TAG = np.uint64(0xB0B)


@njit(cache=True)
def position_jitter_m(seed: np.uint64, vue: np.uint64, tic: np.uint64,
                      sigma_m: np.float64):
    """(dx, dy) positioning error for prediction inputs, pure in its key."""
    if sigma_m <= 0.0:
        return 0.0, 0.0
    hx = _mix(seed, vue, _JITTER_X_TAG, tic)
    hy = _mix(seed, vue, _JITTER_Y_TAG, tic)
    gx = math.sqrt(-2.0 * math.log(_uniform_from(hx))) * math.cos(
        TWO_PI * _uniform_from(_splitmix64(hx)))
    gy = math.sqrt(-2.0 * math.log(_uniform_from(hy))) * math.cos(
        TWO_PI * _uniform_from(_splitmix64(hy)))
    return sigma_m * gx, sigma_m * gy


def derive_seed(master: int, *tags: int) -> int:
    """Deterministically derive a sub-seed for a named random stream."""
    h = np.uint64(master & 0xFFFFFFFFFFFFFFFF)
    h = _splitmix64(h)
    for t in tags:
        h = _splitmix64(h ^ np.uint64(t & 0xFFFFFFFFFFFFFFFF))
    return int(h)


def iteration_seed(master: int, iteration: int) -> int:
    """Per-iteration seed: master XOR iteration, shared across grid cells."""
    return (master ^ iteration) & 0xFFFFFFFFFFFFFFFF
