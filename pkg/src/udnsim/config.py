"""Typed INI configuration with sections mirroring the module layout.

Every key has a shipped default (the simulated-city parameter set); a config
file overrides them. Unknown sections or keys and malformed or empty values
are hard errors naming the offender, so typos in radio parameters cannot
silently change a campaign.
"""

from __future__ import annotations

import configparser
from importlib import resources

from udnsim.campaign import MlParams, SimConfig
from udnsim.deployment import Area
from udnsim.errors import ConfigurationError
from udnsim.mobility import TimePeriodDemand
from udnsim.radio import RadioParams


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    return int(text)


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError("seed must be non-negative")
    return v


def _optional_int(text: str):
    return None if text.lower() in ("none", "unlimited") else int(text)


def _subsample(text: str):
    if text.lower() == "none":
        return None
    if text.lower() == "sqrt":
        return "sqrt"
    return int(text)


def _labels(text: str) -> list[str]:
    labels = [t.strip() for t in text.split(",")]
    if any(not t for t in labels):
        raise ValueError("empty period label")
    return labels


def _demand_counts(text: str) -> list[dict[int, int]]:
    periods = []
    for chunk in text.split(";"):
        counts = [int(t) for t in chunk.strip().split(",")]
        if len(counts) != 3:
            raise ValueError(f"each period needs 3 route counts, got {chunk.strip()!r}")
        periods.append({r: c for r, c in enumerate(counts)})
    return periods


SCHEMA = {
    "deployment": {
        "density_per_km2": (_float, "50.0"),
        "area_width_m": (_float, "1000.0"),
        "area_height_m": (_float, "1000.0"),
        "scn_height_m": (_float, "15.0"),
    },
    "radio": {
        "carrier_frequency_ghz": (_float, "6.0"),
        "bandwidth_hz": (_float, "1.0e7"),
        "tx_power_dbm": (_float, "30.0"),
        "scn_antenna_gain_dbi": (_float, "15.0"),
        "rx_antenna_gain_dbi": (_float, "0.0"),
        "noise_figure_db": (_float, "7.0"),
        "communication_range_m": (_float, "300.0"),
        "sinr_min_db": (_float, "-7.0"),
        "vue_antenna_height_m": (_float, "1.5"),
    },
    "mobility": {
        "velocity_kmh": (_float, "40.0"),
        "sample_every_tics": (_int, "500"),
        "jitter_sigma_m": (_float, "2.0"),
        "period_duration_ms": (_float, "3600000.0"),
        "period_labels": (_labels, "07:00-08:00, 08:00-09:00, 17:00-18:00"),
        "demands": (_demand_counts, "1400,400,200; 400,1400,200; 200,400,1400"),
    },
    "ml": {
        "train_fraction": (_float, "0.75"),
        "svm_epochs": (_int, "40"),
        "svm_learning_rate": (_float, "0.5"),
        "svm_regularization": (_float, "1e-4"),
        "dtc_max_depth": (_optional_int, "none"),
        "dtc_min_samples_leaf": (_int, "1"),
        "rfc_n_trees": (_int, "100"),
        "rfc_max_depth": (_optional_int, "none"),
        "rfc_min_samples_leaf": (_int, "1"),
        "rfc_feature_subsample": (_subsample, "sqrt"),
    },
    "handover": {
        "ttt_tics": (_int, "4"),
        "hysteresis_db": (_float, "3.0"),
        "exec_time_tics": (_int, "25"),
        "screening_distance_m": (_float, "300.0"),
        "measurement_noise_db": (_float, "2.0"),
        "rlf_window_tics": (_int, "50"),
        "best_cio_db": (_float, "0.0"),
        "current_cio_db": (_float, "0.0"),
    },
    "campaign": {
        "iterations": (_int, "100"),
        "horizon_ms": (_float, "70000.0"),
        "tic_ms": (_float, "10.0"),
        "load_factor": (_float, "0.05"),
        "master_seed": (_seed, "11"),
        "predictor": (str, "none"),
    },
}


def default_config_text() -> str:
    """The shipped default config, identical to the packaged default.ini."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default) in keys.items():
            lines.append(f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)


def _parse_values(path=None) -> dict:
    values = {s: {k: caster(default) for k, (caster, default) in keys.items()}
              for s, keys in SCHEMA.items()}
    if path is None:
        return values
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown config key {section}.{key}")
            if raw is None or raw.strip() == "":
                raise ConfigurationError(f"missing value for config key {section}.{key}")
            caster, _ = SCHEMA[section][key]
            try:
                values[section][key] = caster(raw.strip())
            except ValueError as exc:
                raise ConfigurationError(
                    f"bad value for config key {section}.{key}: {exc}") from exc
    return values


def load_config(path=None) -> SimConfig:
    """Resolve a SimConfig from defaults plus an optional INI file."""
    v = _parse_values(path)
    dep, rad, mob, ml, hov, cam = (v["deployment"], v["radio"], v["mobility"],
                                   v["ml"], v["handover"], v["campaign"])
    labels = mob["period_labels"]
    demand_counts = mob["demands"]
    if len(labels) != len(demand_counts):
        raise ConfigurationError(
            f"mobility.period_labels has {len(labels)} entries but mobility.demands "
            f"has {len(demand_counts)} periods")
    demands = tuple(TimePeriodDemand(label, counts)
                    for label, counts in zip(labels, demand_counts))
    return SimConfig(
        area=Area(width=dep["area_width_m"], height=dep["area_height_m"]),
        density_per_km2=dep["density_per_km2"],
        scn_height_m=dep["scn_height_m"],
        radio=RadioParams(
            carrier_frequency_ghz=rad["carrier_frequency_ghz"],
            bandwidth_hz=rad["bandwidth_hz"],
            tx_power_dbm=rad["tx_power_dbm"],
            scn_antenna_gain_dbi=rad["scn_antenna_gain_dbi"],
            rx_antenna_gain_dbi=rad["rx_antenna_gain_dbi"],
            noise_figure_db=rad["noise_figure_db"],
            communication_range_m=rad["communication_range_m"],
            sinr_min_db=rad["sinr_min_db"],
            vue_antenna_height_m=rad["vue_antenna_height_m"],
        ),
        velocity_kmh=mob["velocity_kmh"],
        ttt_tics=hov["ttt_tics"],
        predictor=cam["predictor"],
        horizon_ms=cam["horizon_ms"],
        tic_ms=cam["tic_ms"],
        iterations=cam["iterations"],
        master_seed=cam["master_seed"],
        load_factor=cam["load_factor"],
        demands=demands,
        period_duration_ms=mob["period_duration_ms"],
        hysteresis_db=hov["hysteresis_db"],
        exec_time_tics=hov["exec_time_tics"],
        screening_distance_m=hov["screening_distance_m"],
        measurement_noise_db=hov["measurement_noise_db"],
        rlf_window_tics=hov["rlf_window_tics"],
        best_cio_db=hov["best_cio_db"],
        current_cio_db=hov["current_cio_db"],
        sample_every_tics=mob["sample_every_tics"],
        jitter_sigma_m=mob["jitter_sigma_m"],
        ml=MlParams(
            train_fraction=ml["train_fraction"],
            svm_epochs=ml["svm_epochs"],
            svm_learning_rate=ml["svm_learning_rate"],
            svm_regularization=ml["svm_regularization"],
            dtc_max_depth=ml["dtc_max_depth"],
            dtc_min_samples_leaf=ml["dtc_min_samples_leaf"],
            rfc_n_trees=ml["rfc_n_trees"],
            rfc_max_depth=ml["rfc_max_depth"],
            rfc_min_samples_leaf=ml["rfc_min_samples_leaf"],
            rfc_feature_subsample=ml["rfc_feature_subsample"],
        ),
    )


def packaged_default_path():
    """Path to the checked-in default config inside the package."""
    return resources.files("udnsim").joinpath("data/default.ini")
