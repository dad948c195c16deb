import pytest

from udnsim.config import default_config_text, load_config, packaged_default_path
from udnsim.errors import ConfigurationError


def test_defaults_match_simulated_city():
    cfg = load_config()
    assert cfg.density_per_km2 == 50.0
    assert (cfg.area.width, cfg.area.height) == (1000.0, 1000.0)
    assert cfg.radio.bandwidth_hz == 1e7
    assert cfg.radio.tx_power_dbm == 30.0
    assert cfg.radio.scn_antenna_gain_dbi == 15.0
    assert cfg.radio.communication_range_m == 300.0
    assert cfg.radio.sinr_min_db == -7.0
    assert cfg.scn_height_m == 15.0
    assert cfg.hysteresis_db == 3.0
    assert cfg.exec_time_tics == 25
    assert cfg.tic_ms == 10.0
    assert cfg.horizon_ms == 70_000.0
    assert cfg.iterations == 100
    assert [d.counts for d in cfg.demands][0] == {0: 1400, 1: 400, 2: 200}


def test_packaged_default_file_matches_schema():
    path = packaged_default_path()
    assert path.read_text() == default_config_text()
    # parsing the shipped file must give exactly the built-in defaults
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
        fh.write(path.read_text())
    assert load_config(fh.name) == load_config()


def test_file_overrides(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[campaign]\niterations = 7\nmaster_seed = 5\n"
                 "[handover]\nttt_tics = 2\n")
    cfg = load_config(p)
    assert cfg.iterations == 7
    assert cfg.master_seed == 5
    assert cfg.ttt_tics == 2
    assert cfg.density_per_km2 == 50.0   # untouched default


def test_unknown_key_is_hard_error(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[radio]\ntx_powr_dbm = 30\n")
    with pytest.raises(ConfigurationError, match="radio.tx_powr_dbm"):
        load_config(p)


def test_unknown_section_is_hard_error(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[radios]\ntx_power_dbm = 30\n")
    with pytest.raises(ConfigurationError, match=r"\[radios\]"):
        load_config(p)


def test_missing_value_is_hard_error(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[deployment]\ndensity_per_km2 =\n")
    with pytest.raises(ConfigurationError, match="deployment.density_per_km2"):
        load_config(p)


def test_bad_value_names_key(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[campaign]\niterations = soon\n")
    with pytest.raises(ConfigurationError, match="campaign.iterations"):
        load_config(p)


def test_demand_shape_errors(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[mobility]\ndemands = 1,2\n")
    with pytest.raises(ConfigurationError, match="mobility.demands"):
        load_config(p)
    p.write_text("[mobility]\nperiod_labels = a, b\n")
    with pytest.raises(ConfigurationError, match="period_labels"):
        load_config(p)
