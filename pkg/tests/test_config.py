import pytest

from hccasim import engine
from hccasim.config import (ConfigError, apply_overrides, scenario_from_dict,
                            with_overrides)
from hccasim.sched import tspec_preset


def test_preset_expansion_with_overrides():
    cfg = scenario_from_dict({"preset": "vbr-high", "stations": 3,
                              "traffic": {"jitter": 0.1}})
    assert cfg.quality == "vbr-high"
    assert cfg.tspec == tspec_preset("jurassic-high")
    assert cfg.traffic.jitter == 0.1          # merged over the preset
    assert cfg.traffic.i_size == 12160        # preset value kept
    with pytest.raises(ConfigError, match="preset"):
        scenario_from_dict({"preset": "nope"})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="shceduler"):
        scenario_from_dict({"shceduler": "adaptive"})
    with pytest.raises(ConfigError, match="traffic"):
        scenario_from_dict({"traffic": {"sizes": 3}})


def test_inline_tspec_and_errors():
    cfg = scenario_from_dict({"tspec": {"rho_bps": 1e5, "nominal_bytes": 500,
                                        "max_bytes": 900, "delay_bound_ms": 80,
                                        "msi_ms": 40, "phys_rate_bps": 11000000}})
    assert cfg.tspec.nominal_msdu_bytes == 500
    with pytest.raises(ConfigError, match="tspec"):
        scenario_from_dict({"tspec": {"rho_bps": 1e5}})
    with pytest.raises(ConfigError, match="tspec"):
        scenario_from_dict({"tspec": "unknown-preset"})


def test_per_station_list(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("0 I 0 700\n1 P 40 600\n2 B 80 500\n3 B 120 400\n")
    cfg = scenario_from_dict({
        "scheduler": "adaptive",
        "duration_s": 21,
        "stations": [
            {"traffic": {"kind": "trace", "path": str(path)}, "tspec": "jurassic-low"},
            {"tspec": "jurassic-medium"},
        ],
    })
    assert cfg.stations == 2
    specs = cfg.station_list()
    assert specs[0].traffic.kind == "trace"
    assert specs[0].tspec == tspec_preset("jurassic-low")
    assert specs[1].traffic.kind == "synth"   # falls back to scenario default
    assert specs[1].tspec == tspec_preset("jurassic-medium")
    r = engine.run(cfg)
    assert r.flows[0].generated == 4
    assert r.flows[0].delivered == 4
    assert r.flows[1].delivered > 0


def test_station_list_validation():
    with pytest.raises(ConfigError, match=r"stations\[0\]"):
        scenario_from_dict({"stations": [{"bogus": 1}]})
    with pytest.raises(ConfigError, match="path"):
        scenario_from_dict({"stations": [{"traffic": {"kind": "trace"}}]})


def test_apply_overrides_nested_paths():
    raw = apply_overrides({"traffic": {"jitter": 0.2}},
                          ["traffic.jitter=0.4", "phy.sifs_us=16", "seed=9"])
    assert raw == {"traffic": {"jitter": 0.4}, "phy": {"sifs_us": 16}, "seed": 9}
    with pytest.raises(ConfigError, match="--set"):
        apply_overrides({}, ["no-equals-sign"])


def test_override_values_parse_as_yaml():
    raw = apply_overrides({}, ["qs_exact=true", "loss_p=0.25", "quality=foo"])
    cfg = scenario_from_dict(raw)
    assert cfg.qs_exact is True
    assert cfg.loss_p == 0.25
    assert cfg.quality == "foo"


def test_admission_accepts_yaml_booleans():
    assert scenario_from_dict({"admission": True}).admission == "on"
    assert scenario_from_dict({"admission": "off"}).admission == "off"


def test_with_overrides_revalidates():
    cfg = scenario_from_dict({"preset": "cbr-nominal"})
    with pytest.raises(ConfigError, match="loss_p"):
        with_overrides(cfg, loss_p=2.0)


def test_validation_field_names():
    for key, bad in [("scheduler", "rr"), ("beacon_interval_ms", 0),
                     ("duration_s", -1), ("loss_p", -0.1),
                     ("overhead_mode", "x"), ("throughput_window", "x"),
                     ("on_reject", "x")]:
        with pytest.raises(ConfigError, match=key):
            scenario_from_dict({key: bad})
