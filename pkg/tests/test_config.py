import json

import pytest

from anlsim import units
from anlsim.config import ConfigError, campaign_from, load, loads
from anlsim.ssfm import PropagationModel

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]


def test_shipped_configs_parse():
    for name in ("paper.json", "desk.json"):
        doc, digest = load(ROOT / "configs" / name)
        cfg = campaign_from(doc)
        assert len(digest) == 64
        assert cfg.fiber.name == "SMF"


def test_paper_config_values():
    doc, _ = load(ROOT / "configs" / "paper.json")
    cfg = campaign_from(doc)
    assert cfg.tx.n_channels == 21
    assert cfg.tx.symbol_rate == 32e9
    assert cfg.tx.grid.n_samples == 2_097_152
    assert cfg.n_draws == 600
    assert cfg.max_nl_phase == 5e-4
    assert cfg.model is PropagationModel.MANAKOV
    assert cfg.fiber.gamma == pytest.approx(1.3e-3)
    assert cfg.fiber.pmd_coefficient == pytest.approx(units.ps_sqrt_km_to_si(0.13))


def test_defaults_from_empty_document():
    cfg = campaign_from(loads("{}"))
    assert cfg.n_draws == 600 and cfg.n_plates == 50
    assert cfg.tx.power_per_channel == pytest.approx(1e-3)


def test_unknown_key_line():
    text = '{\n  "tx": {\n    "n_channels": 5,\n    "powr_dbm": 0\n  }\n}\n'
    with pytest.raises(ConfigError) as ei:
        loads(text)
    assert ei.value.key == "tx.powr_dbm"
    assert ei.value.line == 4
    assert "line 4" in str(ei.value)


def test_type_error_line():
    text = '{\n  "campaign": {\n    "n_draws": "many"\n  }\n}'
    with pytest.raises(ConfigError) as ei:
        loads(text)
    assert ei.value.key == "campaign.n_draws" and ei.value.line == 3


def test_syntax_error_line():
    with pytest.raises(ConfigError) as ei:
        loads('{\n  "tx": {\n    "seed": 1,\n  }\n}')
    assert ei.value.line == 4


@pytest.mark.parametrize("text, key", [
    ('{"campaign": {"n_draws": 1}}', "campaign.n_draws"),
    ('{"propagation": {"n_plates": 0}}', "propagation.n_plates"),
    ('{"propagation": {"dgd_calibration": "median"}}', "propagation.dgd_calibration"),
    ('{"propagation": {"model": "scalar"}}', "propagation.model"),
    ('{"fiber": {"preset": "DSF"}}', "fiber.preset"),
    ('{"tx": {"n_symbols": 1000}}', "tx.n_symbols"),
    ('{"fiber": {"gamma_w_km": 1.3, "n2_m2_w": 2.6e-20}}', "fiber.gamma_w_km"),
    ('{"gn": {"spans": [{"gain": 20}]}}', "gn.spans[0].gain"),
])
def test_semantic_errors_name_key(text, key):
    with pytest.raises(ConfigError) as ei:
        campaign_from(loads(text))
    assert ei.value.key == key
    assert key in str(ei.value)


def test_custom_fiber_and_n2_route():
    doc = loads(json.dumps({"fiber": {"preset": "custom", "dispersion_ps_nm_km": 4.0,
                                      "n2_m2_w": 2.6e-20, "a_eff_um2": 80.0, "name": "mine"}}))
    f = campaign_from(doc).fiber
    assert f.name == "mine"
    assert f.gamma == pytest.approx(1.3175e-3, rel=1e-3)


def test_preset_overrides():
    f = campaign_from(loads('{"fiber": {"preset": "teralight", "length_km": 80}}')).fiber
    assert f.name == "Teralight"
    assert f.length == 80e3
    assert f.dispersion_D == pytest.approx(units.ps_nm_km_to_si(8.0))
