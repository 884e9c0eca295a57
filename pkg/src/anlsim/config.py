"""JSON configuration files.

Every physical quantity is given with a unit-suffixed key and converted to SI
here, once. Unknown keys are rejected with the key path and its line number.
"""
import hashlib
import json
import re

from . import units
from .campaign import CampaignConfig
from .polmodel import MEAN, RMS
from .siggrid import ConfigurationError
from .ssfm import FiberSpec, PropagationModel, fiber_preset, gamma_from_n2
from .txgen import TxConfig

SCHEMA = {
    "tx": {
        "n_channels": int, "channel_spacing_ghz": float, "symbol_rate_gbaud": float,
        "rolloff": float, "oversampling": int, "n_symbols": int, "power_dbm": float,
        "seed": int, "debruijn_order": int,
    },
    "fiber": {
        "preset": str, "name": str, "length_km": float, "attenuation_db_km": float,
        "dispersion_ps_nm_km": float, "gamma_w_km": float, "n2_m2_w": float,
        "a_eff_um2": float, "pmd_ps_sqrt_km": float, "wavelength_nm": float,
    },
    "propagation": {
        "model": str, "n_plates": int, "max_nl_phase_rad": float, "dgd_calibration": str,
    },
    "campaign": {
        "n_draws": int, "base_seed": int, "workers": int, "redraw_data": bool,
        "plate_seed": int, "sop_seed": int,
    },
    "gn": {
        "n_spans": int, "noise_figure_db": float, "gain_db": float, "bandwidth_ghz": float,
        "alpha_nl_mw2": float, "epsilon": float, "snr_trx_db": float, "power_dbm": float,
        "spans": list,
    },
}

SPAN_KEYS = {"power_dbm": float, "noise_figure_db": float, "gain_db": float, "a_nl_mw2": float}


class ConfigDoc(dict):
    """Validated document; ``text`` keeps the source for line lookups."""

    text = ""


class ConfigError(ConfigurationError):
    def __init__(self, msg, key=None, line=None):
        where = ""
        if key:
            where = f"{key}: "
        if line:
            where = f"line {line}: " + where
        super().__init__(where + msg)
        self.key = key
        self.line = line


def _line_of(text, key):
    if not text:
        return None
    leaf = key.split(".")[-1].split("[")[0]
    m = re.search(r'"%s"\s*:' % re.escape(leaf), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check(value, typ, key, text):
    if value is None:
        return None
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, typ) and not (typ is int and isinstance(value, bool)):
        return value
    raise ConfigError(f"expected {typ.__name__}, got {type(value).__name__}", key, _line_of(text, key))


def validate(doc, text=""):
    """Type-check a parsed config document; returns a normalized dict of sections."""
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    out = {}
    for section, body in doc.items():
        if section not in SCHEMA:
            raise ConfigError("unknown section", section, _line_of(text, section))
        if not isinstance(body, dict):
            raise ConfigError("section must be an object", section, _line_of(text, section))
        spec = SCHEMA[section]
        norm = {}
        for k, v in body.items():
            path = f"{section}.{k}"
            if k not in spec:
                raise ConfigError("unknown key", path, _line_of(text, k))
            norm[k] = _check(v, spec[k], path, text)
        out[section] = norm
    for i, span in enumerate(out.get("gn", {}).get("spans") or []):
        path = f"gn.spans[{i}]"
        if not isinstance(span, dict):
            raise ConfigError("span must be an object", path)
        for k, v in span.items():
            if k not in SPAN_KEYS:
                raise ConfigError("unknown key", f"{path}.{k}", _line_of(text, k))
            _check(v, SPAN_KEYS[k], f"{path}.{k}", text)
    return out


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    out = ConfigDoc(validate(doc, text))
    out.text = text
    return out


def load(path):
    with open(path) as fh:
        text = fh.read()
    return loads(text), hashlib.sha256(text.encode()).hexdigest()


def _wrap(fn, key, text=""):
    try:
        return fn()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), key, _line_of(text, key.split(".")[-1])) from None


def tx_from(sec, text=""):
    d = TxConfig()
    kw = dict(
        n_channels=sec.get("n_channels", d.n_channels),
        channel_spacing=sec.get("channel_spacing_ghz", d.channel_spacing / 1e9) * 1e9,
        symbol_rate=sec.get("symbol_rate_gbaud", d.symbol_rate / 1e9) * 1e9,
        rolloff=sec.get("rolloff", d.rolloff),
        oversampling=sec.get("oversampling", d.oversampling),
        n_symbols=sec.get("n_symbols", d.n_symbols),
        power_per_channel=units.dbm_to_w(sec.get("power_dbm", 0.0)),
        seed=sec.get("seed", d.seed),
        debruijn_order=sec.get("debruijn_order"),
    )
    cfg = _wrap(lambda: TxConfig(**kw), "tx")
    _wrap(lambda: cfg.grid, "tx.n_symbols", text)
    _wrap(lambda: cfg.order, "tx.n_symbols", text)
    return cfg


def fiber_from(sec, text=""):
    preset = sec.get("preset", "SMF")
    eng = {}
    for key in ("length_km", "attenuation_db_km", "dispersion_ps_nm_km", "gamma_w_km",
                "pmd_ps_sqrt_km", "wavelength_nm"):
        if key in sec:
            eng[key] = sec[key]
    if "n2_m2_w" in sec or "a_eff_um2" in sec:
        if "gamma_w_km" in sec:
            raise ConfigError("give either gamma_w_km or n2_m2_w/a_eff_um2", "fiber.gamma_w_km",
                              _line_of(text, "gamma_w_km"))
        lam = eng.get("wavelength_nm", 1550.0) * units.NM
        g = gamma_from_n2(sec.get("n2_m2_w", 2.6e-20), sec.get("a_eff_um2", 80.0) * 1e-12, lam)
        eng["gamma_w_km"] = g * units.KM
    if preset.lower() == "custom":
        f = _wrap(lambda: FiberSpec.from_engineering(**eng), "fiber")
    else:
        f = _wrap(lambda: fiber_preset(preset, **eng), "fiber.preset", text)
    if "name" in sec:
        f = f.with_(name=sec["name"])
    return f


RANGES = {
    "tx.n_channels": 1, "tx.oversampling": 2, "tx.n_symbols": 1,
    "propagation.n_plates": 1, "propagation.max_nl_phase_rad": 0.0,
    "campaign.n_draws": 2, "campaign.workers": 1, "fiber.length_km": 0.0,
}


def _check_ranges(doc, text):
    for path, lo in RANGES.items():
        section, key = path.split(".")
        v = doc.get(section, {}).get(key)
        if v is None:
            continue
        bad = v < lo if isinstance(lo, int) else v <= lo
        if bad:
            op = ">=" if isinstance(lo, int) else ">"
            raise ConfigError(f"must be {op} {lo}, got {v}", path, _line_of(text, key))


def campaign_from(doc):
    text = getattr(doc, "text", "")
    _check_ranges(doc, text)
    prop = doc.get("propagation", {})
    camp = doc.get("campaign", {})
    cal = prop.get("dgd_calibration", MEAN)
    if cal not in (MEAN, RMS):
        raise ConfigError("must be 'mean' or 'rms'", "propagation.dgd_calibration",
                          _line_of(text, "dgd_calibration"))
    model = _wrap(lambda: PropagationModel.parse(prop.get("model", "manakov")),
                  "propagation.model", text)
    return _wrap(lambda: CampaignConfig(
        tx=tx_from(doc.get("tx", {}), text),
        fiber=fiber_from(doc.get("fiber", {}), text),
        model=model,
        n_plates=prop.get("n_plates", 50),
        n_draws=camp.get("n_draws", 600),
        base_seed=camp.get("base_seed", 0),
        max_nl_phase=prop.get("max_nl_phase_rad", 5e-4),
        workers=camp.get("workers", 1),
        redraw_data=camp.get("redraw_data", False),
        dgd_calibration=cal,
        plate_seed=camp.get("plate_seed"),
        sop_seed=camp.get("sop_seed"),
    ), "campaign")
