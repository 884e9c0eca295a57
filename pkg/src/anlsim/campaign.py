"""Monte Carlo campaigns over random birefringence draws.

Each draw ``k`` derives its own seed from ``(base_seed, k)``, so results do
not depend on the number of workers or on scheduling order.
"""
import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field, replace

import numpy as np
from scipy import stats

from . import __version__, units
from .gnmodel import AnlDistribution
from .kernels import BACKEND
from .polmodel import MEAN, draw_plate_sequence, total_dgd
from .rxchain import receive
from .siggrid import ConfigurationError
from .ssfm import FiberSpec, PropagationModel, StepController, propagate_span
from .txgen import TxConfig, build_wdm_field


class CampaignError(RuntimeError):
    """A draw failed; ``seed`` identifies it."""

    def __init__(self, msg, index=None, seed=None):
        super().__init__(msg)
        self.index = index
        self.seed = seed

    def __reduce__(self):  # keep index and seed across process boundaries
        return (CampaignError, (str(self), self.index, self.seed))


def derive_seed(parent, *tags):
    """64-bit child seed of ``parent`` for the given integer tags."""
    ss = np.random.SeedSequence([int(parent), *map(int, tags)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CampaignConfig:
    tx: TxConfig = TxConfig()
    fiber: FiberSpec = FiberSpec()
    model: PropagationModel = PropagationModel.MANAKOV
    n_plates: int = 50
    n_draws: int = 600
    base_seed: int = 0
    max_nl_phase: float = 5e-4
    workers: int = 1
    redraw_data: bool = False
    dgd_calibration: str = MEAN
    plate_seed: int | None = None  # pin every draw to one birefringence draw
    sop_seed: int | None = None  # pin every draw to one set of channel SOPs

    def __post_init__(self):
        object.__setattr__(self, "model", PropagationModel.parse(self.model))
        if self.n_draws < 2:
            raise ConfigurationError("n_draws must be >= 2 (sample variance undefined)")
        if self.n_plates < 1:
            raise ConfigurationError("n_plates must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def with_(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        tx = asdict(self.tx)
        tx["power_per_channel_dbm"] = units.w_to_dbm(self.tx.power_per_channel)
        return {
            "tx": tx,
            "fiber": self.fiber.to_engineering(),
            "model": self.model.value,
            "n_plates": self.n_plates,
            "n_draws": self.n_draws,
            "base_seed": self.base_seed,
            "max_nl_phase": self.max_nl_phase,
            "redraw_data": self.redraw_data,
            "dgd_calibration": self.dgd_calibration,
            "plate_seed": self.plate_seed,
            "sop_seed": self.sop_seed,
        }

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class DrawResult:
    index: int
    seed: int
    a_nl: float  # 1/W^2
    total_dgd: float  # s


def draw_seeds(cfg, index):
    seed = derive_seed(cfg.base_seed, index)
    plate = cfg.plate_seed if cfg.plate_seed is not None else derive_seed(seed, 1)
    sop = cfg.sop_seed if cfg.sop_seed is not None else derive_seed(seed, 2)
    data = derive_seed(seed, 3) if cfg.redraw_data else cfg.tx.seed
    return seed, plate, sop, data


def transmit(cfg, index):
    """One transmission: plates, WDM field, span, receiver. Returns (RxResult, plates)."""
    seed, plate_seed, sop_seed, data_seed = draw_seeds(cfg, index)
    fiber = cfg.fiber
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, cfg.n_plates,
                                 plate_seed, calibration=cfg.dgd_calibration)
    signal = build_wdm_field(cfg.tx, sop_seed=sop_seed, data_seed=data_seed)
    out = propagate_span(signal.field, fiber, plates, cfg.model,
                         StepController(cfg.max_nl_phase))
    rx = receive(out, fiber, plates, signal)
    rx.provenance.update({
        "draw_index": index,
        "seed": str(seed),
        "plate_seed": str(plate_seed),
        "sop_seed": str(sop_seed),
        "data_seed": str(data_seed),
        "n_plates": cfg.n_plates,
        "fiber": cfg.fiber.name,
        "model": cfg.model.value,
        "max_nl_phase": cfg.max_nl_phase,
        "dgd_calibration": cfg.dgd_calibration,
        "total_dgd_ps": total_dgd(plates) / units.PS,
    })
    return rx, plates


def run_draw(cfg, index):
    seed = derive_seed(cfg.base_seed, index)
    try:
        rx, plates = transmit(cfg, index)
    except ConfigurationError:
        raise
    except Exception as exc:  # report which draw failed
        raise CampaignError(f"draw {index} (seed {seed}) failed: {exc}", index, seed) from exc
    if not math.isfinite(rx.a_nl):
        raise CampaignError(f"draw {index} (seed {seed}) produced non-finite a_NL", index, seed)
    return DrawResult(index, seed, rx.a_nl, total_dgd(plates))


def _run_draw_star(args):
    return run_draw(*args)


@dataclass
class CampaignResult:
    config: CampaignConfig
    draws: list
    dist: AnlDistribution
    gaussian_fit: dict
    histogram: dict
    metadata: dict = dc_field(default_factory=dict)

    @property
    def samples(self):
        return np.array([d.a_nl for d in self.draws])

    @property
    def seeds(self):
        return [d.seed for d in self.draws]

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "statistics": {
                "n_draws": self.dist.n_samples,
                "mu_mW-2": units.per_w2_to_per_mw2(self.dist.mu),
                "mu_dBmW-2": self.dist.mu_db,
                "sigma_mW-2": units.per_w2_to_per_mw2(self.dist.sigma),
            },
            "gaussian_fit": self.gaussian_fit,
            "histogram": self.histogram,
            "seeds": [str(s) for s in self.seeds],
            "metadata": self.metadata,
        }


def summarize(samples):
    """Sample mean, unbiased std and the moment-matched normal fit (all 1/W^2)."""
    samples = np.asarray(samples, dtype=float)
    mu = float(np.mean(samples))
    sigma = float(np.std(samples, ddof=1))
    return AnlDistribution(mu, sigma, len(samples)), {"mean_mW-2": mu * 1e-6, "std_mW-2": sigma * 1e-6}


def histogram(samples_mw2):
    """Freedman-Diaconis histogram (falls back to one bin for degenerate data)."""
    x = np.asarray(samples_mw2, dtype=float)
    try:
        edges = np.histogram_bin_edges(x, bins="fd")
    except ValueError:
        edges = np.histogram_bin_edges(x, bins=1)
    if len(edges) < 2 or len(edges) > 10_000:
        edges = np.histogram_bin_edges(x, bins=1)
    counts, edges = np.histogram(x, bins=edges)
    return {"unit": "mW-2", "edges": edges.tolist(), "counts": counts.tolist()}


def metadata(cfg):
    return {
        "software_version": __version__,
        "kernel_backend": BACKEND,
        "config_digest": cfg.digest(),
        "fiber_name": cfg.fiber.name,
        "dgd_calibration": cfg.dgd_calibration,
        "data_policy": "redrawn per draw" if cfg.redraw_data else "fixed across draws",
        "sop_policy": "pinned" if cfg.sop_seed is not None else "redrawn per draw",
        "plate_policy": "pinned" if cfg.plate_seed is not None else "redrawn per draw",
        "attenuation_db_km": cfg.fiber.to_engineering()["attenuation_db_km"],
        "dispersion_ps_nm_km": cfg.fiber.to_engineering()["dispersion_ps_nm_km"],
    }


def aggregate(cfg, draws):
    draws = sorted(draws, key=lambda d: d.index)
    dist, fit = summarize([d.a_nl for d in draws])
    hist = histogram([units.per_w2_to_per_mw2(d.a_nl) for d in draws])
    return CampaignResult(cfg, draws, dist, fit, hist, metadata(cfg))


def run_campaign(cfg, progress=None):
    """Run ``cfg.n_draws`` independent draws on up to ``cfg.workers`` processes."""
    tasks = [(cfg, k) for k in range(cfg.n_draws)]
    draws = []
    if cfg.workers == 1:
        for t in tasks:
            draws.append(_run_draw_star(t))
            if progress:
                progress(len(draws), cfg.n_draws)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for d in pool.map(_run_draw_star, tasks):
                draws.append(d)
                if progress:
                    progress(len(draws), cfg.n_draws)
    return aggregate(cfg, draws)


# -- comparisons ------------------------------------------------------------------

@dataclass(frozen=True)
class ModelDelta:
    delta_mu_db: float
    delta_sigma: float  # 1/W^2


def _dist(x):
    return x.dist if isinstance(x, CampaignResult) else x


def compare_models(result_cnlse, result_manakov):
    """CNLSE minus Manakov: mean difference in dB, std difference linear."""
    c, m = _dist(result_cnlse), _dist(result_manakov)
    return ModelDelta(c.mu_db - m.mu_db, c.sigma - m.sigma)


def empirical_delta_laws(n_plates):
    """Exponential fits of the CNLSE-Manakov gaps for SMF, in mW^-2."""
    if n_plates < 0:
        raise ValueError("n_plates must be non-negative")
    return (1e-5 * math.exp(-1e-2 * n_plates), 3.8e-6 * math.exp(-2e-2 * n_plates))


def bootstrap_mean_ci(samples, level=0.95, n_resamples=2000, seed=0):
    """Percentile bootstrap confidence interval of the mean."""
    res = stats.bootstrap((np.asarray(samples, dtype=float),), np.mean,
                          confidence_level=level, n_resamples=n_resamples,
                          method="percentile", random_state=np.random.default_rng(seed))
    return float(res.confidence_interval.low), float(res.confidence_interval.high)


# -- sweeps ---------------------------------------------------------------------

SWEEP_AXES = ("n_plates", "pmd_coefficient", "fiber", "model")


def _apply_axis(cfg, axis, value):
    from .ssfm import fiber_preset

    if axis == "n_plates":
        return cfg.with_(n_plates=int(value))
    if axis == "pmd_coefficient":  # ps/sqrt(km)
        return cfg.with_(fiber=cfg.fiber.with_(pmd_coefficient=units.ps_sqrt_km_to_si(float(value))))
    if axis == "fiber":
        keep = cfg.fiber.to_engineering()
        f = fiber_preset(value, length_km=keep["length_km"],
                         attenuation_db_km=keep["attenuation_db_km"],
                         pmd_ps_sqrt_km=keep["pmd_ps_sqrt_km"],
                         wavelength_nm=keep["wavelength_nm"])
        return cfg.with_(fiber=f)
    if axis == "model":
        return cfg.with_(model=PropagationModel.parse(value))
    raise ConfigurationError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")


@dataclass
class SweepRow:
    axis: str
    value: object
    result: CampaignResult
    runtime_s: float


def sweep(axis, values, base_cfg, progress=None):
    """One campaign per value; all campaigns share ``base_cfg.base_seed``."""
    values = list(values)
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    cfgs = [_apply_axis(base_cfg, axis, v) for v in values]
    rows = []
    for v, cfg in zip(values, cfgs):
        t0 = time.perf_counter()
        res = run_campaign(cfg)
        rows.append(SweepRow(axis, v, res, time.perf_counter() - t0))
        if progress:
            progress(v, res)
    return rows


# -- persistence ---------------------------------------------------------------------

def samples_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["draw_index", "seed", "a_nl_mW2", "total_dgd_ps"])
    for d in result.draws:
        w.writerow([d.index, d.seed, repr(float(units.per_w2_to_per_mw2(d.a_nl))), repr(float(d.total_dgd / units.PS))])
    return buf.getvalue()


def write_campaign(result, outdir):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "campaign.json"), "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, "samples.csv"), "w", newline="") as fh:
        fh.write(samples_csv(result))


def read_samples(path):
    """Load samples.csv; a_NL returned in 1/W^2, DGD in s."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (
        [int(r["draw_index"]) for r in rows],
        [int(r["seed"]) for r in rows],
        np.array([units.per_mw2_to_per_w2(float(r["a_nl_mW2"])) for r in rows]),
        np.array([float(r["total_dgd_ps"]) * units.PS for r in rows]),
    )


def write_sweep(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis", "value", "mu_dBmW2", "sigma_mW2", "n_draws", "runtime_s"])
        for r in rows:
            d = r.result.dist
            w.writerow([r.axis, r.value, repr(float(d.mu_db)), repr(float(units.per_w2_to_per_mw2(d.sigma))),
                        d.n_samples, f"{r.runtime_s:.3f}"])
