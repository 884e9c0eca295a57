"""WDM PDM-QPSK transmitter: De Bruijn data, Gray QPSK, RRC shaping, random SOPs."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .polmodel import random_jones
from .siggrid import ConfigurationError, DualPolField, make_grid


@dataclass(frozen=True)
class TxConfig:
    n_channels: int = 21
    channel_spacing: float = 50e9
    symbol_rate: float = 32e9
    rolloff: float = 0.1
    oversampling: int = 128
    n_symbols: int = 16384
    power_per_channel: float = 1e-3
    seed: int = 0
    debruijn_order: int | None = None  # default: log4(n_symbols)

    def __post_init__(self):
        if self.n_channels < 1:
            raise ConfigurationError("n_channels must be >= 1")
        if not 0.0 < self.rolloff <= 1.0:
            raise ConfigurationError("rolloff must lie in (0, 1]")
        if self.power_per_channel <= 0:
            raise ConfigurationError("power_per_channel must be positive")
        if (1 + self.rolloff) * self.symbol_rate > self.channel_spacing and self.n_channels > 1:
            warnings.warn("channel bandwidth exceeds channel spacing", stacklevel=2)

    @property
    def grid(self):
        return make_grid(self.symbol_rate, self.oversampling, self.n_symbols)

    @property
    def order(self):
        if self.debruijn_order is not None:
            return self.debruijn_order
        order = round(math.log(self.n_symbols, 4))
        if 4**order != self.n_symbols:
            raise ConfigurationError(
                f"n_symbols={self.n_symbols} is not a power of 4; set debruijn_order"
            )
        return order

    def channel_offsets(self):
        k = np.arange(self.n_channels)
        return (k - (self.n_channels - 1) / 2) * self.channel_spacing

    @property
    def central_channel(self):
        return self.n_channels // 2


# -- data ------------------------------------------------------------------

def debruijn(k, n):
    """Lexicographically least De Bruijn sequence B(k, n) (Lyndon-word concatenation)."""
    a = [0] * (k * n)
    seq = []

    def db(t, p):
        if t > n:
            if n % p == 0:
                seq.extend(a[1:p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, k):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return np.array(seq, dtype=np.int8)


_BASE = {}


def _base(order):
    if order not in _BASE:
        _BASE[order] = debruijn(4, order)
    return _BASE[order]


def debruijn_variant(permutation, shift, order=7):
    """Base B(4, order) with its alphabet permuted and rotated by ``shift``."""
    perm = np.asarray(permutation, dtype=np.int8)
    return np.roll(perm[_base(order)], -int(shift))


def debruijn_q4_order7(variant_seed, order=7):
    """A quaternary De Bruijn sequence selected by ``variant_seed``."""
    rng = np.random.default_rng(variant_seed)
    return debruijn_variant(rng.permutation(4), rng.integers(4**order), order)


def is_debruijn(seq, k, n):
    """True when every length-n word over range(k) occurs once cyclically."""
    seq = np.asarray(seq, dtype=np.int64)
    if len(seq) != k**n:
        return False
    ext = np.concatenate([seq, seq[: n - 1]])
    codes = np.zeros(len(seq), dtype=np.int64)
    for j in range(n):
        codes = codes * k + ext[j:j + len(seq)]
    return len(np.unique(codes)) == len(seq)


def map_qpsk(symbols, power):
    """Gray QPSK points with mean |s|^2 = power/2 (one of two tributaries)."""
    symbols = np.asarray(symbols)
    if symbols.size and (symbols.min() < 0 or symbols.max() > 3):
        raise ValueError("QPSK symbols must be in 0..3")
    i = 1 - 2 * (symbols & 1)
    q = 1 - 2 * ((symbols >> 1) & 1)
    return math.sqrt(power / 2) * (i + 1j * q) / math.sqrt(2)


def qpsk_points(power):
    return map_qpsk(np.arange(4), power)


@dataclass(frozen=True, eq=False)
class SymbolPlan:
    """Ground-truth data: ``symbols`` and ``points`` are ``(n_channels, 2, n_symbols)``."""

    symbols: np.ndarray
    points: np.ndarray


def draw_symbol_plan(cfg, seed=None):
    """Distinct De Bruijn variants for every channel and tributary."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    order = cfg.order
    n_trib = 2 * cfg.n_channels
    shifts = rng.choice(4**order, size=n_trib, replace=False)
    seqs = []
    for j in range(n_trib):
        s = debruijn_variant(rng.permutation(4), shifts[j], order)
        while any(np.array_equal(s, t) for t in seqs):
            s = debruijn_variant(rng.permutation(4), rng.integers(4**order), order)
        seqs.append(s)
    sym = np.array(seqs).reshape(cfg.n_channels, 2, -1)
    return SymbolPlan(sym, map_qpsk(sym, cfg.power_per_channel))


# -- shaping -------------------------------------------------------------------

def rrc_response(frequency, symbol_rate, rolloff):
    """Root-raised-cosine amplitude response with H(0) = 1."""
    f = np.abs(np.asarray(frequency, dtype=float))
    f1 = (1 - rolloff) * symbol_rate / 2
    f2 = (1 + rolloff) * symbol_rate / 2
    h = np.zeros_like(f)
    h[f <= f1] = 1.0
    band = (f > f1) & (f < f2)
    h[band] = np.sqrt(0.5 * (1 + np.cos(np.pi / (rolloff * symbol_rate) * (f[band] - f1))))
    return h


def rrc_spectrum(symbols, grid, symbol_rate, rolloff):
    """Unnormalized FFT of the RRC-shaped waveform carrying ``symbols``."""
    n_sym = symbols.shape[-1]
    os_ = grid.n_samples // n_sym
    if os_ * n_sym != grid.n_samples:
        raise ConfigurationError("grid size is not a multiple of the symbol count")
    imp = np.zeros(symbols.shape[:-1] + (grid.n_samples,), dtype=np.complex128)
    imp[..., ::os_] = symbols
    h = os_ * rrc_response(grid.frequency, symbol_rate, rolloff)
    return sfft.fft(imp, axis=-1) * h


def rrc_shape(symbols, grid, rolloff, symbol_rate=None):
    """Time waveform of ``symbols`` shaped by an RRC filter on the circular grid.

    Symbol ``k`` sits at sample ``k * oversampling``. With a matched RRC at the
    receiver the symbol-spaced samples reproduce ``symbols`` exactly.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbol_rate is None:
        symbol_rate = grid.sample_rate * symbols.shape[-1] / grid.n_samples
    return sfft.ifft(rrc_spectrum(symbols, grid, symbol_rate, rolloff), axis=-1)


def random_sop_rotation(seed):
    """Random Jones unitary; the x input lands uniformly on the Poincare sphere.

    ``seed=None`` is the designated null seed and returns the identity.
    """
    if seed is None:
        return np.eye(2, dtype=np.complex128)
    return random_jones(np.random.default_rng(seed))


# -- multiplex -------------------------------------------------------------------

@dataclass(eq=False)
class WdmSignal:
    field: DualPolField
    plan: SymbolPlan
    sops: np.ndarray  # (n_channels, 2, 2)
    offsets: np.ndarray  # Hz
    config: TxConfig


def build_wdm_field(cfg, sop_seed=None, data_seed=None, identity_sops=False):
    """Aggregate WDM field at the fiber input.

    Channel SOPs come from ``sop_seed`` (default ``cfg.seed``) and data from
    ``data_seed`` (default ``cfg.seed``).
    """
    grid = cfg.grid
    offsets = cfg.channel_offsets()
    occupied = (cfg.n_channels - 1) * cfg.channel_spacing + (1 + cfg.rolloff) * cfg.symbol_rate
    if occupied > grid.sample_rate:
        raise ConfigurationError(
            f"WDM bandwidth {occupied:g} Hz exceeds sample rate {grid.sample_rate:g} Hz"
        )
    bins = [grid.bins(f) for f in offsets]
    plan = draw_symbol_plan(cfg, data_seed)
    if identity_sops:
        sops = np.broadcast_to(np.eye(2, dtype=np.complex128), (cfg.n_channels, 2, 2)).copy()
    else:
        rng = np.random.default_rng([cfg.seed if sop_seed is None else sop_seed, 0x50F])
        sops = random_jones(rng, cfg.n_channels)

    spec = np.zeros((2, grid.n_samples), dtype=np.complex128)
    for ch in range(cfg.n_channels):
        s = rrc_spectrum(plan.points[ch], grid, cfg.symbol_rate, cfg.rolloff)
        s = sops[ch] @ s
        spec += np.roll(s, bins[ch], axis=-1)
    field = DualPolField(grid, sfft.ifft(spec, axis=-1))
    return WdmSignal(field, plan, sops, offsets, cfg)
