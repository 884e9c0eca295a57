"""Sampling grid and dual-polarization field container.

The time axis is circular: the grid spans exactly one period of the
transmitted sequences, so spectral operators act by plain multiplication.
Spectra use the unitary DFT (``norm="ortho"``) so that
``sum(|spectrum|^2) / n == mean(|samples|^2)``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class ConfigurationError(ValueError):
    """Inconsistent simulation parameters."""


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SimulationGrid:
    n_samples: int
    sample_rate: float
    center_frequency_offset: float = 0.0

    def __post_init__(self):
        if not _is_pow2(int(self.n_samples)):
            raise ConfigurationError(
                f"n_samples must be a power of two, got {self.n_samples}"
            )
        if not self.sample_rate > 0:
            raise ConfigurationError("sample_rate must be positive")

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    @property
    def dt(self):
        return 1.0 / self.sample_rate

    @property
    def df(self):
        """Frequency resolution (bin spacing) in Hz."""
        return self.sample_rate / self.n_samples

    @cached_property
    def time(self):
        return np.arange(self.n_samples) * self.dt

    @cached_property
    def frequency(self):
        """Baseband frequencies in standard FFT ordering."""
        return sfft.fftfreq(self.n_samples, d=self.dt)

    @cached_property
    def omega(self):
        return 2.0 * np.pi * self.frequency

    def bins(self, frequency):
        """Exact integer bin count for ``frequency``; raises if off-grid."""
        m = frequency / self.df
        k = int(round(m))
        if abs(m - k) > 1e-6:
            raise ConfigurationError(
                f"frequency {frequency:g} Hz is not a multiple of the grid "
                f"resolution {self.df:g} Hz"
            )
        return k


def make_grid(symbol_rate, oversampling, n_symbols):
    """Grid holding ``n_symbols`` symbols at ``oversampling`` samples each."""
    if oversampling < 2:
        raise ConfigurationError("oversampling must be >= 2")
    if n_symbols < 1:
        raise ConfigurationError("n_symbols must be >= 1")
    n = int(oversampling) * int(n_symbols)
    if not _is_pow2(n):
        raise ConfigurationError(
            f"oversampling x n_symbols = {n} is not a power of two"
        )
    return SimulationGrid(n, float(symbol_rate) * oversampling)


class DualPolField:
    """Complex envelopes (A_x, A_y) in sqrt(W) on a :class:`SimulationGrid`.

    Samples are held as one ``(2, n_samples)`` complex128 array; row 0 is x.
    """

    __slots__ = ("grid", "samples")

    def __init__(self, grid, samples):
        samples = np.ascontiguousarray(samples, dtype=np.complex128)
        if samples.shape != (2, grid.n_samples):
            raise ValueError(
                f"expected samples of shape (2, {grid.n_samples}), got {samples.shape}"
            )
        self.grid = grid
        self.samples = samples

    @classmethod
    def from_xy(cls, grid, x, y=None):
        x = np.asarray(x, dtype=np.complex128)
        y = np.zeros_like(x) if y is None else np.asarray(y, dtype=np.complex128)
        return cls(grid, np.stack([x, y]))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((2, grid.n_samples), dtype=np.complex128))

    @property
    def samples_x(self):
        return self.samples[0]

    @property
    def samples_y(self):
        return self.samples[1]

    def copy(self):
        return DualPolField(self.grid, self.samples.copy())

    def __repr__(self):
        return f"DualPolField(n={self.grid.n_samples}, power={total_power(self):.4g} W)"


def total_power(field):
    """Mean of |A_x|^2 + |A_y|^2 over the grid, in W."""
    s = field.samples
    return float(np.mean(s.real**2 + s.imag**2) * 2.0)


def to_frequency(field):
    """Unitary spectrum of both polarizations, shape ``(2, n)``."""
    return sfft.fft(field.samples, axis=-1, norm="ortho")


def to_time(spectrum, grid):
    return DualPolField(grid, sfft.ifft(spectrum, axis=-1, norm="ortho"))


def spectral_power(spectrum):
    """Power in W of a unitary spectrum (Parseval counterpart of total_power)."""
    n = spectrum.shape[-1]
    return float(np.sum(spectrum.real**2 + spectrum.imag**2) / n)


def frequency_shift(field, n_bins):
    """Translate the spectrum circularly by ``n_bins`` (positive = up)."""
    spec = np.roll(to_frequency(field), n_bins, axis=-1)
    return to_time(spec, field.grid)
