"""Split-step Fourier propagation for the CNLSE and the Manakov-PMD equation.

Loss and second-order dispersion are identical for both polarizations. The
Kerr term is either the CNLSE form (self weight 1, cross weight 2/3, acting in
the local birefringence axes) or the polarization-averaged Manakov form
(weight 8/9 on the total power). Waveplates from :mod:`anlsim.polmodel` are
applied at their boundaries; steps never cross a plate boundary.
"""
import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from . import kernels, units
from .polmodel import dgd_phasor
from .siggrid import ConfigurationError, DualPolField, to_frequency, to_time


class PropagationModel(str, enum.Enum):
    CNLSE = "cnlse"
    MANAKOV = "manakov"

    @property
    def kerr_weights(self):
        """(self, cross) weights multiplying gamma."""
        if self is PropagationModel.CNLSE:
            return 1.0, 2.0 / 3.0
        return 8.0 / 9.0, 8.0 / 9.0

    @property
    def step_weight(self):
        """Largest phase per unit total power; bounds the per-sample phase."""
        return max(self.kerr_weights)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("_", "-")
        if v in ("manakov", "manakov-pmd"):
            return cls.MANAKOV
        if v == "cnlse":
            return cls.CNLSE
        raise ValueError(f"unknown propagation model {value!r}")


@dataclass(frozen=True)
class FiberSpec:
    """Fiber parameters in SI units (lengths in m, times in s, power in W)."""

    length: float = 100e3
    attenuation: float = units.db_per_km_to_neper_per_m(0.2)
    dispersion_D: float = units.ps_nm_km_to_si(16.8)
    gamma: float = 1.3e-3
    pmd_coefficient: float = units.ps_sqrt_km_to_si(0.13)
    wavelength: float = 1550e-9
    name: str = "SMF"

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigurationError("fiber length must be positive")
        if self.gamma < 0 or self.attenuation < 0 or self.pmd_coefficient < 0:
            raise ConfigurationError("gamma, attenuation and PMD must be non-negative")

    @property
    def beta2(self):
        lam = self.wavelength
        return -self.dispersion_D * lam**2 / (2 * math.pi * units.SPEED_OF_LIGHT)

    @property
    def span_loss(self):
        """Linear power loss factor exp(-alpha L)."""
        return math.exp(-self.attenuation * self.length)

    def with_(self, **kw):
        return replace(self, **kw)

    @classmethod
    def from_engineering(cls, *, length_km=100.0, attenuation_db_km=0.2,
                         dispersion_ps_nm_km=16.8, gamma_w_km=1.3,
                         pmd_ps_sqrt_km=0.13, wavelength_nm=1550.0, name="custom"):
        return cls(
            length=length_km * units.KM,
            attenuation=units.db_per_km_to_neper_per_m(attenuation_db_km),
            dispersion_D=units.ps_nm_km_to_si(dispersion_ps_nm_km),
            gamma=units.per_w_km_to_si(gamma_w_km),
            pmd_coefficient=units.ps_sqrt_km_to_si(pmd_ps_sqrt_km),
            wavelength=wavelength_nm * units.NM,
            name=name,
        )

    def to_engineering(self):
        return {
            "name": self.name,
            "length_km": self.length / units.KM,
            "attenuation_db_km": self.attenuation * units.KM * 10 / math.log(10),
            "dispersion_ps_nm_km": self.dispersion_D / units.ps_nm_km_to_si(1.0),
            "gamma_w_km": self.gamma * units.KM,
            "pmd_ps_sqrt_km": self.pmd_coefficient / units.ps_sqrt_km_to_si(1.0),
            "wavelength_nm": self.wavelength / units.NM,
        }


# D in ps/(nm km), gamma in 1/(W km); PMD 0.13 ps/sqrt(km) for all.
FIBER_PRESETS = {
    "SMF": dict(dispersion_ps_nm_km=16.8, gamma_w_km=1.3),
    "SMF-16.7": dict(dispersion_ps_nm_km=16.7, gamma_w_km=1.3),
    "LEAF": dict(dispersion_ps_nm_km=4.0, gamma_w_km=1.5),
    "Teralight": dict(dispersion_ps_nm_km=8.0, gamma_w_km=1.3),
}


def fiber_preset(name, **overrides):
    """Built-in fiber by name (case-insensitive); engineering-unit overrides allowed."""
    key = {k.lower(): k for k in FIBER_PRESETS}.get(str(name).lower())
    if key is None:
        raise ConfigurationError(
            f"unknown fiber {name!r}; choose from {', '.join(FIBER_PRESETS)}"
        )
    params = dict(FIBER_PRESETS[key], name=key)
    params.update(overrides)
    return FiberSpec.from_engineering(**params)


def gamma_from_n2(n2, a_eff, wavelength):
    return 2 * math.pi * n2 / (wavelength * a_eff)


@dataclass(frozen=True)
class StepController:
    """Constant-nonlinear-phase step sizing.

    A step of length dz started at peak instantaneous power P satisfies
    ``weight * gamma * P * dz <= max_nl_phase``.
    """

    max_nl_phase: float = 5e-4
    max_step: float = math.inf  # optional cap in m; the default rule has none

    def step(self, gamma_eff, peak_power):
        rate = gamma_eff * peak_power
        if rate <= 0.0:
            return self.max_step
        return min(self.max_nl_phase / rate, self.max_step)


def effective_length(dz, alpha):
    """(1 - exp(-alpha dz)) / alpha, the loss-integrated length from step entry."""
    if alpha == 0.0:
        return dz
    return -math.expm1(-alpha * dz) / alpha


def entry_half_length(dz, alpha):
    """Loss-integrated length of the first half of a step, relative to entry power."""
    return effective_length(dz / 2, alpha)


def exit_half_length(dz, alpha):
    """Loss-integrated length of the second half of a step, relative to exit power."""
    if alpha == 0.0:
        return dz / 2
    return math.expm1(alpha * dz / 2) / alpha


def linear_operator(grid, fiber, dz):
    return np.exp((0.5j * fiber.beta2 * dz) * grid.omega**2 - 0.5 * fiber.attenuation * dz)


def linear_step(field, dz, fiber):
    """Loss and dispersion over ``dz`` for both polarizations."""
    spec = to_frequency(field) * linear_operator(field.grid, fiber, dz)
    return to_time(spec, field.grid)


def nonlinear_step(field, dz_effective, gamma, model, backend=None):
    """Exact Kerr phase rotation for a step of effective length ``dz_effective``."""
    k = kernels if backend is None else kernels.get_backend(backend)
    model = PropagationModel.parse(model)
    w_self, w_cross = model.kerr_weights
    out = field.copy()
    g = gamma * dz_effective
    k.nonlinear_phase(out.samples[0], out.samples[1], w_self * g, w_cross * g)
    return out


def amplify_flat(field, gain_linear):
    if not gain_linear > 0:
        raise ValueError("gain must be positive")
    return DualPolField(field.grid, field.samples * math.sqrt(gain_linear))


@dataclass
class StepLog:
    n_steps: int = 0
    max_step_phase: float = 0.0  # largest weight * gamma * P_entry * dz
    min_step: float = math.inf
    max_step: float = 0.0


def _is_trivial(rotation, dgd):
    return dgd == 0.0 and np.array_equal(rotation, np.eye(2))


def propagate_span(field, fiber, plates, model, controller=None, backend=None, log=None):
    """Symmetric split-step integration over one span.

    Each step is N(dz/2) L(dz) N(dz/2) with the Kerr halves evaluated in the
    time domain at the step ends, so the step length is set from the exact
    peak power at step entry. The exit half of one step and the entry half of
    the next act on the same samples and are applied as a single phase, which
    leaves one forward and one inverse transform per step. Plate ``k`` acts
    at its start position; plates with nonzero DGD cost one extra transform
    pair.
    """
    if not math.isclose(plates.span_length, fiber.length, rel_tol=1e-9):
        raise ConfigurationError(
            f"plate sequence length {plates.span_length:g} m does not match "
            f"fiber length {fiber.length:g} m"
        )
    k = kernels if backend is None else kernels.get_backend(backend)
    model = PropagationModel.parse(model)
    controller = controller or StepController()
    grid = field.grid
    alpha = fiber.attenuation
    gamma = fiber.gamma
    w2 = np.ascontiguousarray(grid.omega**2)
    disp = 0.5 * fiber.beta2
    w_self, w_cross = model.kerr_weights
    gamma_eff = model.step_weight * gamma
    omega = grid.omega

    a = np.array(field.samples, dtype=np.complex128, order="C")
    owed = 0.0  # exit-half length not yet applied to ``a``
    d_cache = {}
    z = 0.0
    bounds = plates.boundaries
    for idx in range(plates.n_plates):
        dgd = float(plates.dgds[idx])
        r = plates.rotations[idx]
        if not _is_trivial(r, dgd):
            if owed and gamma > 0.0:
                g = gamma * owed
                k.nonlinear_phase(a[0], a[1], w_self * g, w_cross * g)
            owed = 0.0
            if dgd == 0.0:
                a = np.ascontiguousarray(r @ a)
            else:
                if dgd not in d_cache:
                    d_cache[dgd] = dgd_phasor(omega, dgd)
                spec = sfft.fft(a, axis=-1, overwrite_x=True)
                k.plate_spectral(spec[0], spec[1], w2, 0.0, 1.0, d_cache[dgd],
                                 r[0, 0], r[0, 1], r[1, 0], r[1, 1])
                a = sfft.ifft(spec, axis=-1, overwrite_x=True)
        seg_end = bounds[idx + 1] if idx + 1 < plates.n_plates else fiber.length
        while seg_end - z > 1e-9 * fiber.length:
            peak = k.peak_power(a[0], a[1]) if gamma > 0.0 else 0.0
            dz = min(controller.step(gamma_eff, peak), seg_end - z)
            if gamma > 0.0:
                g = gamma * (owed + entry_half_length(dz, alpha))
                k.nonlinear_phase(a[0], a[1], w_self * g, w_cross * g)
            spec = sfft.fft(a, axis=-1, overwrite_x=True)
            k.disperse(spec[0], spec[1], w2, disp * dz, math.exp(-0.5 * alpha * dz))
            a = sfft.ifft(spec, axis=-1, overwrite_x=True)
            owed = exit_half_length(dz, alpha)
            if log is not None:
                log.n_steps += 1
                log.max_step_phase = max(log.max_step_phase, gamma_eff * peak * dz)
                log.min_step = min(log.min_step, dz)
                log.max_step = max(log.max_step, dz)
            z += dz
        z = seg_end
    if owed and gamma > 0.0:
        g = gamma * owed
        k.nonlinear_phase(a[0], a[1], w_self * g, w_cross * g)
    return DualPolField(grid, a)
