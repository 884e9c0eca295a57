import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anlsim import units
from anlsim.polmodel import PlateSequence, draw_plate_sequence
from anlsim.siggrid import ConfigurationError, DualPolField, SimulationGrid, total_power
from anlsim.ssfm import (FIBER_PRESETS, FiberSpec, PropagationModel, StepController, StepLog,
                         amplify_flat, effective_length, entry_half_length, exit_half_length,
                         fiber_preset, gamma_from_n2, linear_step, nonlinear_step,
                         propagate_span)
from anlsim.txgen import TxConfig, build_wdm_field

CNLSE, MANAKOV = PropagationModel.CNLSE, PropagationModel.MANAKOV


def _cw(n=64, px=1e-3, py=0.0):
    g = SimulationGrid(n, 1e11)
    return DualPolField.from_xy(g, np.full(n, math.sqrt(px), complex), np.full(n, math.sqrt(py), complex))


def _random(seed, n=256):
    r = np.random.default_rng(seed)
    g = SimulationGrid(n, 1e12)
    return DualPolField(g, 0.03 * (r.standard_normal((2, n)) + 1j * r.standard_normal((2, n))))


# -- model and fiber ----------------------------------------------------------------

def test_kerr_weights():
    assert CNLSE.kerr_weights == (1.0, 2.0 / 3.0)
    assert MANAKOV.kerr_weights == (8.0 / 9.0, 8.0 / 9.0)
    assert PropagationModel.parse("Manakov-PMD") is MANAKOV
    assert PropagationModel.parse("cnlse") is CNLSE
    with pytest.raises(ValueError):
        PropagationModel.parse("vector")


def test_beta2_smf():
    f = FiberSpec.from_engineering(dispersion_ps_nm_km=16.7)
    assert f.beta2 / (units.PS**2 / units.KM) == pytest.approx(-21.3, abs=0.05)


def test_engineering_round_trip():
    eng = fiber_preset("LEAF").to_engineering()
    f = FiberSpec.from_engineering(**eng)
    assert f == fiber_preset("LEAF")
    assert eng["dispersion_ps_nm_km"] == pytest.approx(4.0)
    assert eng["gamma_w_km"] == pytest.approx(1.5)
    assert eng["attenuation_db_km"] == pytest.approx(0.2)


@pytest.mark.parametrize("name", list(FIBER_PRESETS))
def test_presets_case_insensitive(name):
    assert fiber_preset(name.upper()) == fiber_preset(name)
    assert fiber_preset(name).pmd_coefficient == pytest.approx(units.ps_sqrt_km_to_si(0.13))


def test_preset_unknown_and_invalid():
    with pytest.raises(ConfigurationError):
        fiber_preset("DSF")
    with pytest.raises(ConfigurationError):
        FiberSpec(length=0.0)
    with pytest.raises(ConfigurationError):
        FiberSpec(gamma=-1e-3)


def test_gamma_from_n2():
    g = gamma_from_n2(2.6e-20, 80e-12, 1550e-9)
    assert g == pytest.approx(1.3175e-3, rel=1e-3)
    assert g * units.KM == pytest.approx(1.3, abs=0.02)
    assert gamma_from_n2(0.0, 80e-12, 1550e-9) == 0.0
    assert gamma_from_n2(2.6e-20, 160e-12, 1550e-9) == pytest.approx(g / 2)


def test_effective_lengths():
    a = 4.6e-5
    assert effective_length(1e3, 0.0) == 1e3
    assert effective_length(1e3, a) == pytest.approx((1 - math.exp(-a * 1e3)) / a)
    # entry half plus decayed exit half spans the whole step
    dz = 2e3
    total = entry_half_length(dz, a) + math.exp(-a * dz) * exit_half_length(dz, a)
    assert total == pytest.approx(effective_length(dz, a), rel=1e-14)


# -- linear step -------------------------------------------------------------------

def _rms_width(field):
    p = np.abs(field.samples_x) ** 2
    t = field.grid.time
    t = t - np.sum(t * p) / np.sum(p)
    return math.sqrt(np.sum(t**2 * p) / np.sum(p))


def test_gaussian_dispersive_broadening():
    g = SimulationGrid(4096, 4e12)
    t0 = 5e-12
    t = g.time - g.duration / 2
    f = DualPolField.from_xy(g, np.exp(-t**2 / (2 * t0**2)).astype(complex))
    fiber = FiberSpec(attenuation=0.0)
    z = 20e3
    out = linear_step(f, z, fiber)
    ratio = _rms_width(out) / _rms_width(f)
    assert ratio == pytest.approx(math.sqrt(1 + (fiber.beta2 * z / t0**2) ** 2), rel=1e-3)


def test_loss_only_scaling():
    f = _random(0)
    fiber = FiberSpec(dispersion_D=0.0)
    out = linear_step(f, 1234.0, fiber)
    assert total_power(out) == pytest.approx(total_power(f) * math.exp(-fiber.attenuation * 1234.0), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.0, 1e5))
def test_lossless_linear_step_preserves_power(seed, dz):
    f = _random(seed)
    out = linear_step(f, dz, FiberSpec(attenuation=0.0))
    assert total_power(out) == pytest.approx(total_power(f), rel=1e-10)


# -- nonlinear step -----------------------------------------------------------------

def test_spm_phase_exact():
    f = _cw(px=2e-3)
    out = nonlinear_step(f, 500.0, 1.3e-3, CNLSE)
    assert np.allclose(np.angle(out.samples_x), 1.3e-3 * 2e-3 * 500.0, rtol=0, atol=1e-15)
    assert np.all(out.samples_y == 0)


def test_manakov_is_eight_ninths():
    f = _cw(px=2e-3)
    pc = np.angle(nonlinear_step(f, 500.0, 1.3e-3, CNLSE).samples_x)
    pm = np.angle(nonlinear_step(f, 500.0, 1.3e-3, MANAKOV).samples_x)
    assert np.max(np.abs(pm / pc - 8 / 9)) < 1e-12


def test_cnlse_cross_phase():
    f = _cw(px=1e-3, py=3e-3)
    out = nonlinear_step(f, 100.0, 1e-3, CNLSE)
    assert np.angle(out.samples_x[0]) == pytest.approx(1e-3 * 100 * (1e-3 + 2 / 3 * 3e-3), rel=1e-12)
    assert np.angle(out.samples_y[0]) == pytest.approx(1e-3 * 100 * (3e-3 + 2 / 3 * 1e-3), rel=1e-12)
    out = nonlinear_step(f, 100.0, 1e-3, MANAKOV)
    assert np.angle(out.samples_x[0]) == pytest.approx(1e-3 * 100 * 8 / 9 * 4e-3, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([CNLSE, MANAKOV]), st.floats(0, 1e4))
def test_nonlinear_step_preserves_modulus(seed, model, dz):
    f = _random(seed)
    out = nonlinear_step(f, dz, 1.3e-3, model)
    assert np.allclose(np.abs(out.samples), np.abs(f.samples), rtol=1e-14, atol=0)


def test_gamma_zero_identity():
    f = _random(1)
    assert np.array_equal(nonlinear_step(f, 1e3, 0.0, CNLSE).samples, f.samples)


# -- amplifier ----------------------------------------------------------------------

def test_amplify_flat():
    f = _random(2)
    fiber = FiberSpec(dispersion_D=0.0)
    lossy = linear_step(f, fiber.length, fiber)
    back = amplify_flat(lossy, math.exp(fiber.attenuation * fiber.length))
    assert total_power(back) == pytest.approx(total_power(f), rel=1e-12)
    assert np.array_equal(amplify_flat(f, 1.0).samples, f.samples)
    assert total_power(amplify_flat(f, 7.3)) / total_power(f) == pytest.approx(7.3, rel=1e-12)
    with pytest.raises(ValueError):
        amplify_flat(f, 0.0)


# -- span ----------------------------------------------------------------------------

def test_length_mismatch():
    with pytest.raises(ConfigurationError):
        propagate_span(_cw(), FiberSpec(), PlateSequence.identity(50e3), CNLSE)


def test_linear_span_equals_linear_step():
    f = _random(3)
    fiber = FiberSpec(gamma=0.0, attenuation=0.0, length=30e3)
    out = propagate_span(f, fiber, PlateSequence.identity(fiber.length, 4), CNLSE)
    ref = linear_step(f, fiber.length, fiber)
    assert np.max(np.abs(out.samples - ref.samples)) < 1e-12 * np.max(np.abs(ref.samples))


@pytest.mark.parametrize("alpha_db", [0.0, 0.2])
def test_spm_oracle(alpha_db):
    fiber = FiberSpec(dispersion_D=0.0, attenuation=units.db_per_km_to_neper_per_m(alpha_db),
                      pmd_coefficient=0.0)
    f = _cw(px=1e-3)
    log = StepLog()
    out = propagate_span(f, fiber, PlateSequence.identity(fiber.length), CNLSE,
                         StepController(5e-4), log=log)
    expected = fiber.gamma * 1e-3 * effective_length(fiber.length, fiber.attenuation)
    phase = np.unwrap(np.angle(out.samples_x))
    assert np.allclose(phase, expected, rtol=1e-4)
    assert log.max_step_phase <= 5e-4 * (1 + 1e-12)


def test_step_controller_bound_in_wdm():
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=256)
    fiber = FiberSpec(length=20e3)
    sig = build_wdm_field(cfg, sop_seed=2)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 7, seed=2)
    log = StepLog()
    propagate_span(sig.field, fiber, plates, CNLSE, StepController(5e-4), log=log)
    assert log.max_step_phase <= 5e-4 * (1 + 1e-12)
    assert log.n_steps >= 7
    assert log.max_step > log.min_step  # steps grow as power decays


def test_step_controller_cap():
    c = StepController(5e-4, max_step=100.0)
    assert c.step(1e-3, 1e-9) == 100.0
    assert c.step(0.0, 1.0) == 100.0
    assert StepController().step(0.0, 1.0) == math.inf


def test_fundamental_soliton():
    fiber = FiberSpec(attenuation=0.0, pmd_coefficient=0.0)
    t0 = 5e-12
    p0 = abs(fiber.beta2) / (fiber.gamma * t0**2)
    z0 = math.pi / 2 * t0**2 / abs(fiber.beta2)
    fiber = fiber.with_(length=z0)
    g = SimulationGrid(2048, 2048 / (40 * 20 * t0))
    t = g.time - g.duration / 2
    a0 = math.sqrt(p0) / np.cosh(t / t0)
    out = propagate_span(DualPolField.from_xy(g, a0.astype(complex)), fiber,
                         PlateSequence.identity(z0), CNLSE, StepController(5e-4))
    err = np.sqrt(np.mean((np.abs(out.samples_x) - a0) ** 2) / np.mean(a0**2))
    assert err < 0.01
    assert np.max(np.abs(out.samples_y)) == 0.0


def test_degenerate_single_pol_identity():
    f = _random(4)
    f = DualPolField.from_xy(f.grid, f.samples_x)
    fiber = FiberSpec(length=5e3)
    plates = PlateSequence.identity(fiber.length)
    man = propagate_span(f, fiber, plates, MANAKOV)
    cn = propagate_span(f, fiber.with_(gamma=fiber.gamma * 8 / 9), plates, CNLSE)
    assert np.allclose(cn.samples, man.samples, rtol=0, atol=1e-13 * np.max(np.abs(man.samples)))


@pytest.mark.parametrize("length, tol", [(20e3, 1e-6), (100e3, None)])
def test_identity_plates_transparent(length, tol):
    # trivial plates only move step boundaries; the change stays within the
    # step-size discretization error
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=256)
    sig = build_wdm_field(cfg, sop_seed=2)
    fiber = FiberSpec(length=length)
    one = propagate_span(sig.field, fiber, PlateSequence.identity(length, 1), MANAKOV).samples
    many = propagate_span(sig.field, fiber, PlateSequence.identity(length, 10), MANAKOV).samples
    rel = np.linalg.norm(one - many) / np.linalg.norm(one)
    if tol is None:
        fine = propagate_span(sig.field, fiber, PlateSequence.identity(length, 1), MANAKOV,
                              StepController(2e-5)).samples
        tol = 2 * np.linalg.norm(one - fine) / np.linalg.norm(one)
    assert rel < tol


def test_span_power_bookkeeping():
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=256)
    fiber = FiberSpec(length=20e3)
    sig = build_wdm_field(cfg, sop_seed=2)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 5, seed=2)
    out = propagate_span(sig.field, fiber, plates, CNLSE)
    assert total_power(out) == pytest.approx(total_power(sig.field) * fiber.span_loss, rel=1e-10)


def _rel_rms(a, b):
    return math.sqrt(np.mean(np.abs(a - b) ** 2) / np.mean(np.abs(b) ** 2))


def test_self_convergence_single_channel():
    cfg = TxConfig(n_channels=1, oversampling=16, n_symbols=256)
    fiber = FiberSpec()
    sig = build_wdm_field(cfg, sop_seed=1)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 10, seed=1)
    a = propagate_span(sig.field, fiber, plates, MANAKOV, StepController(5e-4))
    b = propagate_span(sig.field, fiber, plates, MANAKOV, StepController(2.5e-4))
    assert _rel_rms(a.samples, b.samples) < 1e-5


@pytest.mark.xfail(strict=True, reason="constant-phase steps grow to ~1.6 km late in a lossy "
                   "WDM span; field-level self-convergence there is ~3e-4, see decisions ledger")
def test_self_convergence_wdm():
    cfg = TxConfig(n_channels=5, oversampling=16, n_symbols=256)
    fiber = FiberSpec()
    sig = build_wdm_field(cfg, sop_seed=1)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 10, seed=1)
    a = propagate_span(sig.field, fiber, plates, MANAKOV, StepController(5e-4))
    b = propagate_span(sig.field, fiber, plates, MANAKOV, StepController(2.5e-4))
    assert _rel_rms(a.samples, b.samples) < 1e-5


def test_second_order_convergence():
    # lossless WDM: error against a fine reference drops 4x per halving
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=256)
    fiber = FiberSpec(attenuation=0.0, length=20e3)
    sig = build_wdm_field(cfg, sop_seed=3)
    plates = PlateSequence.identity(fiber.length)
    ref = propagate_span(sig.field, fiber, plates, CNLSE, StepController(5e-4 / 16)).samples
    e1 = _rel_rms(propagate_span(sig.field, fiber, plates, CNLSE, StepController(2e-3)).samples, ref)
    e2 = _rel_rms(propagate_span(sig.field, fiber, plates, CNLSE, StepController(1e-3)).samples, ref)
    assert e1 / e2 == pytest.approx(4.0, rel=0.15)
