import os
import subprocess
import sys

import numpy as np
import pytest

from anlsim import kernels
from anlsim.polmodel import draw_plate_sequence, random_jones
from anlsim.ssfm import FiberSpec, propagate_span
from anlsim.txgen import TxConfig, build_wdm_field

try:
    kernels.get_backend("cython")
    BACKENDS = ["python", "cython"]
except ImportError:  # extension not built
    BACKENDS = ["python"]

needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def _arrays(n=1000, seed=0):
    r = np.random.default_rng(seed)
    ax = r.standard_normal(n) + 1j * r.standard_normal(n)
    ay = r.standard_normal(n) + 1j * r.standard_normal(n)
    return ax, ay, r.standard_normal(n) ** 2


@pytest.mark.parametrize("name", BACKENDS)
def test_nonlinear_phase_reference(name):
    k = kernels.get_backend(name)
    ax, ay, _ = _arrays()
    px, py = np.abs(ax) ** 2, np.abs(ay) ** 2
    ex = ax * np.exp(1j * (0.3 * px + 0.2 * py))
    ey = ay * np.exp(1j * (0.3 * py + 0.2 * px))
    peak = k.nonlinear_phase(ax, ay, 0.3, 0.2)
    assert peak == pytest.approx(np.max(px + py), rel=1e-15)
    assert np.allclose(ax, ex, rtol=1e-13) and np.allclose(ay, ey, rtol=1e-13)


@pytest.mark.parametrize("name", BACKENDS)
def test_disperse_reference(name):
    k = kernels.get_backend(name)
    ax, ay, w2 = _arrays()
    ex, ey = ax * 0.7 * np.exp(1.5j * w2), ay * 0.7 * np.exp(1.5j * w2)
    k.disperse(ax, ay, w2, 1.5, 0.7)
    assert np.allclose(ax, ex, rtol=1e-13) and np.allclose(ay, ey, rtol=1e-13)


@pytest.mark.parametrize("name", BACKENDS)
def test_plate_spectral_reference(name):
    k = kernels.get_backend(name)
    ax, ay, w2 = _arrays()
    r = random_jones(np.random.default_rng(1))
    d = np.exp(1j * np.linspace(0, 3, len(ax)))
    h = 0.9 * np.exp(-0.4j * w2)
    ex = h * d * (r[0, 0] * ax + r[0, 1] * ay)
    ey = h * np.conj(d) * (r[1, 0] * ax + r[1, 1] * ay)
    k.plate_spectral(ax, ay, w2, -0.4, 0.9, d, r[0, 0], r[0, 1], r[1, 0], r[1, 1])
    assert np.allclose(ax, ex, rtol=1e-13) and np.allclose(ay, ey, rtol=1e-13)


@pytest.mark.parametrize("name", BACKENDS)
def test_peak_power(name):
    ax, ay, _ = _arrays()
    assert kernels.get_backend(name).peak_power(ax, ay) == pytest.approx(
        np.max(np.abs(ax) ** 2 + np.abs(ay) ** 2), rel=1e-15)


@needs_ext
def test_backends_agree_on_a_span():
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=256)
    fiber = FiberSpec(length=20e3)
    sig = build_wdm_field(cfg, sop_seed=1)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 5, seed=1)
    a = propagate_span(sig.field, fiber, plates, "cnlse", backend="cython").samples
    b = propagate_span(sig.field, fiber, plates, "cnlse", backend="python").samples
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, ANLSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import anlsim; print(anlsim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_default_is_compiled():
    env = {k: v for k, v in os.environ.items() if k != "ANLSIM_PURE_PYTHON"}
    out = subprocess.run([sys.executable, "-c", "import anlsim; print(anlsim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"
