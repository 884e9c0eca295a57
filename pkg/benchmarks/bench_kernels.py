"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--n 65536] [--repeat 50]

Times each kernel in isolation and one short span propagation per backend.
"""
import argparse
import time

import numpy as np

from anlsim import kernels
from anlsim.polmodel import draw_plate_sequence
from anlsim.ssfm import FiberSpec, PropagationModel, StepController, propagate_span
from anlsim.txgen import TxConfig, build_wdm_field


def _time(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def kernel_table(n, repeat):
    rng = np.random.default_rng(0)
    ax = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ay = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w2 = rng.standard_normal(n) ** 2
    d = np.exp(1j * rng.standard_normal(n))
    rows = []
    for name in ("cython", "python"):
        try:
            mod = kernels.get_backend(name)
        except ImportError:
            continue
        x, y = ax.copy(), ay.copy()
        rows.append((name, "nonlinear_phase", _time(lambda: mod.nonlinear_phase(x, y, 1e-6, 1e-6), repeat)))
        rows.append((name, "peak_power", _time(lambda: mod.peak_power(x, y), repeat)))
        rows.append((name, "disperse", _time(lambda: mod.disperse(x, y, w2, 1e-9, 1.0), repeat)))
        rows.append((name, "plate_spectral", _time(
            lambda: mod.plate_spectral(x, y, w2, 1e-9, 1.0, d, 0.6, 0.8j, 0.8j, 0.6), repeat)))
    return rows


def span_table(length):
    cfg = TxConfig(n_channels=3, oversampling=8, n_symbols=1024)
    fiber = FiberSpec(length=length)
    plates = draw_plate_sequence(fiber.pmd_coefficient, fiber.length, 10, seed=1)
    field = build_wdm_field(cfg, sop_seed=1).field
    rows, outs = [], {}
    for name in ("cython", "python"):
        try:
            mod = kernels.get_backend(name)
        except ImportError:
            continue
        t0 = time.perf_counter()
        outs[name] = propagate_span(field, fiber, plates, PropagationModel.MANAKOV,
                                    StepController(), backend=name)
        rows.append((name, f"span {length / 1e3:.0f} km", time.perf_counter() - t0))
    if len(outs) == 2:
        diff = np.max(np.abs(outs["cython"].samples - outs["python"].samples))
        print(f"max |cython - python| after span: {diff:.3e}")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=65536)
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--span-km", type=float, default=20.0)
    args = ap.parse_args()
    print(f"default backend: {kernels.BACKEND}")
    rows = kernel_table(args.n, args.repeat) + span_table(args.span_km * 1e3)
    ref = {(r[1]): r[2] for r in rows if r[0] == "python"}
    print(f"{'backend':<8} {'kernel':<18} {'time':>12} {'speedup':>8}")
    for name, kern, t in rows:
        sp = ref.get(kern, t) / t
        print(f"{name:<8} {kern:<18} {t * 1e3:>10.3f}ms {sp:>7.2f}x")


if __name__ == "__main__":
    main()
