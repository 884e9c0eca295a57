"""Pure-numpy versions of the compiled kernels (same signatures, in place)."""
import numpy as np


def nonlinear_phase(ax, ay, k_self, k_cross):
    px = ax.real**2 + ax.imag**2
    py = ay.real**2 + ay.imag**2
    peak = float(np.max(px + py)) if px.size else 0.0
    ax *= np.exp(1j * (k_self * px + k_cross * py))
    ay *= np.exp(1j * (k_self * py + k_cross * px))
    return peak


def peak_power(ax, ay):
    if ax.size == 0:
        return 0.0
    return float(np.max(ax.real**2 + ax.imag**2 + ay.real**2 + ay.imag**2))


def disperse(sx, sy, w2, phase, amp):
    h = amp * np.exp(1j * phase * w2)
    sx *= h
    sy *= h


def plate_spectral(sx, sy, w2, phase, amp, d, r00, r01, r10, r11):
    tx = r00 * sx + r01 * sy
    ty = r10 * sx + r11 * sy
    h = amp * np.exp(1j * phase * w2)
    np.multiply(h * d, tx, out=sx)
    np.multiply(h * np.conj(d), ty, out=sy)
