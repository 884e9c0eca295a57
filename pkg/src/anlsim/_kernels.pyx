# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner-loop kernels for the split-step engine.

Every function mirrors one in ``_kernels_py`` with the same signature and
in-place semantics. Arrays are contiguous complex128 vectors of equal length.
"""
from libc.math cimport cos, sin


def nonlinear_phase(double complex[::1] ax, double complex[::1] ay,
                    double k_self, double k_cross):
    """Kerr phase rotation in place; returns the peak of |ax|^2 + |ay|^2."""
    cdef Py_ssize_t i, n = ax.shape[0]
    cdef double px, py, phx, phy, c, s, re, im, peak = 0.0
    for i in range(n):
        re = ax[i].real
        im = ax[i].imag
        px = re * re + im * im
        re = ay[i].real
        im = ay[i].imag
        py = re * re + im * im
        if px + py > peak:
            peak = px + py
        phx = k_self * px + k_cross * py
        phy = k_self * py + k_cross * px
        c = cos(phx)
        s = sin(phx)
        re = ax[i].real
        im = ax[i].imag
        ax[i] = (re * c - im * s) + 1j * (re * s + im * c)
        c = cos(phy)
        s = sin(phy)
        re = ay[i].real
        im = ay[i].imag
        ay[i] = (re * c - im * s) + 1j * (re * s + im * c)
    return peak


def peak_power(double complex[::1] ax, double complex[::1] ay):
    cdef Py_ssize_t i, n = ax.shape[0]
    cdef double p, peak = 0.0
    for i in range(n):
        p = (ax[i].real * ax[i].real + ax[i].imag * ax[i].imag
             + ay[i].real * ay[i].real + ay[i].imag * ay[i].imag)
        if p > peak:
            peak = p
    return peak


def disperse(double complex[::1] sx, double complex[::1] sy,
             const double[::1] w2, double phase, double amp):
    """sx, sy <- amp * exp(i phase w2) * (sx, sy), in place."""
    cdef Py_ssize_t i, n = sx.shape[0]
    cdef double th, c, s, re, im
    for i in range(n):
        th = phase * w2[i]
        c = amp * cos(th)
        s = amp * sin(th)
        re = sx[i].real
        im = sx[i].imag
        sx[i] = (re * c - im * s) + 1j * (re * s + im * c)
        re = sy[i].real
        im = sy[i].imag
        sy[i] = (re * c - im * s) + 1j * (re * s + im * c)


def plate_spectral(double complex[::1] sx, double complex[::1] sy,
                   const double[::1] w2, double phase, double amp,
                   double complex[::1] d,
                   double complex r00, double complex r01,
                   double complex r10, double complex r11):
    """sx, sy <- amp exp(i phase w2) diag(d, conj(d)) R (sx, sy), in place."""
    cdef Py_ssize_t i, n = sx.shape[0]
    cdef double complex tx, ty, h, hd, hdc
    cdef double th
    for i in range(n):
        tx = r00 * sx[i] + r01 * sy[i]
        ty = r10 * sx[i] + r11 * sy[i]
        th = phase * w2[i]
        h = amp * cos(th) + 1j * (amp * sin(th))
        hd = h * d[i]
        hdc = h * (d[i].real - 1j * d[i].imag)
        sx[i] = hd * tx
        sy[i] = hdc * ty
