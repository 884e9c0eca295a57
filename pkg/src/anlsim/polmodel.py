"""Waveplate model of fiber birefringence.

A span is a concatenation of ``N_p`` plates. Plate ``k`` first rotates the
field into its own eigenbasis (``rotation``, frequency independent) and then
delays the two eigen-polarizations by +/- dgd/2:

    T_k(w) = diag(exp(+i w dgd/2), exp(-i w dgd/2)) @ R_k

so the field inside a plate is expressed in that plate's birefringence axes.
The span operator is ``U(w) = T_N ... T_1``; the receiver applies ``U^H``.
Only the differential delay is modeled (retarded frame, no common delay).
"""
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .siggrid import DualPolField, to_frequency, to_time

MEAN = "mean"
RMS = "rms"


# -- Jones / Stokes helpers -------------------------------------------------

def jones_from_stokes(s_axis, psi=0.0, phi0=0.0):
    """Unitary mapping the x Jones vector onto the Stokes direction ``s_axis``.

    ``psi`` is a retardation about the x axis applied first and ``phi0`` a
    common phase; neither changes where x lands on the sphere.
    """
    s1, s2, s3 = s_axis
    theta = math.acos(max(-1.0, min(1.0, s1)))
    phi = math.atan2(s3, s2)
    a = math.cos(theta / 2)
    b = math.sin(theta / 2) * complex(math.cos(phi), math.sin(phi))
    u = np.array([[a, -b.conjugate()], [b, a]], dtype=np.complex128)
    ret = np.diag([np.exp(1j * psi), np.exp(-1j * psi)])
    return np.exp(1j * phi0) * (u @ ret)


def random_jones(rng, size=None):
    """Haar-distributed 2x2 unitaries (uniform Stokes axis, uniform retardation).

    Returns one ``(2, 2)`` matrix, or ``(size, 2, 2)`` when ``size`` is given.
    """
    m = 1 if size is None else int(size)
    cos_t = rng.uniform(-1.0, 1.0, m)
    phi = rng.uniform(0.0, 2 * np.pi, m)
    psi = rng.uniform(0.0, 2 * np.pi, m)
    phi0 = rng.uniform(0.0, 2 * np.pi, m)
    half = np.arccos(cos_t) / 2
    a = np.cos(half)
    b = np.sin(half) * np.exp(1j * phi)
    ep = np.exp(1j * psi)
    g = np.exp(1j * phi0)
    out = np.empty((m, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = g * a * ep
    out[:, 0, 1] = -g * np.conj(b) / ep
    out[:, 1, 0] = g * b * ep
    out[:, 1, 1] = g * a / ep
    return out[0] if size is None else out


def stokes(jones_vector):
    """Normalized Stokes vector (s1, s2, s3) of a Jones vector."""
    ex, ey = jones_vector[..., 0], jones_vector[..., 1]
    s0 = np.abs(ex) ** 2 + np.abs(ey) ** 2
    s1 = np.abs(ex) ** 2 - np.abs(ey) ** 2
    c = 2 * np.conj(ex) * ey
    return np.stack([s1, c.real, c.imag], axis=-1) / s0[..., None]


# -- plates ------------------------------------------------------------------

def plate_dgd(pmd_coefficient, span_length, n_plates, calibration=MEAN):
    """Per-plate DGD (s) giving the target span DGD in the many-plate limit.

    ``calibration="mean"`` makes the Maxwellian mean DGD equal
    ``pmd_coefficient * sqrt(span_length)``; ``"rms"`` makes the rms DGD equal it.
    """
    base = pmd_coefficient * math.sqrt(span_length / n_plates)
    if calibration == MEAN:
        return base * math.sqrt(3 * math.pi / 8)
    if calibration == RMS:
        return base
    raise ValueError(f"unknown DGD calibration {calibration!r}")


@dataclass(frozen=True)
class PlateSpec:
    rotation: np.ndarray
    dgd: float
    length: float


@dataclass(frozen=True, eq=False)
class PlateSequence:
    """One random birefringence draw: ``rotations`` is ``(N_p, 2, 2)``."""

    rotations: np.ndarray
    dgds: np.ndarray
    span_length: float
    seed: int | None = None
    pmd_coefficient: float = 0.0
    calibration: str = MEAN
    meta: dict = dc_field(default_factory=dict)

    @property
    def n_plates(self):
        return len(self.dgds)

    @property
    def plate_length(self):
        return self.span_length / self.n_plates

    @property
    def boundaries(self):
        """Plate start positions plus the span end, in m."""
        return np.arange(self.n_plates + 1) * self.plate_length

    @property
    def plates(self):
        ln = self.plate_length
        return [PlateSpec(r, float(d), ln) for r, d in zip(self.rotations, self.dgds)]

    def to_record(self):
        """Serializable description; matrices are regenerated from the seed."""
        return {
            "seed": None if self.seed is None else int(self.seed),
            "n_plates": self.n_plates,
            "pmd_coefficient_ps_sqrt_km": self.pmd_coefficient / 1e-12 * math.sqrt(1e3),
            "span_length_km": self.span_length / 1e3,
            "dgd_calibration": self.calibration,
        }

    @classmethod
    def from_record(cls, rec):
        return draw_plate_sequence(
            rec["pmd_coefficient_ps_sqrt_km"] * 1e-12 / math.sqrt(1e3),
            rec["span_length_km"] * 1e3,
            rec["n_plates"],
            rec["seed"],
            calibration=rec.get("dgd_calibration", MEAN),
        )

    @classmethod
    def identity(cls, span_length, n_plates=1):
        rot = np.broadcast_to(np.eye(2, dtype=np.complex128), (n_plates, 2, 2)).copy()
        return cls(rot, np.zeros(n_plates), float(span_length))

    def same_draw(self, other):
        return (
            self.n_plates == other.n_plates
            and np.array_equal(self.rotations, other.rotations)
            and np.array_equal(self.dgds, other.dgds)
        )


def draw_plate_sequence(pmd_coefficient, span_length, n_plates, seed, calibration=MEAN):
    if n_plates < 1:
        raise ValueError("n_plates must be >= 1")
    rng = np.random.default_rng(seed)
    rotations = random_jones(rng, n_plates)
    dgd = plate_dgd(pmd_coefficient, span_length, n_plates, calibration) if pmd_coefficient > 0 else 0.0
    return PlateSequence(
        rotations,
        np.full(n_plates, dgd),
        float(span_length),
        seed=seed,
        pmd_coefficient=float(pmd_coefficient),
        calibration=calibration,
    )


def dgd_phasor(omega, dgd):
    """exp(+i w dgd/2): the fast-axis factor of a plate's delay operator."""
    return np.exp(0.5j * dgd * omega)


def apply_plate(field, plate):
    s = plate.rotation @ field.samples
    spec = to_frequency(DualPolField(field.grid, s))
    d = dgd_phasor(field.grid.omega, plate.dgd)
    spec[0] *= d
    spec[1] *= np.conj(d)
    return to_time(spec, field.grid)


# -- whole-sequence operators -------------------------------------------------

class JonesOperator:
    """Frequency-resolved 2x2 operator; ``m[i, j]`` is a vector over the grid."""

    def __init__(self, m):
        self.m = np.asarray(m, dtype=np.complex128)

    @classmethod
    def identity(cls, n):
        m = np.zeros((2, 2, n), dtype=np.complex128)
        m[0, 0] = m[1, 1] = 1.0
        return cls(m)

    def adjoint(self):
        return JonesOperator(np.conj(self.m.transpose(1, 0, 2)))

    def __matmul__(self, other):
        return JonesOperator(np.einsum("ijn,jkn->ikn", self.m, other.m))

    def apply_spectrum(self, spec):
        m = self.m
        return np.stack([
            m[0, 0] * spec[0] + m[0, 1] * spec[1],
            m[1, 0] * spec[0] + m[1, 1] * spec[1],
        ])

    def apply(self, field):
        return to_time(self.apply_spectrum(to_frequency(field)), field.grid)


def forward_jones(seq, grid):
    """The span operator ``T_N ... T_1`` on every grid frequency."""
    w = grid.omega
    m = JonesOperator.identity(grid.n_samples).m
    for r, dgd in zip(seq.rotations, seq.dgds):
        row0 = r[0, 0] * m[0] + r[0, 1] * m[1]
        row1 = r[1, 0] * m[0] + r[1, 1] * m[1]
        if dgd != 0.0:
            d = dgd_phasor(w, dgd)
            row0 *= d
            row1 *= np.conj(d)
        m = np.stack([row0, row1])
    return JonesOperator(m)


def inverse_jones(seq, grid):
    return forward_jones(seq, grid).adjoint()


def _dgd_from_derivative(u, du):
    # H = i U' U^H is Hermitian and traceless; eigenvalues are +/- DGD/2
    h = 1j * du @ np.conj(np.swapaxes(u, -1, -2))
    h00 = 0.5 * (h[..., 0, 0] - h[..., 1, 1]).real
    return 2.0 * np.sqrt(h00**2 + np.abs(h[..., 0, 1]) ** 2)


def total_dgd_batch(rotations, dgds):
    """First-order DGD at the carrier for a stack of sequences.

    ``rotations`` is ``(M, N_p, 2, 2)`` and ``dgds`` ``(M, N_p)`` or ``(N_p,)``.
    The derivative dU/dw is accumulated exactly through the product.
    """
    rotations = np.asarray(rotations)
    m = rotations.shape[0]
    dgds = np.broadcast_to(np.asarray(dgds, dtype=float), rotations.shape[:2])
    u = np.broadcast_to(np.eye(2, dtype=np.complex128), (m, 2, 2)).copy()
    du = np.zeros_like(u)
    sign = np.array([0.5j, -0.5j])
    for k in range(rotations.shape[1]):
        r = rotations[:, k]
        u = r @ u
        du = r @ du
        # D(0) = I and D'(0) = diag(+i dgd/2, -i dgd/2)
        du = du + (sign[None, :, None] * dgds[:, k, None, None]) * u
    return _dgd_from_derivative(u, du)


def total_dgd(seq):
    return float(total_dgd_batch(seq.rotations[None], seq.dgds[None])[0])


def jones_at(seq, omega):
    """Span operator at one angular frequency (2x2)."""
    u = np.eye(2, dtype=np.complex128)
    for r, dgd in zip(seq.rotations, seq.dgds):
        d = np.exp(0.5j * dgd * omega)
        u = np.diag([d, np.conj(d)]) @ r @ u
    return u


def maxwell_scale(mean_dgd):
    """Scale parameter ``a`` of the Maxwell law with the given mean."""
    return mean_dgd * math.sqrt(math.pi / 8)
