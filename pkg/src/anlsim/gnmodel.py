"""GN-model quality-of-transmission formulas built on the a_NL abstraction.

Powers are in W and a_NL in 1/W^2 unless a function name says otherwise.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from . import units


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Span:
    power: float
    noise_figure: float  # linear
    gain: float  # linear
    a_nl: float = 0.0


@dataclass(frozen=True)
class GnLink:
    spans: list
    bandwidth: float
    light_frequency: float = units.SPEED_OF_LIGHT / 1550e-9
    snr_trx: float | None = None  # None: ideal transceiver
    epsilon: float = 0.0
    alpha_nl: float = 0.0

    def __post_init__(self):
        for s in self.spans:
            if min(s.power, s.noise_figure, s.gain) <= 0:
                raise DomainError("span powers, noise figures and gains must be positive")
        if self.epsilon < 0:
            raise DomainError("epsilon must be non-negative")


@dataclass(frozen=True)
class AnlDistribution:
    mu: float  # 1/W^2
    sigma: float  # 1/W^2
    n_samples: int = 0

    @property
    def mu_db(self):
        return units.anl_to_db(self.mu)

    @classmethod
    def from_db(cls, mu_db, sigma_mw2, n_samples=0):
        """Build from the customary units: mean in dBmW^-2, std in mW^-2."""
        return cls(units.anl_from_db(mu_db), units.per_mw2_to_per_w2(sigma_mw2), n_samples)


def ase_power(nf, gain, bandwidth, light_frequency=units.SPEED_OF_LIGHT / 1550e-9):
    return nf * units.PLANCK * light_frequency * (gain - 1.0) * bandwidth


def ber_from_snr_qpsk(snr):
    if np.any(np.asarray(snr) < 0):
        raise DomainError("SNR must be non-negative")
    return 0.5 * erfc(np.sqrt(np.asarray(snr, dtype=float) / 2.0))


def ber_from_q(q):
    return 0.5 * erfc(np.asarray(q, dtype=float) / math.sqrt(2.0))


def q_from_ber(ber):
    ber = np.asarray(ber, dtype=float)
    if np.any((ber <= 0) | (ber > 0.5)):
        raise DomainError("BER must lie in (0, 0.5]")
    return math.sqrt(2.0) * erfcinv(2.0 * ber) + 0.0  # avoid -0.0 at BER = 1/2


def snr_with_nli(p, p_ase, a_nl, p_trx=0.0):
    """P / (P_ASE + a_NL P^3 + P_TRX)."""
    if p <= 0:
        raise DomainError("signal power must be positive")
    den = p_ase + a_nl * p**3 + p_trx
    if den <= 0:
        raise DomainError("all noise contributions are zero; SNR is unbounded")
    return p / den


def inverse_snr_accumulate(link):
    """Linear SNR of a heterogeneous multi-span link (inverse SNRs add)."""
    inv = 0.0 if link.snr_trx is None else 1.0 / link.snr_trx
    for s in link.spans:
        inv += ase_power(s.noise_figure, s.gain, link.bandwidth, link.light_frequency) / s.power
        inv += s.a_nl * s.power**2
    return math.inf if inv == 0 else 1.0 / inv


def a_nl_supralinear(alpha_nl, n, epsilon):
    """End-of-line a_NL = alpha_NL * N^(1 + epsilon)."""
    return alpha_nl * n ** (1.0 + epsilon)


def snr_identical_spans(n, p, nf, g, b, alpha_nl, epsilon,
                        light_frequency=units.SPEED_OF_LIGHT / 1550e-9):
    if n < 1:
        raise DomainError("need at least one span")
    ase = n * ase_power(nf, g, b, light_frequency)
    return p / (ase + a_nl_supralinear(alpha_nl, n, epsilon) * p**3)


def p_opt(n, nf, g, b, alpha_nl, epsilon, light_frequency=units.SPEED_OF_LIGHT / 1550e-9):
    """Launch power maximizing :func:`snr_identical_spans`."""
    ase = n * ase_power(nf, g, b, light_frequency)
    return (ase / (2.0 * a_nl_supralinear(alpha_nl, n, epsilon))) ** (1.0 / 3.0)


def snr_opt(n, nf, g, b, alpha_nl, epsilon, light_frequency=units.SPEED_OF_LIGHT / 1550e-9):
    if min(n, nf, g - 1.0, b, alpha_nl) <= 0:
        raise DomainError("parameters must be positive (and gain > 1)")
    ase1 = ase_power(nf, g, b, light_frequency)
    return 2 ** (2 / 3) / (3 * alpha_nl ** (1 / 3) * n ** (1 + epsilon / 3) * ase1 ** (2 / 3))


def delta_q2_opt(dist):
    """dB width of the optimum-Q^2 band spanned by a_NL = mu +/- 3 sigma."""
    if dist.mu <= 3 * dist.sigma:
        raise DomainError("mu <= 3 sigma: the band reaches non-positive a_NL")
    return 10.0 / 3.0 * math.log10((dist.mu + 3 * dist.sigma) / (dist.mu - 3 * dist.sigma))


def q2_opt_difference(dist_cnlse, dist_manakov):
    """Q^2_opt(CNLSE) - Q^2_opt(Manakov) in dB implied by the mean a_NL values."""
    return 10.0 / 3.0 * math.log10(dist_manakov.mu / dist_cnlse.mu)
