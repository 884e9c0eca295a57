"""Engineering-unit conversions. Everything internal is SI."""
import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s
PLANCK = 6.62607015e-34  # J s

PS = 1e-12
KM = 1e3
NM = 1e-9


def dbm_to_w(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def w_to_dbm(p_w):
    return 10.0 * math.log10(p_w / 1e-3)


def db_to_lin(x_db):
    return 10.0 ** (x_db / 10.0)


def lin_to_db(x):
    return 10.0 * math.log10(x)


def db_per_km_to_neper_per_m(a_db_km):
    """Power attenuation coefficient: dB/km -> 1/m."""
    return a_db_km * math.log(10.0) / 10.0 / KM


def ps_nm_km_to_si(d):
    """Dispersion parameter ps/(nm km) -> s/m^2."""
    return d * PS / (NM * KM)


def ps_sqrt_km_to_si(pmd):
    """PMD coefficient ps/sqrt(km) -> s/sqrt(m)."""
    return pmd * PS / math.sqrt(KM)


def per_w_km_to_si(gamma):
    """Nonlinear coefficient 1/(W km) -> 1/(W m)."""
    return gamma / KM


def per_w2_to_per_mw2(a):
    """a_NL in 1/W^2 -> 1/mW^2."""
    return a * 1e-6


def per_mw2_to_per_w2(a):
    return a * 1e6


def anl_to_db(a_per_w2):
    """a_NL (1/W^2) expressed as 10 log10 of its value in 1/mW^2."""
    return 10.0 * math.log10(per_w2_to_per_mw2(a_per_w2))


def anl_from_db(a_db):
    return per_mw2_to_per_w2(10.0 ** (a_db / 10.0))
