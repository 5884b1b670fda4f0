"""
hyperion/units.py

The only place SI units enter the package: the breakdown-time estimate
t_q = t_c ln(R sqrt(m k_B T) / hbar) for a body of size R and mass m at temperature T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as si

from quantum.qcore import InvalidInputError

from .constants import SECONDS_PER_DAY, SECONDS_PER_YEAR


@dataclass(frozen=True)
class HeadlineEstimate:
    t_c_seconds: float
    t_q_seconds: float
    de_broglie_m: float
    log_factor: float

    @property
    def t_q_years(self) -> float:
        return self.t_q_seconds / SECONDS_PER_YEAR

    def to_dict(self) -> dict:
        return {
            "t_c_seconds": self.t_c_seconds,
            "t_c_days": self.t_c_seconds / SECONDS_PER_DAY,
            "t_q_seconds": self.t_q_seconds,
            "t_q_years": self.t_q_years,
            "de_broglie_m": self.de_broglie_m,
            "log_factor": self.log_factor,
        }


def thermal_de_broglie(mass: float, temperature: float) -> float:
    """
    hbar / sqrt(m k_B T) in metres.

    For a 1e19 kg body at 100 K this is 8.97e-34 m. The often quoted
    "about 1e-34 m" for such a moon is an order of magnitude only; the factor
    of nine enters t_q through the logarithm and moves it by under 5%.
    """
    return si.hbar / math.sqrt(mass * si.k * temperature)


def tq_headline(t_c: float, radius: float, mass: float, temperature: float) -> HeadlineEstimate:
    """
    :param t_c: chaos time in seconds
    :param radius: size R in metres
    :param mass: kilograms
    :param temperature: kelvin
    """
    for name, value in (("t_c", t_c), ("radius", radius), ("mass", mass), ("temperature", temperature)):
        if not (value > 0.0 and math.isfinite(value)):
            raise InvalidInputError(f"{name} must be positive and finite, got {value}")
    length = thermal_de_broglie(mass, temperature)
    log_factor = math.log(radius / length)
    return HeadlineEstimate(t_c, t_c * log_factor, length, log_factor)


def days(value: float) -> float:
    return value * SECONDS_PER_DAY
