"""Unit conventions and conversions.

All internal frequencies are angular (rad/us), all times are in us,
all lengths in um.  Configuration files and most published parameter
values quote ordinary frequencies, so the converters below are the
single place where the 2*pi bookkeeping happens.
"""

import math

TWO_PI = 2.0 * math.pi


def mhz_to_angular(value_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * value_mhz


def khz_to_angular(value_khz: float) -> float:
    """Ordinary frequency in kHz -> angular frequency in rad/us."""
    return TWO_PI * value_khz * 1e-3


def angular_to_mhz(value: float) -> float:
    """Angular frequency in rad/us -> ordinary frequency in MHz."""
    return value / TWO_PI
