"""Smoothstep transition profiles on [0, 1]."""
import numpy as np


def _quintic(u):
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def _quintic_slope(u):
    return 30.0 * u * u * (u - 1.0) ** 2


def _septic(u):
    return u ** 4 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)))


def _septic_slope(u):
    return 140.0 * u ** 3 * (1.0 - u) ** 3


# name -> (value, slope, max slope)
PROFILES = {
    "quintic": (_quintic, _quintic_slope, 15.0 / 8.0),
    "septic": (_septic, _septic_slope, 35.0 / 16.0),
}


def smoothstep(u, profile="quintic"):
    """Profile value, 0 for u <= 0 and 1 for u >= 1."""
    f = PROFILES[profile][0]
    return f(np.clip(u, 0.0, 1.0))


def smoothstep_slope(u, profile="quintic"):
    u = np.asarray(u, dtype=float)
    g = PROFILES[profile][1]
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, g(np.clip(u, 0.0, 1.0)), 0.0)


def max_slope(profile="quintic"):
    return PROFILES[profile][2]
