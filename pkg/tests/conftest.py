"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from satqkd import Bb84Params, bb84_key_rate, ext_b92_key_rate


def bb84_rate(d: int, q: float, xi: float = 1.0) -> float:
    return bb84_key_rate(Bb84Params(d=d, q=q, xi=xi))


def ext_b92_rate(d: int, q: float, xi: float = 1.0) -> float:
    return ext_b92_key_rate(d, q, xi)


def riemann_transmittance(
    x0: float, y0: float, w1: float, w2: float, phi_rel: float,
    r_ap: float, n_grid: int = 2000, chi: float = 1.0,
) -> float:
    """Brute-force Cartesian midpoint sum of the beam intensity over the disk.

    Independent construction: the elliptic Gaussian is built by rotating into
    its principal frame instead of expanding the quadratic-form coefficients.
    """
    rho0 = math.hypot(x0, y0)
    h = 2.0 * r_ap / n_grid
    axis = (np.arange(n_grid) + 0.5) * h - r_ap
    x, y = np.meshgrid(axis, axis, indexing="ij")
    inside = x**2 + y**2 <= r_ap**2
    dx = x - rho0
    u = math.cos(phi_rel) * dx + math.sin(phi_rel) * y
    v = -math.sin(phi_rel) * dx + math.cos(phi_rel) * y
    intensity = (2.0 / (math.pi * w1 * w2)) * np.exp(
        -2.0 * (u / w1) ** 2 - 2.0 * (v / w2) ** 2
    )
    return chi * float((intensity * inside).sum() * h * h)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
