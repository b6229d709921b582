"""Aperture transmittance of the elliptic beam and Monte Carlo distributions.

The normalized beam intensity is integrated in polar coordinates over the
receiver disk: Gauss-Legendre nodes along the radius crossed with a
periodic trapezoid rule around the circle, refined level by level until two
successive estimates agree to 1e-6 relative.

Monte Carlo sampling is chunked: chunk j of a run with seed s draws from
the independent child stream SeedSequence((s, j)), so chunks may be
evaluated in any order (or concurrently) without changing the result, and
histogram accumulation is plain addition of per-chunk counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .atmosphere import (
    BeamVector,
    ChannelScene,
    beam_moments,
    extinction_factor,
    sample_beam_vectors,
    theta_law,
)
from .errors import DomainError, NumericError

#: successive (radial, angular) node counts tried until estimates stabilize
QUADRATURE_LEVELS = (
    (12, 24), (18, 36), (27, 54), (40, 80), (60, 120), (90, 180), (135, 270),
)
QUADRATURE_RTOL = 1e-6

#: fixed Monte Carlo chunk size; chunk j draws from SeedSequence((seed, j))
SAMPLE_CHUNK = 4096

_WORK_BUDGET = 12_000_000  # max scratch elements per quadrature slab

#: signature shared by the protocol rate functions: (d, q, xi) -> bits/pulse
RateFunction = Callable[[int, float, float], float]


@lru_cache(maxsize=None)
def _polar_nodes(n_rho: int, n_theta: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Unit-disk nodes and weights (radius scales by r_ap, weights by r_ap^2).
    t, w = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * (t + 1.0)
    w_rho = 0.5 * w
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    x = np.outer(rho, np.cos(theta)).ravel()
    y = np.outer(rho, np.sin(theta)).ravel()
    weights = np.repeat(rho * w_rho, n_theta) * (2.0 * math.pi / n_theta)
    return x, y, weights


def _eta_level(
    level: tuple[int, int],
    r_ap: float,
    a1: np.ndarray,
    a2: np.ndarray,
    a3: np.ndarray,
    rho0: np.ndarray,
    norm: np.ndarray,
) -> np.ndarray:
    x, y, w = _polar_nodes(*level)
    nodes_x = r_ap * x
    nodes_y = r_ap * y
    nodes_y2 = nodes_y * nodes_y
    weights = (r_ap * r_ap) * w
    out = np.empty(a1.shape[0])
    step = max(1, _WORK_BUDGET // nodes_x.size)
    for lo in range(0, a1.shape[0], step):
        hi = min(a1.shape[0], lo + step)
        dx = nodes_x[None, :] - rho0[lo:hi, None]
        expo = a1[lo:hi, None] * (dx * dx)
        expo += a2[lo:hi, None] * nodes_y2[None, :]
        expo += a3[lo:hi, None] * (dx * nodes_y[None, :])
        expo *= -2.0
        np.exp(expo, out=expo)
        out[lo:hi] = expo @ weights
    return out * norm


def _transmittance_batch(
    x0: np.ndarray,
    y0: np.ndarray,
    w1: np.ndarray,
    w2: np.ndarray,
    phi_rel: np.ndarray,
    r_ap: float,
    chi_ext: float,
    index_offset: int = 0,
) -> np.ndarray:
    """Transmittance for a batch of beams, each refined until converged."""
    rho0 = np.hypot(x0, y0)
    cos2 = np.cos(phi_rel) ** 2
    sin2 = 1.0 - cos2
    inv_w1sq = 1.0 / (w1 * w1)
    inv_w2sq = 1.0 / (w2 * w2)
    a1 = cos2 * inv_w1sq + sin2 * inv_w2sq
    a2 = sin2 * inv_w1sq + cos2 * inv_w2sq
    a3 = (inv_w1sq - inv_w2sq) * np.sin(2.0 * phi_rel)
    norm = 2.0 * chi_ext / (math.pi * w1 * w2)

    eta = np.zeros(x0.shape[0])
    active = np.arange(x0.shape[0])
    prev = np.empty(0)
    last_diff = np.empty(0)
    for i, level in enumerate(QUADRATURE_LEVELS):
        est = _eta_level(level, r_ap, a1[active], a2[active], a3[active],
                         rho0[active], norm[active])
        if i == 0:
            prev = est
            continue
        diff = np.abs(est - prev)
        done = diff <= QUADRATURE_RTOL * np.abs(est) + 1e-15
        eta[active[done]] = est[done]
        keep = ~done
        active = active[keep]
        prev = est[keep]
        last_diff = diff[keep]
        if not active.size:
            break
    if active.size:
        worst = int(np.argmax(last_diff))
        raise NumericError(
            "aperture-transmittance quadrature did not converge for sample "
            f"{index_offset + int(active[worst])}: estimate {float(prev[worst])!r}, "
            f"successive-level difference {float(last_diff[worst])!r} "
            f"(relative tolerance {QUADRATURE_RTOL})"
        )
    return np.clip(eta, 0.0, chi_ext)


def aperture_transmittance(beam: BeamVector, r_ap: float, chi_ext: float = 1.0) -> float:
    """Fraction of the beam's power passing a circular aperture of radius
    ``r_ap``, scaled by the extinction transmissivity; value in [0, chi_ext]."""
    if not r_ap > 0.0:
        raise DomainError(f"aperture radius must be positive, got {r_ap!r}")
    if not 0.0 < chi_ext <= 1.0:
        raise DomainError(f"extinction transmissivity must lie in (0, 1], got {chi_ext!r}")
    eta = _transmittance_batch(
        np.array([beam.x0]), np.array([beam.y0]), np.array([beam.W1]),
        np.array([beam.W2]), np.array([beam.phi_rel]), float(r_ap), float(chi_ext),
    )
    return float(eta[0])


def _validated_seed(seed) -> int:
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}") from None
    if seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    return seed


def _channel_chunks(
    scene: ChannelScene, n_samples: int, seed: int
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_index, transmittances) per fixed-size sample chunk."""
    moments = beam_moments(scene)
    law = theta_law(moments)
    chi = extinction_factor(scene.zenith, scene.beta)
    for j, start in enumerate(range(0, n_samples, SAMPLE_CHUNK)):
        count = min(SAMPLE_CHUNK, n_samples - start)
        rng = np.random.default_rng(np.random.SeedSequence((seed, j)))
        batch = sample_beam_vectors(law, moments.var_centroid, count, rng)
        eta = _transmittance_batch(
            batch.x0, batch.y0, batch.W1, batch.W2, batch.phi_rel,
            scene.r_ap, chi, index_offset=start,
        )
        yield start, eta


@dataclass(frozen=True)
class TransmittanceDistribution:
    """Binned distribution of the transmittance over beam realizations."""

    bin_centers: np.ndarray
    probabilities: np.ndarray
    n_samples: int
    n_bins: int
    seed: int
    chi_ext: float

    @property
    def mean_eta(self) -> float:
        """Mean transmittance under the binned distribution."""
        return float(np.dot(self.bin_centers, self.probabilities))


def estimate_pdt(
    scene: ChannelScene, n_samples: int, n_bins: int = 100, seed: int = 0
) -> TransmittanceDistribution:
    """Monte Carlo transmittance distribution over ``n_samples`` beam draws.

    Transmittances (extinction included) are binned into ``n_bins``
    equal-width bins on [0, 1]; the result is deterministic per seed.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be at least 1, got {n_samples!r}")
    if n_bins < 1:
        raise DomainError(f"n_bins must be at least 1, got {n_bins!r}")
    seed = _validated_seed(seed)
    counts = np.zeros(n_bins, dtype=np.int64)
    for _, eta in _channel_chunks(scene, n_samples, seed):
        counts += np.histogram(eta, bins=n_bins, range=(0.0, 1.0))[0]
    centers = (np.arange(n_bins) + 0.5) / n_bins
    return TransmittanceDistribution(
        bin_centers=centers, probabilities=counts / n_samples,
        n_samples=n_samples, n_bins=n_bins, seed=seed,
        chi_ext=extinction_factor(scene.zenith, scene.beta),
    )


def average_key_rate(
    pdt: TransmittanceDistribution,
    protocol_rate: RateFunction,
    d: int,
    q: float,
    xi: float = 1.0,
) -> float:
    """PDT-weighted key rate, sum over bins of eta_i * rate(d, q, xi) * P(eta_i).

    The transmittance scales the per-pulse rate linearly, so this equals the
    mean transmittance times the protocol rate.
    """
    return pdt.mean_eta * protocol_rate(d, q, xi)


@dataclass(frozen=True)
class RateDistribution:
    """Distribution of the per-realization key rate, rounded for grouping."""

    rate_values: np.ndarray
    probabilities: np.ndarray
    rounding_decimals: int


def key_rate_distribution(
    scene: ChannelScene,
    protocol_rate: RateFunction,
    d: int,
    q: float,
    xi: float,
    n_samples: int,
    rounding_decimals: int,
    seed: int,
) -> RateDistribution:
    """Value -> frequency distribution of eta * rate over beam draws.

    Rates are rounded to ``rounding_decimals`` places before grouping;
    deterministic per seed (sharing a seed with :func:`estimate_pdt` reuses
    the exact same beam draws).
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be at least 1, got {n_samples!r}")
    if rounding_decimals < 0:
        raise DomainError(f"rounding_decimals must be non-negative, got {rounding_decimals!r}")
    seed = _validated_seed(seed)
    rate = protocol_rate(d, q, xi)
    counts: dict[float, int] = {}
    for _, eta in _channel_chunks(scene, n_samples, seed):
        values, chunk_counts = np.unique(
            np.round(eta * rate, rounding_decimals), return_counts=True
        )
        for value, count in zip(values.tolist(), chunk_counts.tolist()):
            counts[value] = counts.get(value, 0) + count
    rate_values = np.array(sorted(counts))
    probabilities = np.array([counts[v] for v in rate_values.tolist()], dtype=float)
    return RateDistribution(
        rate_values=rate_values,
        probabilities=probabilities / n_samples,
        rounding_decimals=rounding_decimals,
    )
