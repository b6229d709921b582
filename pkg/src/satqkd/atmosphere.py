"""Link geometry, weather presets, beam-parameter statistics, and sampling.

Model: a uniform turbulent/scattering slab of thickness h_bar sits at the
ground end of the path and vacuum extends to the satellite at altitude
L_bar; at zenith angle phi both lengths stretch by sec(phi). The beam
arriving at the receiver plane is an elliptic Gaussian described by
(x0, y0, W1, W2, phi_rel): centroid offset, principal semi-axes, and the
ellipse orientation relative to the centroid direction.

The squared semi-axes are lognormal -- Theta_i = ln(W_i^2 / W0^2) is
bivariate normal -- with the law fixed by matching the slab-model mean and
covariance of W_i^2, which differ between up-link (atmosphere first, so
turbulent beam wander and strong broadening) and down-link (vacuum first,
so pointing error dominates the centroid and broadening is mild).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericError

#: slab-model validity limit for the zenith angle
MAX_ZENITH = math.radians(80.0)

#: (Cn2 [m^-2/3], n0 [m^-3]) per weather condition
WEATHER_PRESETS = {
    "day1": (1.64e-16, 0.01),
    "day2": (8.00e-16, 0.05),
    "day3": (1.60e-15, 0.10),
    "night1": (1.12e-16, 0.61),
    "night2": (5.50e-16, 3.00),
    "night3": (1.10e-15, 6.10),
}

#: selectable readings of the down-link pointing-error centroid variance
POINTING_MODELS = ("off", "alpha_L_squared", "alpha_sq_L", "literal_alpha_L")

#: default transmitter spot radius W0 and receiver aperture r_ap per direction
DEFAULT_OPTICS = {
    "downlink": (0.15, 0.50),
    "uplink": (0.50, 0.15),
}


def weather_preset(name: str) -> tuple[float, float]:
    """(Cn2, n0) for a named weather condition."""
    try:
        return WEATHER_PRESETS[name]
    except (KeyError, TypeError):
        raise DomainError(
            f"unknown weather preset {name!r}; valid presets: "
            f"{', '.join(sorted(WEATHER_PRESETS))}"
        ) from None


def _normalize_direction(direction: str) -> str:
    canon = str(direction).lower().replace("-", "").replace("_", "")
    if canon in ("downlink", "down"):
        return "downlink"
    if canon in ("uplink", "up"):
        return "uplink"
    raise DomainError(f"link direction must be 'uplink' or 'downlink', got {direction!r}")


def _validate_zenith(zenith: float) -> float:
    zenith = float(zenith)
    if not 0.0 <= zenith <= MAX_ZENITH + 1e-12:
        raise DomainError(
            f"zenith angle {zenith!r} rad outside the model validity range "
            f"[0, {MAX_ZENITH}] (80 degrees)"
        )
    return zenith


@dataclass(frozen=True)
class ChannelScene:
    """One fully specified optical link.

    Lengths in meters, angles in radians. W0 and r_ap default to the
    standard optics for the link direction: 0.15 m spot / 0.50 m aperture
    for a down-link, swapped for an up-link.
    """

    direction: str
    zenith: float = 0.0
    L_bar: float = 500e3           # satellite altitude
    h_bar: float = 20e3            # atmosphere thickness
    wavelength: float = 785e-9
    W0: float | None = None        # transmitter beam-spot radius
    r_ap: float | None = None      # receiver aperture radius
    alpha: float = 2e-6            # angular pointing error
    beta: float = 0.7              # extinction parameter
    Cn2: float = 1.64e-16          # refractive-index structure constant
    n0: float = 0.01               # scattering-particle density
    pointing_model: str = "alpha_L_squared"

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", _normalize_direction(self.direction))
        w0_default, r_ap_default = DEFAULT_OPTICS[self.direction]
        if self.W0 is None:
            object.__setattr__(self, "W0", w0_default)
        if self.r_ap is None:
            object.__setattr__(self, "r_ap", r_ap_default)
        _validate_zenith(self.zenith)
        if not self.L_bar > self.h_bar > 0.0:
            raise DomainError(
                f"need L_bar > h_bar > 0, got L_bar={self.L_bar!r}, h_bar={self.h_bar!r}"
            )
        for name in ("wavelength", "W0", "r_ap"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("alpha", "beta", "Cn2", "n0"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.pointing_model not in POINTING_MODELS:
            raise DomainError(
                f"unknown pointing model {self.pointing_model!r}; "
                f"choose one of {', '.join(POINTING_MODELS)}"
            )


def scene_from_preset(direction: str, weather: str, **overrides) -> ChannelScene:
    """Scene with (Cn2, n0) filled from a weather preset; overrides win."""
    cn2, n0 = weather_preset(weather)
    params: dict = {"Cn2": cn2, "n0": n0}
    params.update(overrides)
    return ChannelScene(direction=direction, **params)


def link_geometry(L_bar: float, h_bar: float, zenith: float) -> tuple[float, float]:
    """Slant link length and slant atmospheric path at the given zenith angle."""
    zenith = _validate_zenith(zenith)
    if not L_bar > h_bar > 0.0:
        raise DomainError(f"need L_bar > h_bar > 0, got L_bar={L_bar!r}, h_bar={h_bar!r}")
    stretch = 1.0 / math.cos(zenith)
    return L_bar * stretch, h_bar * stretch


def derived_optics(scene: ChannelScene) -> tuple[float, float, float]:
    """Wave number k, Fresnel number Omega, and Rytov variance sigma_R^2."""
    L, _ = link_geometry(scene.L_bar, scene.h_bar, scene.zenith)
    k = 2.0 * math.pi / scene.wavelength
    omega = k * scene.W0**2 / (2.0 * L)
    sigma_r2 = 1.23 * scene.Cn2 * k ** (7.0 / 6.0) * L ** (11.0 / 6.0)
    return k, omega, sigma_r2


def extinction_factor(zenith: float, beta: float) -> float:
    """Transmissivity surviving back-scattering and absorption,
    exp(-beta * sec(zenith))."""
    zenith = _validate_zenith(zenith)
    if beta < 0.0:
        raise DomainError(f"extinction parameter must be non-negative, got {beta!r}")
    return math.exp(-beta / math.cos(zenith))


@dataclass(frozen=True)
class BeamMoments:
    """First and second moments of the received-beam parameters.

    var_centroid: variance (m^2) of each centroid coordinate.
    mean_W2: mean squared semi-axis (m^2), identical for both axes.
    cov_W2: 2x2 covariance (m^4) of the squared semi-axes; the common
        turbulence scale enters with weight +1.2 on the diagonal and -0.8
        off it, so the two axes anti-correlate.
    """

    var_centroid: float
    mean_W2: float
    cov_W2: np.ndarray
    W0: float


def _downlink_pointing_variance(scene: ChannelScene, L: float) -> float:
    # Model-selectable reading of the small-angle pointing error alpha over
    # the slant path L; "off" matches the negligible-wander regime.
    model = scene.pointing_model
    if model == "off":
        return 0.0
    if model == "alpha_L_squared":
        return (scene.alpha * L) ** 2
    if model == "alpha_sq_L":
        return scene.alpha**2 * L
    return scene.alpha * L  # literal_alpha_L: the raw product, read in m^2


def beam_moments(scene: ChannelScene) -> BeamMoments:
    """Slab-model moments of (x0, y0, W1^2, W2^2) for the scene's direction."""
    L, h = link_geometry(scene.L_bar, scene.h_bar, scene.zenith)
    _, omega, sigma_r2 = derived_optics(scene)
    w0 = scene.W0
    path_frac = h / L
    diffraction_w2 = w0**2 / omega**2

    if scene.direction == "uplink":
        var_centroid = 0.419 * sigma_r2 * w0**2 * omega ** (-7.0 / 6.0) * path_frac
        scatter = 1.0 + (math.pi / 8.0) * L * scene.n0 * w0**2 * path_frac
        broaden = 2.6 * sigma_r2 * omega ** (5.0 / 6.0) * path_frac
        spread_scale = (w0**4 / omega ** (19.0 / 6.0)) * scatter * sigma_r2 * path_frac
    else:
        var_centroid = _downlink_pointing_variance(scene, L)
        scatter = 1.0 + (math.pi / 24.0) * L * scene.n0 * w0**2 * path_frac**3
        broaden = 1.6 * sigma_r2 * omega ** (5.0 / 6.0) * path_frac ** (8.0 / 3.0)
        spread_scale = (
            0.375 * (w0**4 / omega ** (19.0 / 6.0)) * scatter * sigma_r2
            * path_frac ** (8.0 / 3.0)
        )

    mean_w2 = diffraction_w2 * (scatter + broaden)
    for name, value in (
        ("var_centroid", var_centroid),
        ("mean_W2", mean_w2),
        ("cov_W2 scale", spread_scale),
    ):
        if not math.isfinite(value):
            raise NumericError(f"beam-moment term {name} is not finite: {value!r}")
    cov_w2 = spread_scale * np.array([[1.2, -0.8], [-0.8, 1.2]])
    return BeamMoments(var_centroid=var_centroid, mean_W2=mean_w2, cov_W2=cov_w2, W0=w0)


@dataclass(frozen=True)
class ThetaLawParams:
    """Bivariate normal law of the log squared semi-axes ln(W_i^2 / W0^2)."""

    mu: np.ndarray      # (2,)
    sigma: np.ndarray   # (2, 2) covariance
    W0: float


def theta_law(moments: BeamMoments) -> ThetaLawParams:
    """Moment-matched lognormal law for the squared semi-axes.

    Chosen so that the mean and covariance of W0^2 * exp(Theta) reproduce
    mean_W2 and cov_W2 exactly.
    """
    mean_ratio = moments.mean_W2 / moments.W0**2
    if mean_ratio <= 0.0:
        raise DomainError(f"mean squared semi-axis must be positive, got {moments.mean_W2!r}")
    rel_cov = np.asarray(moments.cov_W2, dtype=float) / (moments.W0**4 * mean_ratio**2)
    if 1.0 + rel_cov[0, 1] <= 0.0:
        raise DomainError(
            "squared-axis anti-correlation too strong for a lognormal law "
            f"(1 + c12/m^2 = {1.0 + rel_cov[0, 1]!r}); scene outside the validated range"
        )
    sigma = np.log1p(rel_cov)
    eigenvalues = np.linalg.eigvalsh(sigma)
    if eigenvalues[0] < -1e-12:
        raise DomainError(
            f"log-axis covariance is not positive semi-definite ({eigenvalues}); "
            "scene outside the validated range"
        )
    mu = np.log(mean_ratio) - 0.5 * np.diag(sigma)
    return ThetaLawParams(mu=mu, sigma=sigma, W0=moments.W0)


@dataclass(frozen=True)
class BeamVector:
    """One received-beam realization: centroid coordinates (m), principal
    semi-axes (m), and ellipse orientation relative to the centroid
    direction (rad, in [0, pi/2])."""

    x0: float
    y0: float
    W1: float
    W2: float
    phi_rel: float

    def __post_init__(self) -> None:
        if not (self.W1 > 0.0 and self.W2 > 0.0):
            raise DomainError(
                f"semi-axes must be positive, got W1={self.W1!r}, W2={self.W2!r}"
            )
        if not 0.0 <= self.phi_rel <= math.pi / 2.0 + 1e-12:
            raise DomainError(f"phi_rel {self.phi_rel!r} outside [0, pi/2]")


class BeamSample(NamedTuple):
    """Vectorized batch of beam realizations."""

    x0: np.ndarray
    y0: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    phi_rel: np.ndarray


def _sigma_cholesky(sigma: np.ndarray) -> np.ndarray:
    if not np.any(sigma):
        return np.zeros((2, 2))
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        # PSD but singular: eigenvalue square root
        w, v = np.linalg.eigh(sigma)
        return v * np.sqrt(np.clip(w, 0.0, None))


def sample_beam_vectors(
    law: ThetaLawParams, var_centroid: float, n: int, rng: np.random.Generator
) -> BeamSample:
    """Draw ``n`` beam realizations from one RNG stream, vectorized.

    The draw order is fixed (x0 block, y0 block, log-axis block, orientation
    block), so a given stream and count always yield the same batch.
    """
    if n < 1:
        raise DomainError(f"sample count must be at least 1, got {n!r}")
    if var_centroid < 0.0:
        raise DomainError(f"centroid variance must be non-negative, got {var_centroid!r}")
    sd = math.sqrt(var_centroid)
    x0 = sd * rng.standard_normal(n)
    y0 = sd * rng.standard_normal(n)
    theta = law.mu + rng.standard_normal((n, 2)) @ _sigma_cholesky(law.sigma).T
    w1 = law.W0 * np.exp(0.5 * theta[:, 0])
    w2 = law.W0 * np.exp(0.5 * theta[:, 1])
    phi_rel = rng.uniform(0.0, math.pi / 2.0, n)
    return BeamSample(x0=x0, y0=y0, W1=w1, W2=w2, phi_rel=phi_rel)


def sample_beam_vector(
    law: ThetaLawParams, var_centroid: float, rng: np.random.Generator
) -> BeamVector:
    """Draw a single beam realization from the given RNG stream."""
    batch = sample_beam_vectors(law, var_centroid, 1, rng)
    return BeamVector(
        x0=float(batch.x0[0]), y0=float(batch.y0[0]),
        W1=float(batch.W1[0]), W2=float(batch.W2[0]),
        phi_rel=float(batch.phi_rel[0]),
    )
